#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/config.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"
#include "rtsched/schedule.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rtsched {

// One fully specified way to deliver a course: a (machine, date, window)
// triple per fraction, chronological, satisfying every protocol constraint.
struct CandidatePlan {
    struct Slot {
        std::string machine;
        Date date;
        int window = 0;
        auto operator<=>(const Slot&) const = default;
    };
    std::string course_id;
    std::vector<Slot> slots;
    std::int64_t cost = 0;
    // cost breakdown, for traces and tests
    int waiting_days = 0;
    int excess_days = 0;
    int window_switches = 0;
    int off_window = 0;
    int non_preferred = 0;
    int partial_switches = 0;
    int off_site = 0;

    bool operator<(const CandidatePlan& o) const {
        return std::tie(cost, slots) < std::tie(o.cost, o.slots);
    }
};

// Synthetic future priority-A demand used to reserve capacity during one
// batch solve. Never leaves the solver.
struct PlaceholderPatient {
    std::string id; // "~PH..." namespace, disjoint from real course ids
    Date expected_arrival;
    int fractions = 5;
    int duration = 15;
};

bool is_placeholder_id(const std::string& course_id);

// Expected future priority-A arrivals per working day: the trailing-mean
// rate over `trailing_window_days` working days ending today (clamped to
// available history), rounded to the nearest integer; the configured prior
// when no history exists. One batch of placeholders per future working day
// in the reservation horizon.
std::vector<PlaceholderPatient> reserve_placeholders(const CourseTable& courses,
                                                     const ProtocolTable& protocols,
                                                     Date history_begin, Date today,
                                                     const WorkingCalendar& cal,
                                                     const SolverParams& params);

// A course prepared for one batch: protocol resolved, earliest start fixed.
struct PendingCourse {
    TreatmentCourse course;
    const TreatmentProtocol* protocol = nullptr;
    Date earliest;
    int start_day_window = 0; // working days of start flexibility after earliest
    bool placeholder = false;
    WindowPreference pref = WindowPreference::none;
};

// The batch solver's working state: frozen schedule + machine blocks,
// overlaid with this batch's provisional commitments. Enumeration reads it;
// commits run an exact packing simulation per touched machine-day.
class SolveContext {
public:
    SolveContext(const WorkingCalendar& cal, const MachinePark& park, const Schedule& schedule,
                 const ProtocolTable& protocols, const CourseTable& courses, Date today,
                 Date horizon_end);

    const WorkingCalendar& calendar() const { return cal_; }
    const MachinePark& park() const { return park_; }
    Date today() const { return today_; }
    Date horizon_end() const { return horizon_end_; }

    // Static per-machine-day reservation for priority-A patients (baseline
    // scheduler); minutes at the end of each operating day, released one
    // day ahead.
    void set_static_reserve(int minutes);

    bool quick_fits(const std::string& machine, Date date, int window, int duration,
                    bool priority_a) const;
    bool commit(const CandidatePlan& plan, Priority prio);
    void rollback(const CandidatePlan& plan);
    bool exact_fits(const CandidatePlan& plan, Priority prio); // commit+rollback probe

    // Per-fraction durations must be registered before committing a plan
    // for that course.
    void register_durations(const std::string& course_id, std::vector<int> durations);

    // Write every committed plan into the schedule (window level, starts
    // unassigned) and tag the batch day.
    void apply_to_schedule(Schedule& schedule, const std::vector<const CandidatePlan*>& plans);

    long packs_simulated() const { return packs_simulated_; }

private:
    struct DayState {
        std::vector<Interval> fixed_busy;  // blocks + already-scheduled appointments
        std::vector<int> booked;           // minutes per window, fixed + overlay
        std::vector<int> usable;           // window length minus blocked minutes
        std::vector<PackItem> overlay;     // this batch's provisional items
    };

    DayState& day_state(const std::string& machine, Date date) const;
    // Start times snap to the grid, so a booked slot effectively consumes
    // its duration rounded up to the grid.
    int grid_cost(int duration) const;

    const WorkingCalendar& cal_;
    const MachinePark& park_;
    const Schedule& schedule_;
    Date today_;
    Date horizon_end_;
    int static_reserve_minutes_ = 0;
    std::map<std::string, std::vector<int>> plan_durations_;
    mutable std::map<std::pair<std::string, Date>, DayState> days_;
    mutable long packs_simulated_ = 0;
};

// Up to K cheapest feasible plans for one course, cost-sorted. Includes a
// plan starting at the earliest start whenever the builder finds one.
// Empty result means no feasible plan in the horizon (surfaced by
// solve_batch as a deferral).
std::vector<CandidatePlan> enumerate_plans(const PendingCourse& pc, const SolveContext& ctx,
                                           const ObjectiveWeights& weights, int max_plans);

std::int64_t plan_cost_of(const PendingCourse& pc, const std::vector<CandidatePlan::Slot>& slots,
                          const SolveContext& ctx, const ObjectiveWeights& weights,
                          CandidatePlan* breakdown);

struct BatchResult {
    std::vector<std::string> scheduled;
    std::vector<std::string> deferred;
    int placeholders_requested = 0;
    int placeholders_placed = 0;
    long plans_considered = 0;
    std::int64_t cost_before_local_search = 0;
    std::int64_t cost_after_local_search = 0;
    double solve_seconds = 0.0;
    bool budget_exceeded = false;
    bool exact_fallback = false;
};

// End-of-day batch optimization: one plan per pending course (real and
// placeholder) minimizing total weighted cost under capacity; placeholders
// discarded afterwards; unplaceable courses returned as deferred.
// Deterministic for identical inputs.
BatchResult solve_batch(Schedule& schedule, const std::vector<std::string>& pending_ids,
                        const std::vector<PlaceholderPatient>& placeholders,
                        const CourseTable& courses, const ProtocolTable& protocols,
                        const MachinePark& park, const WorkingCalendar& cal,
                        const ObjectiveWeights& weights, const SolverParams& params,
                        const PreferenceModel& prefs, Date today, Date horizon_end);

// Exhaustive minimum-cost joint plan selection over the same candidate
// lists the heuristic uses. The verification side of the solver pair; also
// the optimality oracle for small instances.
struct ExactSolveResult {
    bool feasible = false; // a plan exists for every pending course jointly
    std::int64_t cost = 0;
    std::map<std::string, CandidatePlan> plans;
    long nodes = 0;
    bool node_cap_hit = false;
    long plans_enumerated = 0;
};

ExactSolveResult solve_exact(const Schedule& schedule, const std::vector<std::string>& pending_ids,
                             const CourseTable& courses, const ProtocolTable& protocols,
                             const MachinePark& park, const WorkingCalendar& cal,
                             const ObjectiveWeights& weights, const SolverParams& params,
                             const PreferenceModel& prefs, Date today, Date horizon_end,
                             long node_cap);

// First-come-first-served baseline: each course, in arrival order, takes
// the feasible plan with the earliest start (ties by cost); a static
// per-machine-day block is reserved for priority A and released one day
// ahead. Same freeze/defer semantics as solve_batch.
BatchResult schedule_fcfs(Schedule& schedule, const std::vector<std::string>& pending_ids,
                          const CourseTable& courses, const ProtocolTable& protocols,
                          const MachinePark& park, const WorkingCalendar& cal,
                          const ObjectiveWeights& weights, const SolverParams& params,
                          const PreferenceModel& prefs, Date today, Date horizon_end,
                          int reserve_minutes);

// Static reservation used by the baseline scheduler: the last `minutes` of
// each operating day stay off-limits to non-priority-A bookings on days
// >= release_after (released one day ahead of treatment).
struct StaticReserve {
    int minutes = 0;
    Date release_after; // reserve applies strictly after this date
    bool active() const { return minutes > 0; }
};

// Packs start-less appointments of one machine-day around the fixed ones:
// earliest-first, stable order (window, priority, course, fraction), every
// start on the grid. Idempotent on unchanged days. Throws IntegrityError
// when the day cannot be packed (solver bug by construction).
void assign_start_times(Schedule& schedule, const MachinePark& park, const WorkingCalendar& cal,
                        const CourseTable& courses, const ProtocolTable& protocols,
                        const std::string& machine, Date date,
                        const StaticReserve& reserve = {});
void assign_start_times_all(Schedule& schedule, const MachinePark& park,
                            const WorkingCalendar& cal, const CourseTable& courses,
                            const ProtocolTable& protocols, const StaticReserve& reserve = {});

// Notification rules: priority A freezes the day it is batched; B/C freeze
// 7 calendar days after their batch day, or by the last working day before
// their first fraction, whichever comes first. Frozen appointments are
// immutable to the batch solver.
void freeze_notifications(Schedule& schedule, const CourseTable& courses,
                          const ProtocolTable& protocols, const WorkingCalendar& cal,
                          Date today);

// Capacity audit of the already-booked schedule (overlaps, blocks,
// operating window). Throws IntegrityError; never repairs.
void verify_schedule_integrity(const Schedule& schedule, const MachinePark& park,
                               const WorkingCalendar& cal, Date from, Date to);

} // namespace rtsched
