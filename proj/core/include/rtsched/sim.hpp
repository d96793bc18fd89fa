#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/config.hpp"
#include "rtsched/disruption.hpp"
#include "rtsched/ingest.hpp"
#include "rtsched/metrics.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"
#include "rtsched/schedule.hpp"

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace rtsched {

// Everything a replay needs, loaded once and shared read-only. The park
// here carries planned unavailability only; failures are replayed on the
// morning of their day.
struct SimInputs {
    RunConfig config;
    CalendarConfig calendar_config;
    std::shared_ptr<WorkingCalendar> calendar;
    MachinePark park;
    ProtocolTable protocols;
    CourseTable courses;
    std::vector<FailureEvent> failures;
    Schedule input_schedule; // frozen pre-existing bookings
    std::vector<std::string> warnings;
};

SimInputs load_sim_inputs(const RunConfig& config);

struct DayTrace {
    Date date;
    int arrivals = 0;
    int batch_size = 0;
    int scheduled = 0;
    int deferred = 0;
    int placeholders = 0;
    int displaced = 0;
    long plans_considered = 0;
    double solve_seconds = 0.0;
    bool budget_exceeded = false;
};

struct SimOutput {
    Schedule schedule;
    MachinePark park; // planned + replayed failures, for audits and occupancy
    std::vector<Displacement> displacement_log;
    std::vector<DayTrace> trace;
    std::vector<nlohmann::json> batch_traces;
    std::vector<std::string> final_deferred;
    QualityReport report;
};

// Resumable state between days. Serializes to JSON; reloading and resuming
// reproduces the original run bit for bit.
struct SimState {
    Date next_day;               // first unprocessed working day
    Schedule schedule;
    std::vector<std::string> deferred;
    std::vector<Displacement> displacement_log;
    std::vector<DayTrace> trace;
    std::vector<nlohmann::json> batch_traces;
};

nlohmann::json sim_state_to_json(const SimState& state);
SimState sim_state_from_json(const nlohmann::json& j);

// Deterministic day loop: failures -> reservation -> batch solve ->
// start-time assignment -> notification freeze. `baseline` switches to the
// first-come-first-served scheduler with static time reservation.
// `resume_from` continues a snapshotted run.
SimOutput run_simulation(const SimInputs& inputs, bool baseline,
                         const SimState* resume_from = nullptr,
                         std::vector<nlohmann::json>* snapshots = nullptr);

// --- wire formats -----------------------------------------------------------

std::string schedule_csv(const Schedule& schedule);
// Durations come from the course table; unknown course ids are an error.
Schedule parse_schedule_csv(const std::string& content, const std::string& origin,
                            const CourseTable& courses);

std::string day_trace_csv(const std::vector<DayTrace>& trace);

} // namespace rtsched
