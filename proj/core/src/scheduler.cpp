#include "rtsched/scheduler.hpp"

#include "rtsched/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

namespace rtsched {

namespace {

constexpr const char* kPlaceholderPrefix = "~PH";

// Builder-side protocol for placeholder demand: urgent, daily, any machine.
TreatmentProtocol placeholder_protocol(const MachinePark& park) {
    TreatmentProtocol p;
    p.protocol_id = "~placeholder";
    p.priority = Priority::A;
    p.min_fractions_per_week = 1;
    p.pre_treatment_days = 0;
    for (const Machine& m : park.machines()) p.preferred_machines.push_back(m.machine_id);
    p.first_fraction_duration = 15;
    p.subsequent_fraction_duration = 15;
    return p;
}

Date monday_of_week_on_or_after(Date d) { return d + ((7 - d.weekday()) % 7); }

// Full Mon-Fri weeks inside [first, last] must carry min_fractions_per_week
// fractions (capped by the week's working days).
bool satisfies_weekly_minimum(const std::vector<Date>& dates, const TreatmentProtocol& proto,
                              const WorkingCalendar& cal) {
    if (dates.empty()) return true;
    const Date first = dates.front();
    const Date last = dates.back();
    for (Date mon = monday_of_week_on_or_after(first); mon + 4 <= last; mon = mon + 7) {
        int working = 0;
        for (int i = 0; i < 5; ++i)
            if (cal.is_working_day(mon + i)) ++working;
        const int required = std::min(proto.min_fractions_per_week, working);
        int count = 0;
        for (Date d : dates)
            if (d >= mon && d <= mon + 4) ++count;
        if (count < required) return false;
    }
    return true;
}

} // namespace

bool is_placeholder_id(const std::string& course_id) {
    return course_id.rfind(kPlaceholderPrefix, 0) == 0;
}

std::vector<PlaceholderPatient> reserve_placeholders(const CourseTable& courses,
                                                     const ProtocolTable& protocols,
                                                     Date history_begin, Date today,
                                                     const WorkingCalendar& cal,
                                                     const SolverParams& params) {
    int days = 0;
    int arrivals = 0;
    if (history_begin <= today) {
        const Date hb = cal.next_working_day(history_begin);
        if (hb <= today) {
            const int available = cal.working_days_inclusive(hb, today);
            const int take = std::min(params.trailing_window_days, available);
            Date d = cal.add_working_days(today, -(take - 1));
            for (int i = 0; i < take; ++i) {
                for (const TreatmentCourse* c : courses.arrivals_on(d))
                    if (protocols.by_name(c->protocol_id).priority == Priority::A) ++arrivals;
                ++days;
                if (i + 1 < take) d = cal.add_working_days(d, 1);
            }
        }
    }
    const double rate = days > 0 ? static_cast<double>(arrivals) / days
                                 : params.placeholder.prior_daily_rate;
    const int per_day = static_cast<int>(std::lround(rate));

    std::vector<PlaceholderPatient> out;
    if (per_day <= 0) return out;
    for (int k = 1; k <= params.reservation_horizon_days; ++k) {
        auto d = cal.try_add_working_days(today, k);
        if (!d) break;
        for (int i = 0; i < per_day; ++i) {
            PlaceholderPatient ph;
            ph.id = std::string(kPlaceholderPrefix) + "-" + d->iso() + "-" + std::to_string(i);
            ph.expected_arrival = *d;
            ph.fractions = params.placeholder.fractions;
            ph.duration = params.placeholder.duration;
            out.push_back(std::move(ph));
        }
    }
    return out;
}

// --- cost ------------------------------------------------------------------

std::int64_t plan_cost_of(const PendingCourse& pc, const std::vector<CandidatePlan::Slot>& slots,
                          const SolveContext& ctx, const ObjectiveWeights& weights,
                          CandidatePlan* breakdown) {
    const WorkingCalendar& cal = ctx.calendar();
    const CalendarConfig& cc = cal.config();
    const TreatmentProtocol& proto = *pc.protocol;

    const int waiting = cal.working_days_between(pc.earliest, slots.front().date);
    const int span = cal.working_days_inclusive(slots.front().date, slots.back().date);
    const int excess = span - min_span(proto, static_cast<int>(slots.size()));

    int wswitch = 0, off_window = 0, non_pref = 0, partial = 0, off_site = 0;
    for (size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        if (i > 0 && slots[i - 1].window != s.window) ++wswitch;
        if (pc.pref != WindowPreference::none) {
            const bool am = cc.window_begin(s.window) < cc.noon_minute;
            if ((pc.pref == WindowPreference::am) != am) ++off_window;
        }
        if (!proto.machine_preferred(s.machine)) ++non_pref;
        if (!pc.course.site_preference.empty() &&
            ctx.park().at(s.machine).site_id != pc.course.site_preference)
            ++off_site;
        if (i > 0 && slots[i - 1].machine != s.machine &&
            ctx.park().beam_match(slots[i - 1].machine, s.machine) == BeamMatch::partial)
            ++partial;
    }

    const std::int64_t cost = weights.waiting_weight(proto.priority) * waiting +
                              weights.excess_per_day * excess + weights.window_switch * wswitch +
                              weights.off_window_per_fraction * off_window +
                              weights.non_preferred_per_fraction * non_pref +
                              weights.partial_switch * partial +
                              weights.off_site_per_fraction * off_site;
    if (breakdown) {
        breakdown->waiting_days = waiting;
        breakdown->excess_days = excess;
        breakdown->window_switches = wswitch;
        breakdown->off_window = off_window;
        breakdown->non_preferred = non_pref;
        breakdown->partial_switches = partial;
        breakdown->off_site = off_site;
    }
    return cost;
}

// --- context ----------------------------------------------------------------

SolveContext::SolveContext(const WorkingCalendar& cal, const MachinePark& park,
                           const Schedule& schedule, const ProtocolTable&, const CourseTable&,
                           Date today, Date horizon_end)
    : cal_(cal), park_(park), schedule_(schedule), today_(today), horizon_end_(horizon_end) {
    // Pre-build every machine-day in the horizon so that enumeration can
    // read the state from worker threads without mutation.
    for (const Machine& m : park_.machines())
        for (Date d = today_; d <= horizon_end_ && cal_.in_span(d); ++d)
            if (cal_.is_working_day(d)) day_state(m.machine_id, d);
}

void SolveContext::set_static_reserve(int minutes) { static_reserve_minutes_ = minutes; }

int SolveContext::grid_cost(int duration) const {
    const int grid = cal_.config().time_grid;
    return ((duration + grid - 1) / grid) * grid;
}

SolveContext::DayState& SolveContext::day_state(const std::string& machine, Date date) const {
    auto it = days_.find({machine, date});
    if (it != days_.end()) return it->second;

    DayState ds;
    const CalendarConfig& cc = cal_.config();
    const int nw = cc.n_windows();
    ds.booked.assign(static_cast<size_t>(nw), 0);
    ds.usable.assign(static_cast<size_t>(nw), 0);
    const auto blocks = park_.blocks(machine, date);
    for (int w = 0; w < nw; ++w) {
        const Interval win{cc.window_begin(w), cc.window_end(w)};
        int blocked = 0;
        for (const Interval& b : blocks) {
            const int lo = std::max(win.begin, b.begin);
            const int hi = std::min(win.end, b.end);
            blocked += std::max(0, hi - lo);
        }
        ds.usable[static_cast<size_t>(w)] = win.length() - blocked;
    }
    ds.fixed_busy = blocks;
    for (const Appointment* a : schedule_.day_appointments(machine, date)) {
        if (a->start < 0)
            throw IntegrityError("appointment " + a->course_id + "#" +
                                 std::to_string(a->fraction) + " has no start time");
        ds.fixed_busy.push_back(a->interval());
        if (a->window >= 0 && a->window < nw)
            ds.booked[static_cast<size_t>(a->window)] += grid_cost(a->duration);
    }
    ds.fixed_busy = merge_intervals(std::move(ds.fixed_busy));
    return days_.emplace(std::make_pair(machine, date), std::move(ds)).first->second;
}

bool SolveContext::quick_fits(const std::string& machine, Date date, int window, int duration,
                              bool priority_a) const {
    const DayState& ds = day_state(machine, date);
    int usable = ds.usable[static_cast<size_t>(window)];
    if (!priority_a && static_reserve_minutes_ > 0 && date - today_ > 1) {
        const CalendarConfig& cc = cal_.config();
        const int lo = std::max(cc.window_begin(window), cc.close_minute - static_reserve_minutes_);
        const int hi = cc.window_end(window);
        usable -= std::max(0, hi - lo);
    }
    return ds.booked[static_cast<size_t>(window)] + grid_cost(duration) <= usable;
}

bool SolveContext::commit(const CandidatePlan& plan, Priority prio) {
    const auto& durations = plan_durations_.at(plan.course_id);
    std::map<std::pair<std::string, Date>, std::vector<PackItem>> by_day;
    for (size_t i = 0; i < plan.slots.size(); ++i) {
        const auto& s = plan.slots[i];
        PackItem item;
        item.window = s.window;
        item.duration = durations[i];
        item.priority = prio;
        item.course_id = plan.course_id;
        item.fraction = static_cast<int>(i) + 1;
        by_day[{s.machine, s.date}].push_back(std::move(item));
    }
    const CalendarConfig& cc = cal_.config();
    for (auto& [key, items] : by_day) {
        DayState& ds = day_state(key.first, key.second);
        std::vector<PackItem> probe = ds.overlay;
        probe.insert(probe.end(), items.begin(), items.end());
        std::vector<Interval> non_a;
        if (static_reserve_minutes_ > 0 && key.second - today_ > 1)
            non_a.push_back({cc.close_minute - static_reserve_minutes_, cc.close_minute});
        ++packs_simulated_;
        if (!pack_day(cc, ds.fixed_busy, probe, non_a)) return false;
    }
    for (auto& [key, items] : by_day) {
        DayState& ds = day_state(key.first, key.second);
        for (PackItem& it : items) {
            ds.booked[static_cast<size_t>(it.window)] += grid_cost(it.duration);
            ds.overlay.push_back(std::move(it));
        }
    }
    return true;
}

void SolveContext::rollback(const CandidatePlan& plan) {
    std::set<std::pair<std::string, Date>> touched;
    for (const auto& s : plan.slots) touched.insert({s.machine, s.date});
    for (const auto& key : touched) {
        DayState& ds = day_state(key.first, key.second);
        auto& ov = ds.overlay;
        for (auto it = ov.begin(); it != ov.end();) {
            if (it->course_id == plan.course_id) {
                ds.booked[static_cast<size_t>(it->window)] -= grid_cost(it->duration);
                it = ov.erase(it);
            } else {
                ++it;
            }
        }
    }
}

bool SolveContext::exact_fits(const CandidatePlan& plan, Priority prio) {
    if (!commit(plan, prio)) return false;
    rollback(plan);
    return true;
}

void SolveContext::register_durations(const std::string& course_id, std::vector<int> durations) {
    plan_durations_[course_id] = std::move(durations);
}

void SolveContext::apply_to_schedule(Schedule& schedule,
                                     const std::vector<const CandidatePlan*>& plans) {
    for (const CandidatePlan* plan : plans) {
        const auto& durations = plan_durations_.at(plan->course_id);
        for (size_t i = 0; i < plan->slots.size(); ++i) {
            Appointment a;
            a.course_id = plan->course_id;
            a.fraction = static_cast<int>(i) + 1;
            a.machine = plan->slots[i].machine;
            a.date = plan->slots[i].date;
            a.window = plan->slots[i].window;
            a.start = -1;
            a.duration = durations[i];
            a.status = ApptStatus::tentative;
            schedule.add(std::move(a));
        }
        schedule.set_batch_day(plan->course_id, today_);
    }
}

// --- enumeration -------------------------------------------------------------

namespace {

struct MachineOrders {
    std::vector<std::string> all; // preferred then allowed, protocol order
    std::map<std::string, std::vector<std::string>> complete_of;
    std::map<std::string, std::vector<std::string>> partial_of;
};

MachineOrders machine_orders(const TreatmentProtocol& proto, const MachinePark& park) {
    MachineOrders mo;
    mo.all = proto.preferred_machines;
    mo.all.insert(mo.all.end(), proto.allowed_machines.begin(), proto.allowed_machines.end());
    for (const std::string& m : mo.all) {
        for (const std::string& other : mo.all) {
            if (other == m) continue;
            switch (park.beam_match(m, other)) {
            case BeamMatch::complete: mo.complete_of[m].push_back(other); break;
            case BeamMatch::partial: mo.partial_of[m].push_back(other); break;
            case BeamMatch::none: break;
            }
        }
    }
    return mo;
}

std::vector<int> window_order(const CalendarConfig& cc, int target) {
    std::vector<int> order(static_cast<size_t>(cc.n_windows()));
    for (int w = 0; w < cc.n_windows(); ++w) order[static_cast<size_t>(w)] = w;
    std::sort(order.begin(), order.end(), [target](int a, int b) {
        return std::tuple(std::abs(a - target), a) < std::tuple(std::abs(b - target), b);
    });
    return order;
}

} // namespace

std::vector<CandidatePlan> enumerate_plans(const PendingCourse& pc, const SolveContext& ctx,
                                           const ObjectiveWeights& weights, int max_plans) {
    const WorkingCalendar& cal = ctx.calendar();
    const CalendarConfig& cc = cal.config();
    const TreatmentProtocol& proto = *pc.protocol;
    const int n = pc.course.n_fractions;
    const int spacing = proto.min_pattern_spacing();
    const bool priority_a = proto.priority == Priority::A;
    const MachineOrders mo = machine_orders(proto, ctx.park());

    // One constant-window profile per window; the objective separates them
    // (off-window and switch terms), capacity fallback happens per fraction.
    std::vector<int> targets(static_cast<size_t>(cc.n_windows()));
    for (int w = 0; w < cc.n_windows(); ++w) targets[static_cast<size_t>(w)] = w;

    Date base = std::max(pc.earliest, ctx.today());
    if (!cal.in_span(base)) return {};
    if (!cal.is_working_day(base)) {
        try {
            base = cal.next_working_day(base);
        } catch (const RangeError&) {
            return {};
        }
    }

    // Static per-machine placement cost: machine tier plus site fit.
    std::map<std::string, std::int64_t> machine_cost;
    std::map<std::string, int> machine_rank;
    for (size_t mi = 0; mi < mo.all.size(); ++mi) {
        const std::string& m = mo.all[mi];
        std::int64_t c = proto.machine_preferred(m) ? 0 : weights.non_preferred_per_fraction;
        if (!pc.course.site_preference.empty() &&
            ctx.park().at(m).site_id != pc.course.site_preference)
            c += weights.off_site_per_fraction;
        machine_cost[m] = c;
        machine_rank[m] = static_cast<int>(mi);
    }
    const bool has_window_pref = pc.pref != WindowPreference::none;
    auto off_window_cost = [&](int w) -> std::int64_t {
        if (!has_window_pref) return 0;
        const bool am = cc.window_begin(w) < cc.noon_minute;
        return (pc.pref == WindowPreference::am) == am ? 0 : weights.off_window_per_fraction;
    };

    // One greedy build per (start day, primary machine, window target). Each
    // fraction takes the cheapest chain-compatible (machine, window) by
    // marginal cost, so courses drift back to their best machines as load
    // allows; ties keep the previous machine and window.
    auto build = [&](Date start, const std::string& m0,
                     int target) -> std::optional<std::vector<CandidatePlan::Slot>> {
        std::vector<CandidatePlan::Slot> slots;
        slots.reserve(static_cast<size_t>(n));
        std::vector<int> worder;
        std::string cur_m = m0;
        bool partial_used = false;
        Date prev_date = start;
        int prev_w = target;
        for (int i = 1; i <= n; ++i) {
            const int dur = pc.course.fraction_duration(i);
            std::optional<Date> d = i == 1 ? std::optional<Date>(start)
                                           : cal.try_add_working_days(prev_date, spacing);
            bool placed = false;
            while (d && *d <= ctx.horizon_end()) {
                if (i > 1 && proto.max_gap_between_fractions &&
                    cal.working_days_between(prev_date, *d) > *proto.max_gap_between_fractions)
                    break;
                struct Cand {
                    std::int64_t cost;
                    int continuity; // 0 = stay on cur_m
                    int rank;
                    const std::string* machine;
                    bool partial;
                };
                std::vector<Cand> cands;
                if (i == 1) {
                    cands.push_back({machine_cost[m0], 0, machine_rank[m0], &m0, false});
                } else {
                    for (const std::string& m : mo.all) {
                        bool partial = false;
                        if (m != cur_m) {
                            const BeamMatch match = ctx.park().beam_match(cur_m, m);
                            if (match == BeamMatch::none) continue;
                            partial = match == BeamMatch::partial;
                            if (partial &&
                                (partial_used || !proto.allow_partial_match_switch))
                                continue;
                        }
                        cands.push_back({machine_cost[m] +
                                             (partial ? weights.partial_switch : 0),
                                         m == cur_m ? 0 : 1, machine_rank[m], &m, partial});
                    }
                    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
                        return std::tie(a.cost, a.continuity, a.rank) <
                               std::tie(b.cost, b.continuity, b.rank);
                    });
                }
                worder.resize(static_cast<size_t>(cc.n_windows()));
                for (int w = 0; w < cc.n_windows(); ++w) worder[static_cast<size_t>(w)] = w;
                std::sort(worder.begin(), worder.end(), [&](int a, int b) {
                    return std::tuple(off_window_cost(a), a == prev_w ? 0 : 1,
                                      std::abs(a - target), a) <
                           std::tuple(off_window_cost(b), b == prev_w ? 0 : 1,
                                      std::abs(b - target), b);
                });
                for (const Cand& cand : cands) {
                    for (int w : worder) {
                        if (!ctx.quick_fits(*cand.machine, *d, w, dur, priority_a)) continue;
                        if (cand.partial) partial_used = true;
                        slots.push_back({*cand.machine, *d, w});
                        cur_m = *cand.machine;
                        prev_w = w;
                        prev_date = *d;
                        placed = true;
                        break;
                    }
                    if (placed) break;
                }
                if (placed) break;
                if (i == 1) break; // start-day slips are the outer loop's job
                d = cal.try_add_working_days(*d, 1);
            }
            if (!placed) return std::nullopt;
        }
        return slots;
    };

    std::set<std::vector<CandidatePlan::Slot>> seen;
    std::vector<CandidatePlan> plans;
    for (int s_idx = 0; s_idx <= pc.start_day_window; ++s_idx) {
        auto start = cal.try_add_working_days(base, s_idx);
        if (!start) break;
        auto span_end = cal.try_add_working_days(*start, (n - 1) * spacing);
        if (!span_end || *span_end > ctx.horizon_end()) break; // later starts only get worse
        for (const std::string& m0 : mo.all) {
            for (int target : targets) {
                auto slots = build(*start, m0, target);
                if (!slots) continue;
                std::vector<Date> dates;
                dates.reserve(slots->size());
                for (const auto& s : *slots) dates.push_back(s.date);
                if (!satisfies_weekly_minimum(dates, proto, cal)) continue;
                if (!seen.insert(*slots).second) continue;
                CandidatePlan plan;
                plan.course_id = pc.course.course_id;
                plan.slots = std::move(*slots);
                plan.cost = plan_cost_of(pc, plan.slots, ctx, weights, &plan);
                plans.push_back(std::move(plan));
            }
        }
    }
    std::sort(plans.begin(), plans.end());
    if (static_cast<int>(plans.size()) > max_plans) plans.resize(static_cast<size_t>(max_plans));
    return plans;
}

// --- batch selection ----------------------------------------------------------

namespace {

struct SelCourse {
    PendingCourse pc;
    std::vector<CandidatePlan> plans;
    std::vector<char> dead; // exact-commit failures
    int committed = -1;     // committed plan index
    bool blocked = false;   // waits on an in-batch or unscheduled predecessor
    bool dropped = false;   // placeholders only
    bool pinned = false;    // an in-batch successor depends on this plan's end
    bool reenumerated = false; // plans refreshed against the live overlay once

    std::tuple<int, Date, bool, std::string> sort_key() const {
        return {static_cast<int>(pc.protocol->priority), pc.earliest, pc.placeholder,
                pc.course.course_id};
    }
};

bool plan_quick_feasible(const SolveContext& ctx, const SelCourse& sc, const CandidatePlan& p) {
    const bool a = sc.pc.protocol->priority == Priority::A;
    for (size_t i = 0; i < p.slots.size(); ++i) {
        const auto& s = p.slots[i];
        const int dur = sc.pc.course.fraction_duration(static_cast<int>(i) + 1);
        if (!ctx.quick_fits(s.machine, s.date, s.window, dur, a)) return false;
    }
    return true;
}

// First two live, quick-feasible plan indices (-1 when absent).
std::pair<int, int> best_two(const SolveContext& ctx, const SelCourse& sc) {
    int first = -1, second = -1;
    for (int i = 0; i < static_cast<int>(sc.plans.size()); ++i) {
        if (sc.dead[static_cast<size_t>(i)]) continue;
        if (!plan_quick_feasible(ctx, sc, sc.plans[static_cast<size_t>(i)])) continue;
        if (first < 0) {
            first = i;
        } else {
            second = i;
            break;
        }
    }
    return {first, second};
}

struct ExactCover {
    bool feasible = false;
    std::int64_t cost = 0;
    std::vector<int> chosen;
    long nodes = 0;
    bool node_cap_hit = false;
};

// Depth-first search over one plan per course with an admissible
// cheapest-remaining bound. Plans are cost-sorted, so the first full
// assignment is already good and pruning bites early.
ExactCover exact_full_cover(SolveContext& ctx, std::vector<SelCourse>& courses, long node_cap) {
    ExactCover result;
    result.chosen.assign(courses.size(), -1);
    std::vector<int> order(courses.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::tuple(courses[static_cast<size_t>(a)].plans.size(),
                          courses[static_cast<size_t>(a)].pc.course.course_id) <
               std::tuple(courses[static_cast<size_t>(b)].plans.size(),
                          courses[static_cast<size_t>(b)].pc.course.course_id);
    });
    std::vector<std::int64_t> suffix_min(order.size() + 1, 0);
    for (int i = static_cast<int>(order.size()) - 1; i >= 0; --i) {
        const auto& plans = courses[static_cast<size_t>(order[static_cast<size_t>(i)])].plans;
        if (plans.empty()) return result; // some course has no plan at all
        suffix_min[static_cast<size_t>(i)] =
            suffix_min[static_cast<size_t>(i + 1)] + plans.front().cost;
    }

    std::vector<int> chosen(order.size(), -1);
    bool found = false;
    std::int64_t best_cost = 0;
    std::vector<int> best_choice;
    long nodes = 0;
    bool cap_hit = false;

    auto dfs = [&](auto&& self, size_t depth, std::int64_t cost) -> void {
        if (cap_hit) return;
        if (depth == order.size()) {
            if (!found || cost < best_cost) {
                found = true;
                best_cost = cost;
                best_choice = chosen;
            }
            return;
        }
        SelCourse& sc = courses[static_cast<size_t>(order[depth])];
        for (int pi = 0; pi < static_cast<int>(sc.plans.size()); ++pi) {
            const CandidatePlan& plan = sc.plans[static_cast<size_t>(pi)];
            if (found && cost + plan.cost + suffix_min[depth + 1] >= best_cost)
                break; // cost-sorted: nothing cheaper follows
            if (++nodes > node_cap) {
                cap_hit = true;
                return;
            }
            if (!ctx.commit(plan, sc.pc.protocol->priority)) continue;
            chosen[depth] = pi;
            self(self, depth + 1, cost + plan.cost);
            ctx.rollback(plan);
            chosen[depth] = -1;
            if (cap_hit) return;
        }
    };
    dfs(dfs, 0, 0);

    result.nodes = nodes;
    result.node_cap_hit = cap_hit;
    if (found) {
        result.feasible = true;
        result.cost = best_cost;
        for (size_t i = 0; i < order.size(); ++i)
            result.chosen[static_cast<size_t>(order[i])] = best_choice[i];
    }
    return result;
}

std::vector<SelCourse> prepare_courses(const std::vector<std::string>& pending_ids,
                                       const std::vector<PlaceholderPatient>& placeholders,
                                       const CourseTable& courses, const ProtocolTable& protocols,
                                       const Schedule& schedule, const MachinePark& park,
                                       const WorkingCalendar& cal, const SolverParams& params,
                                       const PreferenceModel& prefs, Date today,
                                       std::vector<TreatmentProtocol>& placeholder_proto_storage) {
    std::vector<SelCourse> out;
    std::set<std::string> pending_set(pending_ids.begin(), pending_ids.end());
    for (const std::string& id : pending_ids) {
        const TreatmentCourse& c = courses.at(id);
        if (schedule.has_course(id))
            throw IntegrityError("pending course " + id + " is already scheduled");
        SelCourse sc;
        sc.pc.course = c;
        sc.pc.protocol = &protocols.by_name(c.protocol_id);
        sc.pc.start_day_window = params.start_day_window;
        sc.pc.placeholder = false;
        sc.pc.pref = prefs.of(c.patient_id);
        sc.pc.earliest = today;
        if (c.follows_course) {
            if (pending_set.count(*c.follows_course)) {
                sc.blocked = true; // resolved once the predecessor commits
            } else {
                auto pred_last = schedule.last_fraction_date(*c.follows_course);
                if (pred_last)
                    sc.pc.earliest = earliest_start_after(c, *sc.pc.protocol, cal, pred_last);
                else
                    sc.blocked = true; // predecessor unscheduled: defer
            }
        } else {
            sc.pc.earliest = earliest_start(c, *sc.pc.protocol, cal);
        }
        out.push_back(std::move(sc));
    }
    // Placeholders spread round-robin over machines (one preferred machine
    // each, everything else allowed) and sit in afternoon windows, the same
    // shape as a manually reserved urgent slot. Piling them onto one
    // machine would starve that machine for real bookings.
    placeholder_proto_storage.clear();
    placeholder_proto_storage.reserve(placeholders.size());
    const TreatmentProtocol base_proto = placeholder_protocol(park);
    const auto& machines = park.machines();
    size_t ph_index = 0;
    for (const PlaceholderPatient& ph : placeholders) {
        const Machine& home = machines[ph_index++ % machines.size()];
        TreatmentProtocol proto = base_proto;
        proto.preferred_machines = {home.machine_id};
        proto.allowed_machines.clear();
        for (const Machine& m : machines)
            if (m.machine_id != home.machine_id)
                proto.allowed_machines.push_back(m.machine_id);
        placeholder_proto_storage.push_back(std::move(proto));

        SelCourse sc;
        sc.pc.course.patient_id = ph.id;
        sc.pc.course.course_id = ph.id;
        sc.pc.course.creation_date = ph.expected_arrival;
        sc.pc.course.protocol_id = base_proto.protocol_id;
        sc.pc.course.n_fractions = ph.fractions;
        sc.pc.course.duration_first = ph.duration;
        sc.pc.course.duration_rest = ph.duration;
        sc.pc.course.site_preference = home.site_id;
        sc.pc.protocol = &placeholder_proto_storage.back();
        sc.pc.earliest = ph.expected_arrival;
        sc.pc.start_day_window = 1; // must start within one working day of arrival
        sc.pc.placeholder = true;
        sc.pc.pref = WindowPreference::pm;
        out.push_back(std::move(sc));
    }
    std::sort(out.begin(), out.end(),
              [](const SelCourse& a, const SelCourse& b) { return a.sort_key() < b.sort_key(); });
    return out;
}

void enumerate_all(std::vector<SelCourse>& sel, const SolveContext& ctx,
                   const ObjectiveWeights& weights, const SolverParams& params) {
    int threads = params.threads;
    if (threads == 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 1 || sel.size() < 8) {
        for (SelCourse& sc : sel) {
            if (sc.blocked) continue;
            sc.plans = enumerate_plans(sc.pc, ctx, weights, params.plans_per_course);
            sc.dead.assign(sc.plans.size(), 0);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            while (true) {
                const size_t i = next.fetch_add(1);
                if (i >= sel.size()) return;
                if (sel[i].blocked) continue;
                sel[i].plans = enumerate_plans(sel[i].pc, ctx, weights, params.plans_per_course);
                sel[i].dead.assign(sel[i].plans.size(), 0);
            }
        });
    for (auto& th : pool) th.join();
}

} // namespace

BatchResult solve_batch(Schedule& schedule, const std::vector<std::string>& pending_ids,
                        const std::vector<PlaceholderPatient>& placeholders,
                        const CourseTable& courses, const ProtocolTable& protocols,
                        const MachinePark& park, const WorkingCalendar& cal,
                        const ObjectiveWeights& weights, const SolverParams& params,
                        const PreferenceModel& prefs, Date today, Date horizon_end) {
    const auto t0 = std::chrono::steady_clock::now();
    weights.validate();
    params.validate();
    verify_schedule_integrity(schedule, park, cal, std::min(today + 1, horizon_end), horizon_end);

    BatchResult result;
    result.placeholders_requested = static_cast<int>(placeholders.size());

    SolveContext ctx(cal, park, schedule, protocols, courses, today, horizon_end);
    std::vector<TreatmentProtocol> placeholder_protos;
    std::vector<SelCourse> sel = prepare_courses(pending_ids, placeholders, courses, protocols,
                                                 schedule, park, cal, params, prefs, today,
                                                 placeholder_protos);
    for (SelCourse& sc : sel) {
        std::vector<int> durations;
        durations.reserve(static_cast<size_t>(sc.pc.course.n_fractions));
        for (int i = 1; i <= sc.pc.course.n_fractions; ++i)
            durations.push_back(sc.pc.course.fraction_duration(i));
        ctx.register_durations(sc.pc.course.course_id, std::move(durations));
    }
    // A chained successor's earliest start is derived from its predecessor's
    // committed plan; that plan must not change afterwards.
    for (const SelCourse& sc : sel)
        if (sc.pc.course.follows_course)
            for (SelCourse& other : sel)
                if (other.pc.course.course_id == *sc.pc.course.follows_course)
                    other.pinned = true;
    enumerate_all(sel, ctx, weights, params);
    for (const SelCourse& sc : sel) result.plans_considered += static_cast<long>(sc.plans.size());

    // Re-enumeration is reserved for production batches; oracle-compared
    // instances (small, placeholder-free) keep the fixed plan space that the
    // exhaustive search explores.
    const bool allow_reenumeration = !placeholders.empty() || sel.size() > 8;

    auto commit_best = [&](SelCourse& sc) -> bool {
        if (sc.plans.empty()) return false;
        while (true) {
            auto [i1, i2] = best_two(ctx, sc);
            (void)i2;
            if (i1 < 0) return false;
            if (ctx.commit(sc.plans[static_cast<size_t>(i1)], sc.pc.protocol->priority)) {
                sc.committed = i1;
                return true;
            }
            sc.dead[static_cast<size_t>(i1)] = 1;
        }
    };

    // Depth-1 ejection: move one committed course aside to admit `f`.
    // Every eligible candidate is trialled; the cheapest total outcome wins.
    auto try_ejection = [&](SelCourse& f) -> bool {
        if (f.plans.empty()) return false;
        const Priority fp = f.pc.protocol->priority;
        struct Outcome {
            SelCourse* ejected = nullptr;
            int f_plan = -1;
            int e_plan = -1; // -1 = placeholder dropped
            std::int64_t delta = 0;
        };
        std::optional<Outcome> best;
        for (SelCourse& e : sel) {
            if (e.committed < 0 || &e == &f || e.pinned) continue;
            if (e.pc.placeholder && fp != Priority::A) continue; // reservations hold against B/C
            if (!e.pc.placeholder &&
                static_cast<int>(e.pc.protocol->priority) < static_cast<int>(fp))
                continue; // never displace more urgent real courses
            const CandidatePlan e_plan = e.plans[static_cast<size_t>(e.committed)];
            const int e_committed = e.committed;
            ctx.rollback(e_plan);
            e.committed = -1;
            if (commit_best(f)) {
                Outcome trial;
                trial.ejected = &e;
                trial.f_plan = f.committed;
                const std::int64_t f_cost = f.plans[static_cast<size_t>(f.committed)].cost;
                bool viable = false;
                if (e.pc.placeholder) {
                    trial.e_plan = -1;
                    trial.delta = f_cost;
                    viable = true;
                } else if (commit_best(e)) {
                    trial.e_plan = e.committed;
                    trial.delta = f_cost + e.plans[static_cast<size_t>(e.committed)].cost -
                                  e_plan.cost;
                    ctx.rollback(e.plans[static_cast<size_t>(e.committed)]);
                    viable = true;
                }
                if (viable && (!best || trial.delta < best->delta)) best = trial;
                ctx.rollback(f.plans[static_cast<size_t>(f.committed)]);
                f.committed = -1;
            }
            e.committed = e_committed;
            if (!ctx.commit(e_plan, e.pc.protocol->priority))
                throw IntegrityError("ejection restore failed");
        }
        if (!best) return false;
        SelCourse& e = *best->ejected;
        ctx.rollback(e.plans[static_cast<size_t>(e.committed)]);
        e.committed = -1;
        if (!ctx.commit(f.plans[static_cast<size_t>(best->f_plan)], fp))
            throw IntegrityError("ejection replay failed");
        f.committed = best->f_plan;
        if (best->e_plan < 0) {
            e.dropped = true; // capacity goes to the real urgent course
        } else {
            if (!ctx.commit(e.plans[static_cast<size_t>(best->e_plan)],
                            e.pc.protocol->priority))
                throw IntegrityError("ejection replay failed");
            e.committed = best->e_plan;
        }
        return true;
    };

    std::vector<SelCourse*> unplaced;
    auto run_tier = [&](Priority tier) {
        std::vector<SelCourse*> active;
        for (SelCourse& sc : sel)
            if (!sc.blocked && sc.committed < 0 && !sc.dropped &&
                sc.pc.protocol->priority == tier)
                active.push_back(&sc);
        std::sort(active.begin(), active.end(),
                  [](SelCourse* a, SelCourse* b) { return a->sort_key() < b->sort_key(); });
        while (!active.empty()) {
            SelCourse* pick = nullptr;
            std::int64_t pick_regret = -1;
            std::vector<SelCourse*> exhausted;
            for (SelCourse* sc : active) {
                auto [i1, i2] = best_two(ctx, *sc);
                if (i1 < 0) {
                    exhausted.push_back(sc);
                    continue;
                }
                const std::int64_t regret =
                    i2 < 0 ? std::numeric_limits<std::int64_t>::max()
                           : sc->plans[static_cast<size_t>(i2)].cost -
                                 sc->plans[static_cast<size_t>(i1)].cost;
                if (!pick || regret > pick_regret ||
                    (regret == pick_regret && sc->sort_key() < pick->sort_key())) {
                    pick = sc;
                    pick_regret = regret;
                }
            }
            for (SelCourse* sc : exhausted) {
                if (sc->pc.placeholder) {
                    sc->dropped = true;
                } else if (allow_reenumeration && !sc->reenumerated) {
                    // The static candidate list has drifted from the live
                    // overlay; rebuild it so hybrid plans around the new
                    // load become visible.
                    sc->reenumerated = true;
                    sc->plans = enumerate_plans(sc->pc, ctx, weights, params.plans_per_course);
                    sc->dead.assign(sc->plans.size(), 0);
                    result.plans_considered += static_cast<long>(sc->plans.size());
                    if (!sc->plans.empty()) continue; // stays active
                    unplaced.push_back(sc);
                } else if (!try_ejection(*sc)) {
                    unplaced.push_back(sc);
                }
                active.erase(std::remove(active.begin(), active.end(), sc), active.end());
            }
            if (!pick) break;
            if (commit_best(*pick)) {
                active.erase(std::remove(active.begin(), active.end(), pick), active.end());
                // A committed predecessor may unblock chained successors.
                for (SelCourse& sc : sel) {
                    if (!sc.blocked || !sc.pc.course.follows_course) continue;
                    if (*sc.pc.course.follows_course != pick->pc.course.course_id) continue;
                    const CandidatePlan& pplan =
                        pick->plans[static_cast<size_t>(pick->committed)];
                    sc.blocked = false;
                    sc.pc.earliest = earliest_start_after(sc.pc.course, *sc.pc.protocol, cal,
                                                          pplan.slots.back().date);
                    sc.plans = enumerate_plans(sc.pc, ctx, weights, params.plans_per_course);
                    sc.dead.assign(sc.plans.size(), 0);
                    result.plans_considered += static_cast<long>(sc.plans.size());
                    if (static_cast<int>(sc.pc.protocol->priority) <= static_cast<int>(tier)) {
                        active.push_back(&sc);
                        std::sort(active.begin(), active.end(), [](SelCourse* a, SelCourse* b) {
                            return a->sort_key() < b->sort_key();
                        });
                    }
                }
            }
        }
    };
    run_tier(Priority::A);
    run_tier(Priority::B);
    run_tier(Priority::C);

    // Exact full-cover fallback for small, chain-free, placeholder-free
    // batches the greedy could not cover: keeps the feasibility verdict in
    // line with exhaustive search.
    const bool chain_in_batch = std::any_of(sel.begin(), sel.end(), [&](const SelCourse& s) {
        return s.pc.course.follows_course.has_value();
    });
    if (!unplaced.empty() && placeholders.empty() && !chain_in_batch && sel.size() <= 8) {
        long total_plans = 0;
        for (const SelCourse& sc : sel) total_plans += static_cast<long>(sc.plans.size());
        if (total_plans <= 2000) {
            result.exact_fallback = true;
            for (SelCourse& sc : sel)
                if (sc.committed >= 0) {
                    ctx.rollback(sc.plans[static_cast<size_t>(sc.committed)]);
                    sc.committed = -1;
                }
            ExactCover cover = exact_full_cover(ctx, sel, 5'000'000);
            if (cover.feasible) {
                unplaced.clear();
                for (size_t i = 0; i < sel.size(); ++i) {
                    sel[i].committed = cover.chosen[i];
                    if (!ctx.commit(sel[i].plans[static_cast<size_t>(cover.chosen[i])],
                                    sel[i].pc.protocol->priority))
                        throw IntegrityError("exact cover replay failed");
                }
            } else {
                unplaced.clear();
                for (SelCourse& sc : sel) std::fill(sc.dead.begin(), sc.dead.end(), 0);
                run_tier(Priority::A);
                run_tier(Priority::B);
                run_tier(Priority::C);
            }
        }
    }

    auto total_cost = [&]() {
        std::int64_t c = 0;
        for (const SelCourse& sc : sel)
            if (sc.committed >= 0 && !sc.pc.placeholder)
                c += sc.plans[static_cast<size_t>(sc.committed)].cost;
        return c;
    };
    result.cost_before_local_search = total_cost();

    // Local search: plan replacement, then pairwise reinsertion on small
    // batches. Fixed pass counts keep runs deterministic.
    std::vector<SelCourse*> committed_real;
    for (SelCourse& sc : sel)
        if (sc.committed >= 0 && !sc.pc.placeholder && !sc.pinned)
            committed_real.push_back(&sc);
    std::sort(committed_real.begin(), committed_real.end(),
              [](SelCourse* a, SelCourse* b) { return a->sort_key() < b->sort_key(); });

    for (int pass = 0; pass < params.local_search_passes; ++pass) {
        bool improved = false;
        for (SelCourse* scp : committed_real) {
            SelCourse& sc = *scp;
            const CandidatePlan cur = sc.plans[static_cast<size_t>(sc.committed)];
            for (int pi = 0; pi < sc.committed; ++pi) {
                const CandidatePlan& cand = sc.plans[static_cast<size_t>(pi)];
                if (cand.cost >= cur.cost) break;
                ctx.rollback(cur);
                if (ctx.commit(cand, sc.pc.protocol->priority)) {
                    sc.committed = pi;
                    improved = true;
                    break;
                }
                if (!ctx.commit(cur, sc.pc.protocol->priority))
                    throw IntegrityError("local-search restore failed");
            }
        }
        // Pairwise reinsertion pays off on small contested batches (and keeps
        // the oracle comparison tight); larger batches rely on the move pass.
        if (committed_real.size() >= 2 && committed_real.size() <= 12) {
            for (size_t i = 0; i < committed_real.size(); ++i) {
                for (size_t j = i + 1; j < committed_real.size(); ++j) {
                    SelCourse& a = *committed_real[i];
                    SelCourse& b = *committed_real[j];
                    const int ai = a.committed, bi = b.committed;
                    const std::int64_t before = a.plans[static_cast<size_t>(ai)].cost +
                                                b.plans[static_cast<size_t>(bi)].cost;
                    ctx.rollback(a.plans[static_cast<size_t>(ai)]);
                    ctx.rollback(b.plans[static_cast<size_t>(bi)]);
                    auto cheapest = [&](SelCourse& sc) -> int {
                        for (int pi = 0; pi < static_cast<int>(sc.plans.size()); ++pi)
                            if (ctx.commit(sc.plans[static_cast<size_t>(pi)],
                                           sc.pc.protocol->priority))
                                return pi;
                        return -1;
                    };
                    const int a1 = cheapest(a);
                    const int b1 = a1 >= 0 ? cheapest(b) : -1;
                    std::int64_t cost1 = -1;
                    if (a1 >= 0 && b1 >= 0)
                        cost1 = a.plans[static_cast<size_t>(a1)].cost +
                                b.plans[static_cast<size_t>(b1)].cost;
                    if (b1 >= 0) ctx.rollback(b.plans[static_cast<size_t>(b1)]);
                    if (a1 >= 0) ctx.rollback(a.plans[static_cast<size_t>(a1)]);
                    const int b2 = cheapest(b);
                    const int a2 = b2 >= 0 ? cheapest(a) : -1;
                    std::int64_t cost2 = -1;
                    if (a2 >= 0 && b2 >= 0)
                        cost2 = a.plans[static_cast<size_t>(a2)].cost +
                                b.plans[static_cast<size_t>(b2)].cost;
                    if (a2 >= 0) ctx.rollback(a.plans[static_cast<size_t>(a2)]);
                    if (b2 >= 0) ctx.rollback(b.plans[static_cast<size_t>(b2)]);

                    bool ok;
                    if (cost1 >= 0 && cost1 < before && (cost2 < 0 || cost1 <= cost2)) {
                        ok = ctx.commit(a.plans[static_cast<size_t>(a1)],
                                        a.pc.protocol->priority) &&
                             ctx.commit(b.plans[static_cast<size_t>(b1)],
                                        b.pc.protocol->priority);
                        a.committed = a1;
                        b.committed = b1;
                        improved = true;
                    } else if (cost2 >= 0 && cost2 < before) {
                        ok = ctx.commit(b.plans[static_cast<size_t>(b2)],
                                        b.pc.protocol->priority) &&
                             ctx.commit(a.plans[static_cast<size_t>(a2)],
                                        a.pc.protocol->priority);
                        a.committed = a2;
                        b.committed = b2;
                        improved = true;
                    } else {
                        ok = ctx.commit(a.plans[static_cast<size_t>(ai)],
                                        a.pc.protocol->priority) &&
                             ctx.commit(b.plans[static_cast<size_t>(bi)],
                                        b.pc.protocol->priority);
                    }
                    if (!ok) throw IntegrityError("pairwise move restore failed");
                }
            }
        }
        if (!improved) break;
    }
    // Improvement sweep: courses stuck far above their unconstrained best
    // get one fresh enumeration against the final overlay.
    if (allow_reenumeration) {
        for (SelCourse* scp : committed_real) {
            SelCourse& sc = *scp;
            if (sc.plans.empty() || sc.committed < 0) continue;
            const CandidatePlan current = sc.plans[static_cast<size_t>(sc.committed)];
            if (current.cost - sc.plans.front().cost < 500) continue;
            ctx.rollback(current);
            std::vector<CandidatePlan> fresh =
                enumerate_plans(sc.pc, ctx, weights, params.plans_per_course);
            result.plans_considered += static_cast<long>(fresh.size());
            int adopted = -1;
            for (int pi = 0; pi < static_cast<int>(fresh.size()); ++pi) {
                if (fresh[static_cast<size_t>(pi)].cost >= current.cost) break;
                if (ctx.commit(fresh[static_cast<size_t>(pi)], sc.pc.protocol->priority)) {
                    adopted = pi;
                    break;
                }
            }
            if (adopted >= 0) {
                sc.plans = std::move(fresh);
                sc.dead.assign(sc.plans.size(), 0);
                sc.committed = adopted;
            } else {
                if (!ctx.commit(current, sc.pc.protocol->priority))
                    throw IntegrityError("improvement sweep restore failed");
            }
        }
    }
    result.cost_after_local_search = total_cost();

    // Apply real commitments; placeholders vanish with the context.
    std::vector<const CandidatePlan*> chosen;
    for (SelCourse& sc : sel) {
        if (sc.pc.placeholder) {
            if (sc.committed >= 0) ++result.placeholders_placed;
            continue;
        }
        if (sc.committed >= 0) {
            chosen.push_back(&sc.plans[static_cast<size_t>(sc.committed)]);
            result.scheduled.push_back(sc.pc.course.course_id);
        } else {
            result.deferred.push_back(sc.pc.course.course_id);
        }
    }
    ctx.apply_to_schedule(schedule, chosen);

    result.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.budget_exceeded = result.solve_seconds > params.budget_seconds;
    return result;
}

ExactSolveResult solve_exact(const Schedule& schedule, const std::vector<std::string>& pending_ids,
                             const CourseTable& courses, const ProtocolTable& protocols,
                             const MachinePark& park, const WorkingCalendar& cal,
                             const ObjectiveWeights& weights, const SolverParams& params,
                             const PreferenceModel& prefs, Date today, Date horizon_end,
                             long node_cap) {
    SolveContext ctx(cal, park, schedule, protocols, courses, today, horizon_end);
    std::vector<TreatmentProtocol> placeholder_protos;
    std::vector<SelCourse> sel = prepare_courses(pending_ids, {}, courses, protocols, schedule,
                                                 park, cal, params, prefs, today,
                                                 placeholder_protos);
    for (SelCourse& sc : sel) {
        std::vector<int> durations;
        for (int i = 1; i <= sc.pc.course.n_fractions; ++i)
            durations.push_back(sc.pc.course.fraction_duration(i));
        ctx.register_durations(sc.pc.course.course_id, std::move(durations));
    }
    enumerate_all(sel, ctx, weights, params);

    ExactSolveResult result;
    for (const SelCourse& sc : sel)
        result.plans_enumerated += static_cast<long>(sc.plans.size());
    ExactCover cover = exact_full_cover(ctx, sel, node_cap);
    result.nodes = cover.nodes;
    result.node_cap_hit = cover.node_cap_hit;
    result.feasible = cover.feasible;
    if (cover.feasible) {
        result.cost = cover.cost;
        for (size_t i = 0; i < sel.size(); ++i)
            result.plans[sel[i].pc.course.course_id] =
                sel[i].plans[static_cast<size_t>(cover.chosen[i])];
    }
    return result;
}

BatchResult schedule_fcfs(Schedule& schedule, const std::vector<std::string>& pending_ids,
                          const CourseTable& courses, const ProtocolTable& protocols,
                          const MachinePark& park, const WorkingCalendar& cal,
                          const ObjectiveWeights& weights, const SolverParams& params,
                          const PreferenceModel& prefs, Date today, Date horizon_end,
                          int reserve_minutes) {
    const auto t0 = std::chrono::steady_clock::now();
    verify_schedule_integrity(schedule, park, cal, std::min(today + 1, horizon_end), horizon_end);
    BatchResult result;
    SolveContext ctx(cal, park, schedule, protocols, courses, today, horizon_end);
    ctx.set_static_reserve(reserve_minutes);

    std::vector<CandidatePlan> storage;
    storage.reserve(pending_ids.size());
    std::map<std::string, Date> committed_last; // last fraction per course booked this batch
    for (const std::string& id : pending_ids) {
        const TreatmentCourse& c = courses.at(id);
        if (schedule.has_course(id))
            throw IntegrityError("pending course " + id + " is already scheduled");
        PendingCourse pc;
        pc.course = c;
        pc.protocol = &protocols.by_name(c.protocol_id);
        pc.start_day_window = params.start_day_window;
        pc.pref = prefs.of(c.patient_id);
        std::optional<Date> pred_last;
        if (c.follows_course) {
            if (auto it = committed_last.find(*c.follows_course); it != committed_last.end())
                pred_last = it->second;
            else
                pred_last = schedule.last_fraction_date(*c.follows_course);
            if (!pred_last) {
                result.deferred.push_back(id); // predecessor not booked yet
                continue;
            }
        }
        pc.earliest = earliest_start_after(c, *pc.protocol, cal, pred_last);
        std::vector<int> durations;
        for (int i = 1; i <= c.n_fractions; ++i) durations.push_back(c.fraction_duration(i));
        ctx.register_durations(id, std::move(durations));

        std::vector<CandidatePlan> plans =
            enumerate_plans(pc, ctx, weights, params.plans_per_course);
        result.plans_considered += static_cast<long>(plans.size());
        // FCFS: earliest feasible start wins; cost only breaks ties.
        std::sort(plans.begin(), plans.end(), [](const CandidatePlan& a, const CandidatePlan& b) {
            return std::tuple(a.slots.front().date, a.cost, a.slots) <
                   std::tuple(b.slots.front().date, b.cost, b.slots);
        });
        bool placed = false;
        for (CandidatePlan& plan : plans) {
            if (!ctx.commit(plan, pc.protocol->priority)) continue;
            committed_last[id] = plan.slots.back().date;
            storage.push_back(std::move(plan));
            result.scheduled.push_back(id);
            result.cost_after_local_search += storage.back().cost;
            placed = true;
            break;
        }
        if (!placed) result.deferred.push_back(id);
    }
    result.cost_before_local_search = result.cost_after_local_search;
    std::vector<const CandidatePlan*> chosen;
    chosen.reserve(storage.size());
    for (const CandidatePlan& p : storage) chosen.push_back(&p);
    ctx.apply_to_schedule(schedule, chosen);
    result.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.budget_exceeded = result.solve_seconds > params.budget_seconds;
    return result;
}

// --- start times, notification, integrity -------------------------------------

void assign_start_times(Schedule& schedule, const MachinePark& park, const WorkingCalendar& cal,
                        const CourseTable& courses, const ProtocolTable& protocols,
                        const std::string& machine, Date date, const StaticReserve& reserve) {
    const CalendarConfig& cc = cal.config();
    std::vector<Interval> busy = park.blocks(machine, date);
    std::vector<PackItem> items;
    for (const Appointment* a : schedule.day_appointments(machine, date)) {
        if (a->start >= 0) {
            busy.push_back(a->interval());
            continue;
        }
        PackItem item;
        item.window = a->window;
        item.duration = a->duration;
        item.priority = is_placeholder_id(a->course_id)
                            ? Priority::A
                            : protocols.by_name(courses.at(a->course_id).protocol_id).priority;
        item.course_id = a->course_id;
        item.fraction = a->fraction;
        items.push_back(std::move(item));
    }
    if (items.empty()) return;
    std::vector<Interval> non_a;
    if (reserve.active() && date > reserve.release_after)
        non_a.push_back({cc.close_minute - reserve.minutes, cc.close_minute});
    if (!pack_day(cc, busy, items, non_a))
        throw IntegrityError("window over-capacity on " + machine + " " + date.iso());
    for (const PackItem& item : items)
        schedule.set_start(item.course_id, item.fraction, item.window, item.assigned_start);
}

void assign_start_times_all(Schedule& schedule, const MachinePark& park,
                            const WorkingCalendar& cal, const CourseTable& courses,
                            const ProtocolTable& protocols, const StaticReserve& reserve) {
    for (const auto& [machine, date] : schedule.machine_days())
        assign_start_times(schedule, park, cal, courses, protocols, machine, date, reserve);
}

void freeze_notifications(Schedule& schedule, const CourseTable& courses,
                          const ProtocolTable& protocols, const WorkingCalendar& cal,
                          Date today) {
    for (const std::string& id : schedule.course_ids()) {
        if (is_placeholder_id(id)) continue;
        if (schedule.is_communicated(id)) continue;
        const auto batch = schedule.batch_day(id);
        if (!batch) continue;
        const TreatmentCourse* course = courses.find(id);
        if (!course) continue;
        const Priority prio = protocols.by_name(course->protocol_id).priority;
        bool freeze = false;
        if (prio == Priority::A) {
            freeze = *batch <= today;
        } else {
            if (today - *batch >= 7) freeze = true; // one-week notification period
            const auto first = schedule.first_fraction_date(id);
            // Patients must know their schedule before treatment begins.
            if (!freeze && first && cal.in_span(today + 1) &&
                cal.next_working_day(today + 1) >= *first)
                freeze = true;
        }
        if (freeze) schedule.freeze_course(id);
    }
}

void verify_schedule_integrity(const Schedule& schedule, const MachinePark& park,
                               const WorkingCalendar& cal, Date from, Date to) {
    const CalendarConfig& cc = cal.config();
    for (const auto& [machine, date] : schedule.machine_days()) {
        if (date < from || date > to) continue;
        const auto appts = schedule.day_appointments(machine, date);
        const auto blocks = park.blocks(machine, date);
        const Appointment* prev = nullptr;
        for (const Appointment* a : appts) {
            if (a->start < 0)
                throw IntegrityError("appointment " + a->course_id + "#" +
                                     std::to_string(a->fraction) + " lacks a start time");
            if (a->start < cc.open_minute || a->start + a->duration > cc.close_minute)
                throw IntegrityError("appointment outside operating window on " + machine + " " +
                                     date.iso());
            if (cc.window_of(a->start) != a->window)
                throw IntegrityError("appointment start outside its window on " + machine + " " +
                                     date.iso());
            if (a->start % cc.time_grid != 0)
                throw IntegrityError("appointment start off the time grid on " + machine + " " +
                                     date.iso());
            if (prev && prev->start + prev->duration > a->start)
                throw IntegrityError("double booking on " + machine + " " + date.iso());
            for (const Interval& b : blocks)
                if (b.overlaps(a->interval()))
                    throw IntegrityError("appointment overlaps blocked time on " + machine + " " +
                                         date.iso());
            prev = a;
        }
    }
}

} // namespace rtsched
