#include "rtsched/sim.hpp"

#include "rtsched/csv.hpp"
#include "rtsched/errors.hpp"
#include "rtsched/scheduler.hpp"
#include "rtsched/validate.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rtsched {

using nlohmann::json;

SimInputs load_sim_inputs(const RunConfig& config) {
    SimInputs in;
    in.config = config;
    if (config.files.park.empty() || config.files.protocols.empty() ||
        config.files.arrivals.empty())
        throw ConfigError("park, protocols and arrivals files are required");
    load_park_file(config.files.park, in.park, in.calendar_config);
    in.calendar = std::make_shared<WorkingCalendar>(in.calendar_config);
    in.protocols = load_protocol_file(config.files.protocols);

    std::set<std::string> exclusions;
    if (!config.files.exclusions.empty())
        exclusions = load_exclusions(config.files.exclusions);
    const auto records = parse_arrivals(config.files.arrivals, in.protocols);
    in.courses = build_course_table(records, exclusions);

    if (!config.files.calendar.empty()) {
        auto parsed = parse_calendar(config.files.calendar, in.calendar_config, in.park,
                                     /*apply_failures_to_park=*/false);
        in.failures = std::move(parsed.failures);
        in.warnings = std::move(parsed.warnings);
    }
    if (!config.files.input_schedule.empty()) {
        in.input_schedule = parse_schedule_csv(read_text_file(config.files.input_schedule),
                                               config.files.input_schedule, in.courses);
        // Pre-existing bookings are already communicated and never re-planned.
        for (const std::string& id : in.input_schedule.course_ids()) {
            in.input_schedule.set_batch_day(id, in.courses.at(id).creation_date);
            in.input_schedule.freeze_course(id);
        }
    }
    return in;
}

SimOutput run_simulation(const SimInputs& inputs, bool baseline, const SimState* resume_from,
                         std::vector<json>* snapshots) {
    const RunConfig& cfg = inputs.config;
    const WorkingCalendar& cal = *inputs.calendar;
    const Date sim_start = cal.next_working_day(cfg.sim.start);
    const Date sim_end = cfg.sim.end;
    if (sim_end < sim_start) throw ConfigError("simulation range contains no working day");

    SimOutput out;
    out.park = inputs.park;

    SimState state;
    if (resume_from) {
        state = *resume_from;
        // Failures strictly before the resume day are already part of the
        // restored schedule; their blocks must be visible again.
        for (const FailureEvent& e : inputs.failures)
            if (e.date < state.next_day)
                out.park.add_block(e.machine, e.date, e.interval, BlockKind::failure);
    } else {
        state.next_day = sim_start;
        state.schedule = inputs.input_schedule;
        // The input schedule must be internally consistent before day 1.
        const ValidationReport v =
            validate_all(state.schedule, inputs.courses, inputs.protocols, out.park, cal);
        if (v.n_errors > 0)
            throw IntegrityError("input schedule fails validation with " +
                                 std::to_string(v.n_errors) + " errors");
    }

    const Date history_begin = sim_start;
    int day_index = 0;
    Date today = state.next_day;
    if (today <= sim_end && !cal.is_working_day(today)) {
        auto first = cal.try_add_working_days(cal.next_working_day(today), 0);
        today = first ? *first : sim_end + 1;
    }
    if (resume_from && today <= sim_end)
        day_index = cal.working_days_between(sim_start, today);

    while (today <= sim_end) {
        // Morning: consume the day's failures and repair what they hit.
        int displaced = 0;
        for (const FailureEvent& e : inputs.failures) {
            if (e.date != today) continue;
            auto log = apply_failure(state.schedule, e, out.park, inputs.protocols,
                                     inputs.courses, cal);
            displaced += static_cast<int>(log.size());
            state.displacement_log.insert(state.displacement_log.end(), log.begin(), log.end());
        }

        // Pending: yesterday's deferrals first, then today's arrivals.
        std::vector<std::string> pending = state.deferred;
        int arrivals = 0;
        for (const TreatmentCourse* c : inputs.courses.arrivals_on(today)) {
            if (c->creation_date >= sim_start) {
                pending.push_back(c->course_id);
                ++arrivals;
            }
        }
        state.deferred.clear();

        Date horizon_end = today + cfg.sim.horizon_days;
        if (horizon_end > cal.config().span_end) horizon_end = cal.config().span_end;

        DayTrace trace;
        trace.date = today;
        trace.arrivals = arrivals;
        trace.batch_size = static_cast<int>(pending.size());
        trace.displaced = displaced;

        BatchResult batch;
        std::vector<std::pair<std::string, Date>> touched;
        if (baseline) {
            batch = schedule_fcfs(state.schedule, pending, inputs.courses, inputs.protocols,
                                  out.park, cal, cfg.weights, cfg.solver, cfg.preferences, today,
                                  horizon_end, cfg.sim.baseline_reserve_minutes);
        } else {
            const auto placeholders = reserve_placeholders(inputs.courses, inputs.protocols,
                                                           history_begin, today, cal, cfg.solver);
            trace.placeholders = static_cast<int>(placeholders.size());
            batch = solve_batch(state.schedule, pending, placeholders, inputs.courses,
                                inputs.protocols, out.park, cal, cfg.weights, cfg.solver,
                                cfg.preferences, today, horizon_end);
        }
        for (const std::string& id : batch.scheduled)
            for (const Appointment* a : state.schedule.course_appointments(id))
                touched.push_back({a->machine, a->date});
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        const StaticReserve reserve{baseline ? cfg.sim.baseline_reserve_minutes : 0, today + 1};
        for (const auto& [machine, date] : touched)
            assign_start_times(state.schedule, out.park, cal, inputs.courses, inputs.protocols,
                               machine, date, reserve);

        freeze_notifications(state.schedule, inputs.courses, inputs.protocols, cal, today);

        state.deferred = batch.deferred;
        trace.scheduled = static_cast<int>(batch.scheduled.size());
        trace.deferred = static_cast<int>(batch.deferred.size());
        trace.plans_considered = batch.plans_considered;
        trace.solve_seconds = batch.solve_seconds;
        trace.budget_exceeded = batch.budget_exceeded;
        state.trace.push_back(trace);

        state.batch_traces.push_back(
            json{{"date", today.iso()},
                 {"batch_size", trace.batch_size},
                 {"scheduled", trace.scheduled},
                 {"deferred", trace.deferred},
                 {"placeholders_requested", batch.placeholders_requested},
                 {"placeholders_placed", batch.placeholders_placed},
                 {"plans_considered", batch.plans_considered},
                 {"cost_before_local_search", batch.cost_before_local_search},
                 {"cost_after_local_search", batch.cost_after_local_search},
                 {"exact_fallback", batch.exact_fallback},
                 {"solve_seconds", batch.solve_seconds},
                 {"budget_exceeded", batch.budget_exceeded}});

        auto next = cal.try_add_working_days(today, 1);
        state.next_day = next ? *next : sim_end + 1;
        if (snapshots && cfg.sim.snapshot_every > 0 &&
            (day_index + 1) % cfg.sim.snapshot_every == 0)
            snapshots->push_back(sim_state_to_json(state));
        ++day_index;
        if (!next) break;
        today = *next;
    }

    out.schedule = std::move(state.schedule);
    out.displacement_log = std::move(state.displacement_log);
    out.trace = std::move(state.trace);
    out.batch_traces = std::move(state.batch_traces);
    out.final_deferred = std::move(state.deferred);
    out.report = aggregate_report(inputs.courses, inputs.protocols, out.schedule, out.park, cal,
                                  cfg.preferences, cfg.sim.trim, cfg.sim.comparison_start,
                                  cfg.sim.comparison_start, sim_end);
    return out;
}

// --- serialization ------------------------------------------------------------

json sim_state_to_json(const SimState& state) {
    json appts = json::array();
    // Appointments plus per-course batch/communication flags.
    std::map<std::string, json> course_meta;
    Schedule& sched = const_cast<Schedule&>(state.schedule);
    for (const std::string& id : sched.course_ids()) {
        for (const Appointment* a : sched.course_appointments(id))
            appts.push_back({{"course", a->course_id},
                             {"fraction", a->fraction},
                             {"machine", a->machine},
                             {"date", a->date.iso()},
                             {"window", a->window},
                             {"start", a->start},
                             {"duration", a->duration},
                             {"status", to_string(a->status)}});
        json meta;
        if (auto b = sched.batch_day(id)) meta["batch_day"] = b->iso();
        meta["communicated"] = sched.is_communicated(id);
        course_meta[id] = std::move(meta);
    }
    json meta = json::object();
    for (auto& [k, v] : course_meta) meta[k] = std::move(v);

    json displacements = json::array();
    for (const Displacement& d : state.displacement_log)
        displacements.push_back({{"course", d.course_id},
                                 {"fraction", d.fraction},
                                 {"from_machine", d.from_machine},
                                 {"from_date", d.from_date.iso()},
                                 {"from_start", d.from_start},
                                 {"to_machine", d.to_machine},
                                 {"to_date", d.to_date.iso()},
                                 {"to_start", d.to_start},
                                 {"rule", to_string(d.rule)}});
    json trace = json::array();
    for (const DayTrace& t : state.trace)
        trace.push_back({{"date", t.date.iso()},
                         {"arrivals", t.arrivals},
                         {"batch_size", t.batch_size},
                         {"scheduled", t.scheduled},
                         {"deferred", t.deferred},
                         {"placeholders", t.placeholders},
                         {"displaced", t.displaced},
                         {"plans_considered", t.plans_considered},
                         {"solve_seconds", t.solve_seconds},
                         {"budget_exceeded", t.budget_exceeded}});
    return json{{"next_day", state.next_day.iso()},
                {"deferred", state.deferred},
                {"appointments", appts},
                {"course_meta", meta},
                {"displacement_log", displacements},
                {"trace", trace},
                {"batch_traces", state.batch_traces}};
}

SimState sim_state_from_json(const json& j) {
    SimState state;
    state.next_day = Date::parse(j.at("next_day").get<std::string>());
    state.deferred = j.at("deferred").get<std::vector<std::string>>();
    for (const json& a : j.at("appointments")) {
        Appointment appt;
        appt.course_id = a.at("course").get<std::string>();
        appt.fraction = a.at("fraction").get<int>();
        appt.machine = a.at("machine").get<std::string>();
        appt.date = Date::parse(a.at("date").get<std::string>());
        appt.window = a.at("window").get<int>();
        appt.start = a.at("start").get<int>();
        appt.duration = a.at("duration").get<int>();
        appt.status = appt_status_from_string(a.at("status").get<std::string>());
        state.schedule.add(std::move(appt));
    }
    for (const auto& [id, meta] : j.at("course_meta").items()) {
        if (meta.contains("batch_day"))
            state.schedule.set_batch_day(id, Date::parse(meta.at("batch_day").get<std::string>()));
        if (meta.value("communicated", false)) state.schedule.freeze_course(id);
    }
    for (const json& d : j.at("displacement_log")) {
        Displacement dd;
        dd.course_id = d.at("course").get<std::string>();
        dd.fraction = d.at("fraction").get<int>();
        dd.from_machine = d.at("from_machine").get<std::string>();
        dd.from_date = Date::parse(d.at("from_date").get<std::string>());
        dd.from_start = d.at("from_start").get<int>();
        dd.to_machine = d.at("to_machine").get<std::string>();
        dd.to_date = Date::parse(d.at("to_date").get<std::string>());
        dd.to_start = d.at("to_start").get<int>();
        const std::string rule = d.at("rule").get<std::string>();
        if (rule == "complete_same_day") dd.rule = RepairRule::complete_same_day;
        else if (rule == "partial_same_day") dd.rule = RepairRule::partial_same_day;
        else if (rule == "postpone_append") dd.rule = RepairRule::postpone_append;
        else if (rule == "postpone_double") dd.rule = RepairRule::postpone_double;
        else dd.rule = RepairRule::unrepaired;
        state.displacement_log.push_back(std::move(dd));
    }
    for (const json& t : j.at("trace")) {
        DayTrace tt;
        tt.date = Date::parse(t.at("date").get<std::string>());
        tt.arrivals = t.at("arrivals").get<int>();
        tt.batch_size = t.at("batch_size").get<int>();
        tt.scheduled = t.at("scheduled").get<int>();
        tt.deferred = t.at("deferred").get<int>();
        tt.placeholders = t.at("placeholders").get<int>();
        tt.displaced = t.at("displaced").get<int>();
        tt.plans_considered = t.at("plans_considered").get<long>();
        tt.solve_seconds = t.at("solve_seconds").get<double>();
        tt.budget_exceeded = t.at("budget_exceeded").get<bool>();
        state.trace.push_back(tt);
    }
    state.batch_traces = j.at("batch_traces").get<std::vector<json>>();
    return state;
}

std::string schedule_csv(const Schedule& schedule) {
    std::ostringstream out;
    out << "# course,fraction,machine,date,window,start,status\n";
    for (const std::string& id : schedule.course_ids())
        for (const Appointment* a : schedule.course_appointments(id))
            out << join_csv({a->course_id, std::to_string(a->fraction), a->machine,
                             a->date.iso(), std::to_string(a->window),
                             a->start >= 0 ? format_clock(a->start) : "-",
                             to_string(a->status)})
                << '\n';
    return out.str();
}

Schedule parse_schedule_csv(const std::string& content, const std::string& origin,
                            const CourseTable& courses) {
    Schedule schedule;
    for (const CsvRow& row : parse_csv(content)) {
        if (row.fields.size() != 7)
            throw ParseError(origin + " line " + std::to_string(row.line) +
                             ": expected course,fraction,machine,date,window,start,status");
        Appointment a;
        a.course_id = row.fields[0];
        const TreatmentCourse& course = courses.at(a.course_id);
        a.fraction = std::stoi(row.fields[1]);
        a.machine = row.fields[2];
        a.date = Date::parse(row.fields[3]);
        a.window = std::stoi(row.fields[4]);
        a.start = row.fields[5] == "-" ? -1 : parse_clock(row.fields[5]);
        a.duration = course.fraction_duration(a.fraction);
        a.status = appt_status_from_string(row.fields[6]);
        schedule.add(std::move(a));
    }
    return schedule;
}

std::string day_trace_csv(const std::vector<DayTrace>& trace) {
    std::ostringstream out;
    out << "# date,arrivals,batch_size,scheduled,deferred,placeholders,displaced,"
           "plans_considered,solve_seconds,budget_exceeded\n";
    for (const DayTrace& t : trace) {
        std::ostringstream secs;
        secs.precision(4);
        secs << std::fixed << t.solve_seconds;
        out << join_csv({t.date.iso(), std::to_string(t.arrivals),
                         std::to_string(t.batch_size), std::to_string(t.scheduled),
                         std::to_string(t.deferred), std::to_string(t.placeholders),
                         std::to_string(t.displaced), std::to_string(t.plans_considered),
                         secs.str(), t.budget_exceeded ? "1" : "0"})
            << '\n';
    }
    return out.str();
}

} // namespace rtsched
