#include "rtsched/oracle.hpp"

#include "rtsched/errors.hpp"

#include <random>

namespace rtsched {

void OracleInstance::check_size_caps() const {
    if (park.machines().size() > 4) throw SizeError("oracle instance: more than 4 machines");
    if (courses.all().size() > 6) throw SizeError("oracle instance: more than 6 courses");
    const int days = calendar->working_days_inclusive(today, horizon_end);
    if (days > 12) throw SizeError("oracle instance: horizon longer than 12 working days");
    for (const TreatmentCourse& c : courses.all())
        if (c.n_fractions > 6) throw SizeError("oracle instance: course above 6 fractions");
}

OracleInstance make_oracle_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    OracleInstance inst;
    // Two sites, two linac types; subsets keep beam-match structure varied.
    const std::vector<Machine> pool = {{"M1", "S1", "T1"},
                                       {"M2", "S2", "T1"},
                                       {"M3", "S1", "T2"},
                                       {"M4", "S2", "T2"}};
    const int n_machines = pick(2, 4);
    for (int i = 0; i < n_machines; ++i) inst.park.add_machine(pool[static_cast<size_t>(i)]);

    CalendarConfig cc;
    cc.span_begin = Date::from_ymd(2020, 6, 1); // a Monday
    cc.span_end = Date::from_ymd(2020, 7, 31);
    cc.open_minute = 8 * 60;
    cc.close_minute = 12 * 60; // short day: two windows keep the space small
    cc.window_length = 120;
    cc.time_grid = 5;
    cc.noon_minute = 10 * 60;
    inst.calendar_config = cc;
    inst.calendar = std::make_shared<WorkingCalendar>(cc);

    inst.today = Date::from_ymd(2020, 6, 1);
    const int horizon_days = pick(5, 12);
    inst.horizon_end = inst.calendar->add_working_days(inst.today, horizon_days - 1);

    const int n_protocols = pick(2, 3);
    for (int p = 0; p < n_protocols; ++p) {
        TreatmentProtocol proto;
        proto.protocol_id = "OP" + std::to_string(p + 1);
        proto.priority = static_cast<Priority>(pick(0, 2));
        proto.min_fractions_per_week = 1;
        proto.pre_treatment_days = pick(0, 2);
        // Random split of the fleet into preferred/allowed, one preferred
        // machine guaranteed.
        for (int m = 0; m < n_machines; ++m) {
            const std::string id = pool[static_cast<size_t>(m)].machine_id;
            const int r = pick(0, 2);
            if (m == 0 || r == 0)
                proto.preferred_machines.push_back(id);
            else if (r == 1)
                proto.allowed_machines.push_back(id);
        }
        proto.first_fraction_duration = pick(4, 10) * 5;
        proto.subsequent_fraction_duration = pick(3, 8) * 5;
        inst.protocols.add(std::move(proto));
    }

    const int n_courses = pick(2, 6);
    for (int c = 0; c < n_courses; ++c) {
        TreatmentCourse course;
        course.patient_id = "p" + std::to_string(c + 1);
        course.course_id = "c" + std::to_string(c + 1);
        course.creation_date = inst.today;
        course.protocol_id = "OP" + std::to_string(pick(1, n_protocols));
        course.n_fractions = pick(1, 4);
        const TreatmentProtocol& proto = inst.protocols.by_name(course.protocol_id);
        course.duration_first = proto.first_fraction_duration;
        course.duration_rest = proto.subsequent_fraction_duration;
        course.site_preference = pick(0, 1) == 0 ? "S1" : "S2";
        inst.courses.add(std::move(course));
    }

    // Occasional pre-existing block tightens capacity.
    if (pick(0, 2) == 0) {
        const int m = pick(0, n_machines - 1);
        const Date d = inst.calendar->add_working_days(inst.today, pick(0, 2));
        inst.park.add_block(pool[static_cast<size_t>(m)].machine_id, d,
                            {cc.open_minute, cc.close_minute}, BlockKind::planned);
    }

    inst.params.plans_per_course = 512; // exhaustive for this plan space
    inst.params.start_day_window = 12;
    inst.params.threads = 1;
    inst.preferences.with_preference_share = 0.0; // window preferences off
    return inst;
}

OracleVerdict brute_force_oracle(const OracleInstance& instance) {
    instance.check_size_caps();
    Schedule empty;
    std::vector<std::string> ids;
    for (const TreatmentCourse& c : instance.courses.all()) ids.push_back(c.course_id);
    ExactSolveResult res = solve_exact(empty, ids, instance.courses, instance.protocols,
                                       instance.park, *instance.calendar, instance.weights,
                                       instance.params, instance.preferences, instance.today,
                                       instance.horizon_end, 20'000'000);
    if (res.node_cap_hit) throw SizeError("oracle search exceeded the node cap");
    OracleVerdict v;
    v.feasible = res.feasible;
    v.cost = res.feasible ? res.cost : 0;
    v.nodes = res.nodes;
    return v;
}

HeuristicVerdict heuristic_on_instance(const OracleInstance& instance) {
    instance.check_size_caps();
    Schedule schedule;
    std::vector<std::string> ids;
    for (const TreatmentCourse& c : instance.courses.all()) ids.push_back(c.course_id);
    BatchResult res = solve_batch(schedule, ids, {}, instance.courses, instance.protocols,
                                  instance.park, *instance.calendar, instance.weights,
                                  instance.params, instance.preferences, instance.today,
                                  instance.horizon_end);
    HeuristicVerdict v;
    v.feasible = res.deferred.empty();
    v.cost = res.cost_after_local_search;
    v.deferred = static_cast<int>(res.deferred.size());
    return v;
}

OracleComparison compare_on_instance(std::uint64_t seed) {
    const OracleInstance inst = make_oracle_instance(seed);
    OracleComparison cmp;
    cmp.seed = seed;
    const OracleVerdict o = brute_force_oracle(inst);
    const HeuristicVerdict h = heuristic_on_instance(inst);
    cmp.oracle_feasible = o.feasible;
    cmp.heuristic_feasible = h.feasible;
    cmp.oracle_cost = o.cost;
    cmp.heuristic_cost = h.cost;
    cmp.ratio = (o.feasible && o.cost > 0)
                    ? static_cast<double>(h.cost) / static_cast<double>(o.cost)
                    : 1.0;
    return cmp;
}

} // namespace rtsched
