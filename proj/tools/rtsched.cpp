// rtsched - radiotherapy patient scheduling engine and replay simulator.
//
// Subcommands: gen, simulate [--baseline], validate [--sample N], metrics,
// oracle. Exit codes: 0 success, 1 validation errors found, 2 input/config
// errors, 3 internal invariant violation.

#include "rtsched/config.hpp"
#include "rtsched/csv.hpp"
#include "rtsched/errors.hpp"
#include "rtsched/ingest.hpp"
#include "rtsched/metrics.hpp"
#include "rtsched/oracle.hpp"
#include "rtsched/scheduler.hpp"
#include "rtsched/sim.hpp"
#include "rtsched/synthetic.hpp"
#include "rtsched/validate.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace rtsched;
using nlohmann::json;

namespace {

std::string artifact_header(const std::string& subcommand, const json& config) {
    return "# rtsched " + subcommand + "\n# config: " + config.dump() + "\n";
}

void write_artifact(const fs::path& path, const std::string& header, const std::string& body) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << header << body;
}

void write_json_artifact(const fs::path& path, json j, const json& config) {
    j["config"] = config;
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

// --- gen ---------------------------------------------------------------------

int cmd_gen(const std::string& gen_config_path, const std::string& park_path,
            const std::string& protocols_path, const std::string& out_dir,
            const std::string& from, const std::string& to, std::int64_t seed_override,
            double rate_override) {
    MachinePark park;
    CalendarConfig calcfg;
    load_park_file(park_path, park, calcfg);
    WorkingCalendar cal(calcfg);
    ProtocolTable protocols = load_protocol_file(protocols_path);

    json gen_json = read_json_file(gen_config_path);
    SyntheticConfig cfg = synthetic_config_from_json(gen_json);
    UnavailabilityConfig ucfg = unavailability_config_from_json(
        gen_json.contains("unavailability") ? gen_json.at("unavailability") : json::object());
    if (seed_override >= 0) {
        cfg.seed = static_cast<std::uint64_t>(seed_override);
        ucfg.seed = static_cast<std::uint64_t>(seed_override) + 1;
    }
    if (rate_override >= 0) cfg.daily_rate_mean = rate_override;

    const Date first = from.empty() ? Date::from_ymd(2020, 1, 1) : Date::parse(from);
    const Date last = to.empty() ? Date::from_ymd(2020, 12, 31) : Date::parse(to);

    const auto records = generate_synthetic(cfg, cal, protocols, first, last);
    if (records.empty()) std::cerr << "warning: generated an empty arrival stream\n";
    const GeneratedCalendar gcal = generate_unavailability(ucfg, cal, park, first, last);

    json provenance = synthetic_config_to_json(cfg);
    provenance["span"] = {{"from", first.iso()}, {"to", last.iso()}};
    const std::string header = artifact_header("gen", provenance);
    write_artifact(fs::path(out_dir) / "arrivals.csv", header, emit_arrivals(records));
    write_artifact(fs::path(out_dir) / "calendar.csv", header, gcal.csv);

    // Calibration summary against the configured mixes.
    int primaries = 0, chained = 0;
    std::map<Priority, int> by_priority;
    std::map<std::string, int> by_protocol;
    long total_fractions = 0, total_minutes = 0;
    std::set<std::string> chained_patients;
    for (const ArrivalRecord& r : records) {
        by_protocol[r.protocol_name]++;
        total_fractions += r.n_fractions;
        total_minutes += r.duration_first + static_cast<long>(r.n_fractions - 1) * r.duration_rest;
        if (r.follows_course) {
            ++chained;
            chained_patients.insert(r.patient_id);
        } else {
            ++primaries;
            by_priority[protocols.by_name(r.protocol_name).priority]++;
        }
    }
    json summary;
    summary["courses"] = records.size();
    summary["primary_courses"] = primaries;
    summary["chained_patient_share"] =
        primaries > 0 ? static_cast<double>(chained_patients.size()) / primaries : 0.0;
    json prio = json::object();
    for (const auto& [p, n] : by_priority)
        prio[to_string(p)] = primaries > 0 ? static_cast<double>(n) / primaries : 0.0;
    summary["priority_shares"] = prio;
    json protot = json::object();
    for (const auto& [name, n] : by_protocol)
        protot[name] = records.empty() ? 0.0 : static_cast<double>(n) / records.size();
    summary["protocol_shares"] = protot;
    summary["mean_fractions"] =
        records.empty() ? 0.0 : static_cast<double>(total_fractions) / records.size();
    summary["mean_session_minutes"] =
        total_fractions > 0 ? static_cast<double>(total_minutes) / total_fractions : 0.0;
    summary["unavailability_day_share"] = gcal.share_days_with_block;
    summary["targets"] = {{"priority_mix", provenance["priority_mix"]},
                          {"consecutive_prob", cfg.consecutive_prob},
                          {"unavailability_day_share", 0.34}};
    write_json_artifact(fs::path(out_dir) / "gen_summary.json", summary, provenance);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// --- simulate ------------------------------------------------------------------

void write_sim_outputs(const fs::path& dir, const std::string& prefix, const SimInputs& inputs,
                       const SimOutput& out, const json& cfg_json) {
    const WorkingCalendar& cal = *inputs.calendar;
    const std::string header = artifact_header("simulate", cfg_json);
    auto p = [&](const std::string& name) { return dir / (prefix + name); };
    write_artifact(p("schedule.csv"), header, schedule_csv(out.schedule));
    write_artifact(p("trace.csv"), header, day_trace_csv(out.trace));
    write_artifact(p("displacements.csv"), header, displacement_csv(out.displacement_log));
    const auto rows = collect_course_metrics(inputs.courses, inputs.protocols, out.schedule,
                                             out.park, cal, inputs.config.preferences,
                                             inputs.config.sim.comparison_start);
    write_artifact(p("course_metrics.csv"), header, course_metrics_csv(rows));
    write_artifact(p("metrics_long.csv"), header, metrics_long_csv(rows));
    write_artifact(p("occupancy.csv"), header,
                   occupancy_csv(out.schedule, out.park, cal,
                                 inputs.config.sim.comparison_start, inputs.config.sim.end));
    write_json_artifact(p("report.json"), report_to_json(out.report), cfg_json);
    {
        std::ostringstream jb;
        for (const json& b : out.batch_traces) jb << b.dump() << '\n';
        write_artifact(p("batch_trace.jsonl"), header, jb.str());
    }
    {
        std::ostringstream def;
        for (const std::string& id : out.final_deferred) def << id << '\n';
        write_artifact(p("deferred.txt"), header, def.str());
    }
}

int cmd_simulate(const std::string& config_path, bool baseline, int snapshot_every,
                 const std::string& resume_path, std::int64_t seed_override,
                 double budget_override, const std::string& out_override, int threads_override) {
    RunConfig cfg = load_run_config(config_path);
    if (seed_override >= 0) cfg.solver.seed = static_cast<std::uint64_t>(seed_override);
    if (budget_override > 0) cfg.solver.budget_seconds = budget_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (threads_override >= 0) cfg.solver.threads = threads_override;
    if (snapshot_every >= 0) cfg.sim.snapshot_every = snapshot_every;

    SimInputs inputs = load_sim_inputs(cfg);
    for (const std::string& w : inputs.warnings) std::cerr << "warning: " << w << '\n';
    const json cfg_json = cfg.to_json();

    std::optional<SimState> resume;
    if (!resume_path.empty()) resume = sim_state_from_json(read_json_file(resume_path));

    std::vector<json> snapshots;
    SimOutput dynamic = run_simulation(inputs, /*baseline=*/false,
                                       resume ? &*resume : nullptr,
                                       cfg.sim.snapshot_every > 0 ? &snapshots : nullptr);
    const fs::path dir(cfg.output_dir);
    write_sim_outputs(dir, "", inputs, dynamic, cfg_json);
    for (size_t i = 0; i < snapshots.size(); ++i)
        write_json_artifact(dir / ("snapshot_" + std::to_string(i + 1) + ".json"), snapshots[i],
                            cfg_json);

    const ValidationReport vr =
        validate_all(dynamic.schedule, inputs.courses, inputs.protocols, dynamic.park,
                     *inputs.calendar);
    write_artifact(dir / "violations.csv", artifact_header("simulate", cfg_json),
                   violations_csv(vr.violations));

    json console;
    console["scheduled_courses"] = dynamic.report.scheduled_courses;
    console["unscheduled_courses"] = dynamic.report.unscheduled_courses;
    console["overall_occupancy"] = dynamic.report.overall_occupancy;
    console["validation_errors"] = vr.n_errors;
    console["validation_warnings"] = vr.n_warnings;
    if (dynamic.report.by_priority.count(Priority::A))
        console["mean_waiting_A"] = dynamic.report.by_priority.at(Priority::A).waiting.mean;

    if (baseline) {
        SimOutput stat = run_simulation(inputs, /*baseline=*/true);
        write_sim_outputs(dir, "baseline_", inputs, stat, cfg_json);
        json paired;
        paired["dynamic"] = report_to_json(dynamic.report);
        paired["baseline"] = report_to_json(stat.report);
        paired["note"] = "baseline = one-by-one FCFS with static priority-A reservation";
        write_json_artifact(dir / "paired_report.json", paired, cfg_json);
        if (stat.report.by_priority.count(Priority::A))
            console["baseline_mean_waiting_A"] = stat.report.by_priority.at(Priority::A).waiting.mean;
        console["baseline_overall_occupancy"] = stat.report.overall_occupancy;
    }
    std::cout << console.dump(2) << '\n';
    return 0;
}

// --- validate ------------------------------------------------------------------

struct LoadedWorld {
    CalendarConfig calcfg;
    std::shared_ptr<WorkingCalendar> cal;
    MachinePark park;
    ProtocolTable protocols;
    CourseTable courses;
    Schedule schedule;
};

LoadedWorld load_world(const std::string& schedule_path, const std::string& arrivals_path,
                       const std::string& protocols_path, const std::string& park_path,
                       const std::string& calendar_path, const std::string& exclusions_path) {
    LoadedWorld w;
    load_park_file(park_path, w.park, w.calcfg);
    w.cal = std::make_shared<WorkingCalendar>(w.calcfg);
    w.protocols = load_protocol_file(protocols_path);
    std::set<std::string> exclusions;
    if (!exclusions_path.empty()) exclusions = load_exclusions(exclusions_path);
    w.courses = build_course_table(parse_arrivals(arrivals_path, w.protocols), exclusions);
    if (!calendar_path.empty())
        parse_calendar(calendar_path, w.calcfg, w.park, /*apply_failures_to_park=*/true);
    w.schedule = parse_schedule_csv(read_text_file(schedule_path), schedule_path, w.courses);
    return w;
}

int cmd_validate(const std::string& schedule_path, const std::string& arrivals_path,
                 const std::string& protocols_path, const std::string& park_path,
                 const std::string& calendar_path, const std::string& exclusions_path,
                 int sample, std::uint64_t sample_seed, const std::string& out_dir) {
    LoadedWorld w = load_world(schedule_path, arrivals_path, protocols_path, park_path,
                               calendar_path, exclusions_path);
    json cfg_json = {{"schedule", schedule_path}, {"arrivals", arrivals_path},
                     {"protocols", protocols_path}, {"park", park_path},
                     {"calendar", calendar_path}, {"sample", sample},
                     {"sample_seed", sample_seed}};

    ValidationReport report;
    if (sample > 0) {
        // Spot-check shape: N random patient schedules plus one machine
        // fortnight.
        std::vector<std::string> scheduled;
        for (const TreatmentCourse& c : w.courses.all())
            if (w.schedule.has_course(c.course_id)) scheduled.push_back(c.course_id);
        std::mt19937_64 rng(sample_seed);
        std::shuffle(scheduled.begin(), scheduled.end(), rng);
        if (static_cast<int>(scheduled.size()) > sample)
            scheduled.resize(static_cast<size_t>(sample));
        std::sort(scheduled.begin(), scheduled.end());
        for (const std::string& id : scheduled) {
            const TreatmentCourse& c = w.courses.at(id);
            auto v = validate_patient(c, w.protocols.by_name(c.protocol_id), w.schedule,
                                      w.courses, w.park, *w.cal);
            report.violations.insert(report.violations.end(), v.begin(), v.end());
        }
        const auto& machines = w.park.machines();
        const std::string machine =
            machines[rng() % machines.size()].machine_id;
        Date from = w.calcfg.span_begin;
        if (auto first = w.schedule.machine_days(); !first.empty()) from = first.front().second;
        auto v = validate_machine(machine, from, from + 13, w.schedule, w.courses, w.protocols,
                                  w.park, *w.cal);
        report.violations.insert(report.violations.end(), v.begin(), v.end());
        for (const Violation& viol : report.violations)
            viol.severity == Severity::error ? ++report.n_errors : ++report.n_warnings;
    } else {
        report = validate_all(w.schedule, w.courses, w.protocols, w.park, *w.cal);
    }

    const std::string header = artifact_header("validate", cfg_json);
    write_artifact(fs::path(out_dir) / "violations.csv", header,
                   violations_csv(report.violations));
    write_json_artifact(fs::path(out_dir) / "violations.json",
                        validation_report_to_json(report), cfg_json);
    std::cout << "errors: " << report.n_errors << "  warnings: " << report.n_warnings << '\n';
    for (const auto& [check, n] : report.errors_by_check)
        std::cout << "  " << check << ": " << n << '\n';
    return report.n_errors > 0 ? 1 : 0;
}

// --- metrics -------------------------------------------------------------------

int cmd_metrics(const std::string& schedule_path, const std::string& arrivals_path,
                const std::string& protocols_path, const std::string& park_path,
                const std::string& calendar_path, const std::string& exclusions_path,
                double trim, const std::string& from, const std::string& out_dir) {
    LoadedWorld w = load_world(schedule_path, arrivals_path, protocols_path, park_path,
                               calendar_path, exclusions_path);
    json cfg_json = {{"schedule", schedule_path}, {"arrivals", arrivals_path},
                     {"protocols", protocols_path}, {"park", park_path},
                     {"calendar", calendar_path}, {"trim", trim}, {"from", from}};
    std::optional<Date> from_date;
    if (!from.empty()) from_date = Date::parse(from);
    PreferenceModel prefs;

    Date occ_from = from_date ? *from_date : w.calcfg.span_begin;
    Date occ_to = w.calcfg.span_end;
    const QualityReport report = aggregate_report(w.courses, w.protocols, w.schedule, w.park,
                                                  *w.cal, prefs, trim, from_date, occ_from,
                                                  occ_to);
    const auto rows = collect_course_metrics(w.courses, w.protocols, w.schedule, w.park, *w.cal,
                                             prefs, from_date);
    const std::string header = artifact_header("metrics", cfg_json);
    write_json_artifact(fs::path(out_dir) / "report.json", report_to_json(report), cfg_json);
    write_artifact(fs::path(out_dir) / "course_metrics.csv", header, course_metrics_csv(rows));
    write_artifact(fs::path(out_dir) / "metrics_long.csv", header, metrics_long_csv(rows));
    write_artifact(fs::path(out_dir) / "occupancy.csv", header,
                   occupancy_csv(w.schedule, w.park, *w.cal, occ_from, occ_to));
    std::cout << report_to_json(report).dump(2) << '\n';
    return 0;
}

// --- oracle --------------------------------------------------------------------

int cmd_oracle(std::uint64_t seed, int n, int horizon_days, const std::string& out_path) {
    if (horizon_days > 12)
        throw SizeError("oracle horizon of " + std::to_string(horizon_days) +
                        " working days exceeds the 12-day cap");
    std::ostringstream rows;
    rows << "# seed,oracle_feasible,heuristic_feasible,oracle_cost,heuristic_cost,ratio\n";
    int equal = 0, feasible = 0, verdict_mismatch = 0;
    double max_ratio = 0.0;
    for (int i = 0; i < n; ++i) {
        const OracleComparison c = compare_on_instance(seed + static_cast<std::uint64_t>(i));
        if (c.oracle_feasible != c.heuristic_feasible) ++verdict_mismatch;
        if (c.oracle_feasible && c.heuristic_feasible) {
            ++feasible;
            if (c.heuristic_cost == c.oracle_cost) ++equal;
            max_ratio = std::max(max_ratio, c.ratio);
        }
        std::ostringstream ratio;
        ratio.precision(6);
        ratio << std::fixed << c.ratio;
        rows << join_csv({std::to_string(c.seed), c.oracle_feasible ? "1" : "0",
                          c.heuristic_feasible ? "1" : "0", std::to_string(c.oracle_cost),
                          std::to_string(c.heuristic_cost), ratio.str()})
             << '\n';
    }
    json summary = {{"instances", n},
                    {"feasible_pairs", feasible},
                    {"equal_cost", equal},
                    {"max_ratio", max_ratio},
                    {"verdict_mismatches", verdict_mismatch}};
    if (!out_path.empty())
        write_artifact(out_path, artifact_header("oracle", summary), rows.str());
    std::cout << rows.str() << summary.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"radiotherapy patient scheduling engine and replay simulator"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate synthetic arrival and calendar files");
    std::string gen_config = "data/synthetic_default.json";
    std::string park_path = "data/park.json";
    std::string protocols_path = "data/protocols.json";
    std::string out_dir = "out";
    std::string from, to;
    std::int64_t seed_override = -1;
    double rate_override = -1;
    gen->add_option("--config", gen_config, "synthetic generator config (JSON)");
    gen->add_option("--park", park_path, "machine park + calendar config (JSON)");
    gen->add_option("--protocols", protocols_path, "protocol table (JSON)");
    gen->add_option("--out", out_dir, "output directory");
    gen->add_option("--from", from, "first arrival date (default 2020-01-01)");
    gen->add_option("--to", to, "last arrival date (default 2020-12-31)");
    gen->add_option("--seed", seed_override, "seed override");
    gen->add_option("--rate", rate_override, "daily arrival rate override");

    // simulate
    auto* sim = app.add_subcommand("simulate", "replay the scheduling year day by day");
    std::string run_config = "data/run_default.json";
    bool baseline = false;
    int snapshot_every = -1;
    std::string resume_path, sim_out;
    std::int64_t sim_seed = -1;
    double budget = -1;
    int threads = -1;
    sim->add_option("--config", run_config, "run config (JSON)");
    sim->add_flag("--baseline", baseline,
                  "also run the FCFS/static-reservation baseline for comparison");
    sim->add_option("--snapshot-every", snapshot_every, "snapshot every N working days");
    sim->add_option("--resume", resume_path, "resume from a snapshot file");
    sim->add_option("--seed", sim_seed, "solver seed override");
    sim->add_option("--budget", budget, "per-day solver budget seconds override");
    sim->add_option("--out", sim_out, "output directory override");
    sim->add_option("--threads", threads, "enumeration worker threads (0 = hardware)");

    // validate
    auto* val = app.add_subcommand("validate", "audit a schedule against every constraint");
    std::string v_schedule, v_arrivals, v_protocols = "data/protocols.json",
                            v_park = "data/park.json", v_calendar, v_exclusions,
                            v_out = "out";
    int sample = 0;
    std::uint64_t sample_seed = 1;
    val->add_option("--schedule", v_schedule, "schedule CSV")->required();
    val->add_option("--arrivals", v_arrivals, "arrival CSV")->required();
    val->add_option("--protocols", v_protocols, "protocol table (JSON)");
    val->add_option("--park", v_park, "machine park + calendar config (JSON)");
    val->add_option("--calendar", v_calendar, "unavailability calendar CSV");
    val->add_option("--exclusions", v_exclusions, "course ids excluded from metrics");
    val->add_option("--sample", sample, "spot-check N random patients plus one machine fortnight");
    val->add_option("--sample-seed", sample_seed, "sampling seed");
    val->add_option("--out", v_out, "output directory");

    // metrics
    auto* met = app.add_subcommand("metrics", "compute the quality report for a schedule");
    std::string m_schedule, m_arrivals, m_protocols = "data/protocols.json",
                            m_park = "data/park.json", m_calendar, m_exclusions,
                            m_out = "out", m_from;
    double trim = 0.01;
    met->add_option("--schedule", m_schedule, "schedule CSV")->required();
    met->add_option("--arrivals", m_arrivals, "arrival CSV")->required();
    met->add_option("--protocols", m_protocols, "protocol table (JSON)");
    met->add_option("--park", m_park, "machine park + calendar config (JSON)");
    met->add_option("--calendar", m_calendar, "unavailability calendar CSV");
    met->add_option("--exclusions", m_exclusions, "course ids excluded from metrics");
    met->add_option("--trim", trim, "top quantile trimmed from each metric");
    met->add_option("--from", m_from, "only courses created on or after this date");
    met->add_option("--out", m_out, "output directory");

    // oracle
    auto* orc = app.add_subcommand("oracle", "compare the heuristic against exhaustive search");
    std::uint64_t o_seed = 1;
    int o_n = 100;
    int o_horizon = 12;
    std::string o_out;
    orc->add_option("--seed", o_seed, "base seed");
    orc->add_option("--n", o_n, "number of instances");
    orc->add_option("--horizon-days", o_horizon, "instance horizon cap (max 12)");
    orc->add_option("--out", o_out, "write per-instance rows to this CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(gen_config, park_path, protocols_path, out_dir, from, to,
                           seed_override, rate_override);
        if (sim->parsed())
            return cmd_simulate(run_config, baseline, snapshot_every, resume_path, sim_seed,
                                budget, sim_out, threads);
        if (val->parsed())
            return cmd_validate(v_schedule, v_arrivals, v_protocols, v_park, v_calendar,
                                v_exclusions, sample, sample_seed, v_out);
        if (met->parsed())
            return cmd_metrics(m_schedule, m_arrivals, m_protocols, m_park, m_calendar,
                               m_exclusions, trim, m_from, m_out);
        if (orc->parsed()) return cmd_oracle(o_seed, o_n, o_horizon, o_out);
    } catch (const IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
