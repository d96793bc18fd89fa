#include "rtsched/config.hpp"

#include "rtsched/csv.hpp"
#include "rtsched/errors.hpp"

#include <fstream>
#include <sstream>

namespace rtsched {

using nlohmann::json;

// --- csv helpers -----------------------------------------------------------

namespace {
std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
} // namespace

std::vector<CsvRow> parse_csv(const std::string& content) {
    std::vector<CsvRow> rows;
    std::istringstream in(content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        CsvRow row;
        row.line = lineno;
        std::string field;
        std::istringstream ls(t);
        while (std::getline(ls, field, ',')) row.fields.push_back(trim(field));
        if (!t.empty() && t.back() == ',') row.fields.push_back("");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<CsvRow> read_csv(const std::string& path) {
    return parse_csv(read_text_file(path));
}

std::string join_csv(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// --- weights ----------------------------------------------------------------

void ObjectiveWeights::validate() const {
    auto pos = [](std::int64_t v, const char* name) {
        if (v <= 0) throw ConfigError(std::string("weight ") + name + " must be positive");
    };
    pos(waiting_per_day, "waiting_per_day");
    pos(excess_per_day, "excess_per_day");
    pos(off_site_per_fraction, "off_site_per_fraction");
    pos(non_preferred_per_fraction, "non_preferred_per_fraction");
    pos(partial_switch, "partial_switch");
    pos(window_switch, "window_switch");
    pos(off_window_per_fraction, "off_window_per_fraction");
    for (auto [p, m] : priority_multipliers)
        if (m <= 0) throw ConfigError("priority multiplier must be positive");
}

bool ObjectiveWeights::dominates(int n) const {
    const std::int64_t lower = off_site_per_fraction * n + non_preferred_per_fraction * n +
                               partial_switch + window_switch * std::max(0, n - 1) +
                               off_window_per_fraction * n;
    std::int64_t top = waiting_per_day;
    for (auto [p, m] : priority_multipliers) top = std::min(top, waiting_per_day * m);
    return top > lower && excess_per_day > lower;
}

void SolverParams::validate() const {
    if (plans_per_course < 1) throw ConfigError("plans_per_course must be >= 1");
    if (start_day_window < 0) throw ConfigError("start_day_window must be >= 0");
    if (budget_seconds <= 0) throw ConfigError("budget_seconds must be positive");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (local_search_passes < 0) throw ConfigError("local_search_passes must be >= 0");
    if (reservation_horizon_days < 0) throw ConfigError("reservation horizon must be >= 0");
    if (trailing_window_days < 1) throw ConfigError("trailing window must be >= 1");
    if (placeholder.fractions < 1 || placeholder.duration < 1)
        throw ConfigError("placeholder shape must be positive");
    if (placeholder.prior_daily_rate < 0) throw ConfigError("prior rate must be >= 0");
}

void SimParams::validate() const {
    if (end < start) throw ConfigError("simulation range is empty");
    if (trim < 0.0 || trim >= 0.5) throw ConfigError("trim must lie in [0, 0.5)");
    if (horizon_days < 1) throw ConfigError("horizon must be >= 1 day");
    if (baseline_reserve_minutes < 0) throw ConfigError("baseline reserve must be >= 0");
}

void RunConfig::validate() const {
    weights.validate();
    solver.validate();
    sim.validate();
    if (preferences.with_preference_share < 0 || preferences.with_preference_share > 1 ||
        preferences.am_share < 0 || preferences.am_share > 1)
        throw ConfigError("preference shares must lie in [0,1]");
}

// --- json -------------------------------------------------------------------

namespace {

int clock_or_int(const json& j) {
    return j.is_string() ? parse_clock(j.get<std::string>()) : j.get<int>();
}

int weekday_from_json(const json& j) {
    if (j.is_number_integer()) {
        int v = j.get<int>();
        if (v < 0 || v > 6) throw ConfigError("weekday index out of range");
        return v;
    }
    static const std::map<std::string, int> names = {{"Mon", 0}, {"Tue", 1}, {"Wed", 2},
                                                     {"Thu", 3}, {"Fri", 4}, {"Sat", 5},
                                                     {"Sun", 6}};
    auto it = names.find(j.get<std::string>());
    if (it == names.end()) throw ConfigError("unknown weekday '" + j.get<std::string>() + "'");
    return it->second;
}

} // namespace

json RunConfig::to_json() const {
    json w;
    w["waiting_per_day"] = weights.waiting_per_day;
    w["excess_per_day"] = weights.excess_per_day;
    w["off_site_per_fraction"] = weights.off_site_per_fraction;
    w["non_preferred_per_fraction"] = weights.non_preferred_per_fraction;
    w["partial_switch"] = weights.partial_switch;
    w["window_switch"] = weights.window_switch;
    w["off_window_per_fraction"] = weights.off_window_per_fraction;
    w["priority_multipliers"] = {{"A", weights.priority_multipliers.at(Priority::A)},
                                 {"B", weights.priority_multipliers.at(Priority::B)},
                                 {"C", weights.priority_multipliers.at(Priority::C)}};
    json s;
    s["plans_per_course"] = solver.plans_per_course;
    s["start_day_window"] = solver.start_day_window;
    s["budget_seconds"] = solver.budget_seconds;
    s["seed"] = solver.seed;
    s["threads"] = solver.threads;
    s["local_search_passes"] = solver.local_search_passes;
    s["reservation_horizon_days"] = solver.reservation_horizon_days;
    s["trailing_window_days"] = solver.trailing_window_days;
    s["placeholder"] = {{"fractions", solver.placeholder.fractions},
                        {"duration", solver.placeholder.duration},
                        {"prior_daily_rate", solver.placeholder.prior_daily_rate}};
    json m;
    m["start"] = sim.start.iso();
    m["end"] = sim.end.iso();
    m["comparison_start"] = sim.comparison_start.iso();
    m["trim"] = sim.trim;
    m["snapshot_every"] = sim.snapshot_every;
    m["horizon_days"] = sim.horizon_days;
    m["baseline_reserve_minutes"] = sim.baseline_reserve_minutes;

    return json{{"files",
                 {{"arrivals", files.arrivals},
                  {"calendar", files.calendar},
                  {"protocols", files.protocols},
                  {"park", files.park},
                  {"input_schedule", files.input_schedule},
                  {"exclusions", files.exclusions}}},
                {"weights", w},
                {"solver", s},
                {"sim", m},
                {"preferences",
                 {{"with_preference_share", preferences.with_preference_share},
                  {"am_share", preferences.am_share}}},
                {"output_dir", output_dir}};
}

RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    if (j.contains("files")) {
        const json& f = j.at("files");
        cfg.files.arrivals = f.value("arrivals", "");
        cfg.files.calendar = f.value("calendar", "");
        cfg.files.protocols = f.value("protocols", "");
        cfg.files.park = f.value("park", "");
        cfg.files.input_schedule = f.value("input_schedule", "");
        cfg.files.exclusions = f.value("exclusions", "");
    }
    if (j.contains("weights")) {
        const json& w = j.at("weights");
        auto& ws = cfg.weights;
        ws.waiting_per_day = w.value("waiting_per_day", ws.waiting_per_day);
        ws.excess_per_day = w.value("excess_per_day", ws.excess_per_day);
        ws.off_site_per_fraction = w.value("off_site_per_fraction", ws.off_site_per_fraction);
        ws.non_preferred_per_fraction =
            w.value("non_preferred_per_fraction", ws.non_preferred_per_fraction);
        ws.partial_switch = w.value("partial_switch", ws.partial_switch);
        ws.window_switch = w.value("window_switch", ws.window_switch);
        ws.off_window_per_fraction =
            w.value("off_window_per_fraction", ws.off_window_per_fraction);
        if (w.contains("priority_multipliers")) {
            const json& pm = w.at("priority_multipliers");
            ws.priority_multipliers[Priority::A] = pm.value("A", 3);
            ws.priority_multipliers[Priority::B] = pm.value("B", 2);
            ws.priority_multipliers[Priority::C] = pm.value("C", 1);
        }
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        auto& sp = cfg.solver;
        sp.plans_per_course = s.value("plans_per_course", sp.plans_per_course);
        sp.start_day_window = s.value("start_day_window", sp.start_day_window);
        sp.budget_seconds = s.value("budget_seconds", sp.budget_seconds);
        sp.seed = s.value("seed", sp.seed);
        sp.threads = s.value("threads", sp.threads);
        sp.local_search_passes = s.value("local_search_passes", sp.local_search_passes);
        sp.reservation_horizon_days =
            s.value("reservation_horizon_days", sp.reservation_horizon_days);
        sp.trailing_window_days = s.value("trailing_window_days", sp.trailing_window_days);
        if (s.contains("placeholder")) {
            const json& p = s.at("placeholder");
            sp.placeholder.fractions = p.value("fractions", sp.placeholder.fractions);
            sp.placeholder.duration = p.value("duration", sp.placeholder.duration);
            sp.placeholder.prior_daily_rate =
                p.value("prior_daily_rate", sp.placeholder.prior_daily_rate);
        }
    }
    if (j.contains("sim")) {
        const json& m = j.at("sim");
        auto& sm = cfg.sim;
        if (m.contains("start")) sm.start = Date::parse(m.at("start").get<std::string>());
        if (m.contains("end")) sm.end = Date::parse(m.at("end").get<std::string>());
        if (m.contains("comparison_start"))
            sm.comparison_start = Date::parse(m.at("comparison_start").get<std::string>());
        sm.trim = m.value("trim", sm.trim);
        sm.snapshot_every = m.value("snapshot_every", sm.snapshot_every);
        sm.horizon_days = m.value("horizon_days", sm.horizon_days);
        sm.baseline_reserve_minutes =
            m.value("baseline_reserve_minutes", sm.baseline_reserve_minutes);
    }
    if (j.contains("preferences")) {
        const json& p = j.at("preferences");
        cfg.preferences.with_preference_share =
            p.value("with_preference_share", cfg.preferences.with_preference_share);
        cfg.preferences.am_share = p.value("am_share", cfg.preferences.am_share);
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return run_config_from_json(read_json_file(path));
}

void load_park_file(const std::string& path, MachinePark& park, CalendarConfig& cal) {
    const json j = read_json_file(path);
    try {
        if (j.contains("span")) {
            cal.span_begin = Date::parse(j.at("span").at("begin").get<std::string>());
            cal.span_end = Date::parse(j.at("span").at("end").get<std::string>());
        }
        if (j.contains("weekend_days")) {
            cal.weekend_days.clear();
            for (const json& wd : j.at("weekend_days")) cal.weekend_days.insert(weekday_from_json(wd));
        }
        if (j.contains("holidays")) {
            cal.holidays.clear();
            for (const json& h : j.at("holidays")) cal.holidays.insert(Date::parse(h.get<std::string>()));
        }
        if (j.contains("operating_window")) {
            cal.open_minute = clock_or_int(j.at("operating_window").at("open"));
            cal.close_minute = clock_or_int(j.at("operating_window").at("close"));
        }
        cal.time_grid = j.value("time_grid", cal.time_grid);
        cal.window_length = j.value("window_length", cal.window_length);
        if (j.contains("noon_boundary")) cal.noon_minute = clock_or_int(j.at("noon_boundary"));
        cal.validate();
        for (const json& m : j.at("machines")) {
            Machine machine;
            machine.machine_id = m.at("id").get<std::string>();
            machine.site_id = m.at("site").get<std::string>();
            machine.linac_type = m.at("type").get<std::string>();
            park.add_machine(std::move(machine));
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

ProtocolTable load_protocol_file(const std::string& path) {
    const json j = read_json_file(path);
    ProtocolTable table;
    try {
        for (const json& p : j.at("protocols")) {
            TreatmentProtocol proto;
            proto.protocol_id = p.at("id").get<std::string>();
            proto.priority = priority_from_string(p.at("priority").get<std::string>());
            proto.min_fractions_per_week = p.value("min_fractions_per_week", 1);
            proto.pre_treatment_days = p.value("pre_treatment_days", 0);
            proto.preferred_machines =
                p.value("preferred_machines", std::vector<std::string>{});
            proto.allowed_machines = p.value("allowed_machines", std::vector<std::string>{});
            proto.first_fraction_duration = p.value("first_fraction_duration", 20);
            proto.subsequent_fraction_duration = p.value("subsequent_fraction_duration", 12);
            proto.max_fractions_per_day = p.value("max_fractions_per_day", 1);
            if (p.contains("max_gap_between_fractions") &&
                !p.at("max_gap_between_fractions").is_null())
                proto.max_gap_between_fractions = p.at("max_gap_between_fractions").get<int>();
            if (p.contains("allowed_patterns")) {
                proto.allowed_patterns.clear();
                for (const json& s : p.at("allowed_patterns"))
                    proto.allowed_patterns.push_back(pattern_from_string(s.get<std::string>()));
            }
            proto.allow_partial_match_switch = p.value("allow_partial_match_switch", true);
            if (p.contains("generator")) {
                const json& g = p.at("generator");
                if (g.contains("fractions")) {
                    proto.gen_fractions_min = g.at("fractions").at(0).get<int>();
                    proto.gen_fractions_max = g.at("fractions").at(1).get<int>();
                }
                proto.gen_boost_protocol = g.value("boost_protocol", "");
            }
            table.add(std::move(proto));
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return table;
}

} // namespace rtsched
