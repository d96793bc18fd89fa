#include "rtsched/synthetic.hpp"

#include "rtsched/csv.hpp"
#include "rtsched/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rtsched {

using nlohmann::json;

namespace {

void check_probability_vector(const std::map<std::string, double>& mix, const char* what) {
    if (mix.empty()) throw ConfigError(std::string(what) + " is empty");
    double sum = 0;
    for (const auto& [k, v] : mix) {
        if (v < 0) throw ConfigError(std::string(what) + ": negative probability for " + k);
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError(std::string(what) + " must sum to 1 (got " + std::to_string(sum) + ")");
}

// Deterministic categorical draw over a sorted map.
template <typename K>
const K& draw_categorical(const std::map<K, double>& mix, std::mt19937_64& rng) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const K* last = nullptr;
    for (const auto& [k, v] : mix) {
        last = &k;
        if (u < v) return k;
        u -= v;
    }
    return *last; // numeric slack lands on the final key
}

std::string pad5(int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", n);
    return buf;
}

} // namespace

void SyntheticConfig::validate(const ProtocolTable& protocols) const {
    if (daily_rate_mean < 0) throw ConfigError("daily_rate_mean must be >= 0");
    if (consecutive_prob < 0 || consecutive_prob > 1)
        throw ConfigError("consecutive_prob must lie in [0,1]");
    double psum = 0;
    for (const auto& [p, v] : priority_mix) {
        if (v < 0) throw ConfigError("negative priority share");
        psum += v;
    }
    if (std::abs(psum - 1.0) > 1e-9) throw ConfigError("priority_mix must sum to 1");
    check_probability_vector(protocol_mix, "protocol_mix");
    check_probability_vector(site_mix, "site_mix");
    // Every priority with positive share needs at least one protocol to draw.
    for (const auto& [prio, share] : priority_mix) {
        if (share <= 0) continue;
        bool any = false;
        for (const auto& [name, w] : protocol_mix)
            if (w > 0 && protocols.by_name(name).priority == prio) any = true;
        if (!any)
            throw ConfigError(std::string("no protocol in the mix has priority ") +
                              to_string(prio));
    }
    if (!default_boost_protocol.empty()) protocols.by_name(default_boost_protocol);
}

SyntheticConfig synthetic_config_from_json(const json& j) {
    SyntheticConfig cfg;
    cfg.daily_rate_mean = j.value("daily_rate_mean", cfg.daily_rate_mean);
    if (j.contains("priority_mix")) {
        const json& pm = j.at("priority_mix");
        cfg.priority_mix = {{Priority::A, pm.value("A", 0.0)},
                            {Priority::B, pm.value("B", 0.0)},
                            {Priority::C, pm.value("C", 0.0)}};
    }
    if (j.contains("protocol_mix")) {
        cfg.protocol_mix.clear();
        for (const auto& [k, v] : j.at("protocol_mix").items())
            cfg.protocol_mix[k] = v.get<double>();
    }
    cfg.consecutive_prob = j.value("consecutive_prob", cfg.consecutive_prob);
    if (j.contains("site_mix")) {
        cfg.site_mix.clear();
        for (const auto& [k, v] : j.at("site_mix").items()) cfg.site_mix[k] = v.get<double>();
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.default_boost_protocol = j.value("default_boost_protocol", cfg.default_boost_protocol);
    return cfg;
}

json synthetic_config_to_json(const SyntheticConfig& cfg) {
    json pm;
    for (const auto& [p, v] : cfg.priority_mix) pm[to_string(p)] = v;
    json proto = json::object();
    for (const auto& [k, v] : cfg.protocol_mix) proto[k] = v;
    json site = json::object();
    for (const auto& [k, v] : cfg.site_mix) site[k] = v;
    return json{{"daily_rate_mean", cfg.daily_rate_mean},
                {"priority_mix", pm},
                {"protocol_mix", proto},
                {"consecutive_prob", cfg.consecutive_prob},
                {"site_mix", site},
                {"seed", cfg.seed},
                {"default_boost_protocol", cfg.default_boost_protocol}};
}

std::vector<ArrivalRecord> generate_synthetic(const SyntheticConfig& cfg,
                                              const WorkingCalendar& cal,
                                              const ProtocolTable& protocols, Date first_day,
                                              Date last_day) {
    cfg.validate(protocols);
    std::mt19937_64 rng(cfg.seed);
    std::poisson_distribution<int> daily(cfg.daily_rate_mean > 0 ? cfg.daily_rate_mean : 1e-12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Protocol mixes split per priority, renormalized.
    std::map<Priority, std::map<std::string, double>> by_priority;
    for (const auto& [name, w] : cfg.protocol_mix) {
        if (w <= 0) continue;
        by_priority[protocols.by_name(name).priority][name] = w;
    }
    for (auto& [prio, mix] : by_priority) {
        double sum = 0;
        for (auto& [k, v] : mix) sum += v;
        for (auto& [k, v] : mix) v /= sum;
    }

    std::vector<ArrivalRecord> records;
    int patient_seq = 1;
    int course_seq = 10000;
    for (Date d = first_day; d <= last_day; ++d) {
        if (!cal.is_working_day(d)) continue;
        const int n = cfg.daily_rate_mean > 0 ? daily(rng) : 0;
        for (int i = 0; i < n; ++i) {
            const Priority prio = draw_categorical(cfg.priority_mix, rng);
            const std::string proto_name = draw_categorical(by_priority.at(prio), rng);
            const TreatmentProtocol& proto = protocols.by_name(proto_name);

            ArrivalRecord r;
            r.patient_id = pad5(patient_seq++);
            r.course_id = pad5(course_seq++);
            r.creation_date = d;
            r.protocol_name = proto.protocol_id;
            r.n_fractions = proto.gen_fractions_min == proto.gen_fractions_max
                                ? proto.gen_fractions_min
                                : std::uniform_int_distribution<int>(
                                      proto.gen_fractions_min, proto.gen_fractions_max)(rng);
            r.duration_first = proto.first_fraction_duration;
            r.duration_rest = proto.subsequent_fraction_duration;
            r.site_pref = draw_categorical(cfg.site_mix, rng);
            records.push_back(r);

            if (unit(rng) < cfg.consecutive_prob) {
                const std::string boost_name = proto.gen_boost_protocol.empty()
                                                   ? cfg.default_boost_protocol
                                                   : proto.gen_boost_protocol;
                if (!boost_name.empty()) {
                    const TreatmentProtocol& boost = protocols.by_name(boost_name);
                    ArrivalRecord b;
                    b.patient_id = r.patient_id;
                    b.course_id = pad5(course_seq++);
                    b.creation_date = d;
                    b.protocol_name = boost.protocol_id;
                    b.n_fractions =
                        boost.gen_fractions_min == boost.gen_fractions_max
                            ? boost.gen_fractions_min
                            : std::uniform_int_distribution<int>(boost.gen_fractions_min,
                                                                 boost.gen_fractions_max)(rng);
                    b.duration_first = boost.first_fraction_duration;
                    b.duration_rest = boost.subsequent_fraction_duration;
                    b.site_pref = r.site_pref; // boost stays at the patient's site
                    b.follows_course = r.course_id;
                    records.push_back(std::move(b));
                }
            }
        }
    }
    return records;
}

UnavailabilityConfig unavailability_config_from_json(const json& j) {
    UnavailabilityConfig cfg;
    cfg.planned_full_day_prob = j.value("planned_full_day_prob", cfg.planned_full_day_prob);
    cfg.planned_partial_prob = j.value("planned_partial_prob", cfg.planned_partial_prob);
    cfg.failure_prob = j.value("failure_prob", cfg.failure_prob);
    cfg.partial_min_minutes = j.value("partial_min_minutes", cfg.partial_min_minutes);
    cfg.partial_max_minutes = j.value("partial_max_minutes", cfg.partial_max_minutes);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

GeneratedCalendar generate_unavailability(const UnavailabilityConfig& cfg,
                                          const WorkingCalendar& cal, const MachinePark& park,
                                          Date first_day, Date last_day) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const CalendarConfig& cc = cal.config();
    const int grid = cc.time_grid;
    auto snap = [grid](int t) { return (t / grid) * grid; };

    std::ostringstream out;
    out << "# machine,date,interval,kind\n";
    int blocked_days = 0, working_days = 0;
    for (Date d = first_day; d <= last_day; ++d) {
        if (!cal.is_working_day(d)) continue;
        ++working_days;
        bool any = false;
        for (const Machine& m : park.machines()) {
            const double u = unit(rng);
            if (u < cfg.planned_full_day_prob) {
                out << join_csv({m.machine_id, d.iso(), "FULL_DAY", "planned"}) << '\n';
                any = true;
            } else if (u < cfg.planned_full_day_prob + cfg.planned_partial_prob) {
                const int len = snap(cfg.partial_min_minutes +
                                     static_cast<int>(unit(rng) * (cfg.partial_max_minutes -
                                                                   cfg.partial_min_minutes)));
                const bool morning = unit(rng) < 0.5;
                const int b = morning ? cc.open_minute : cc.close_minute - len;
                out << join_csv({m.machine_id, d.iso(),
                                 format_clock(b) + "-" + format_clock(b + len), "planned"})
                    << '\n';
                any = true;
            } else if (u < cfg.planned_full_day_prob + cfg.planned_partial_prob +
                               cfg.failure_prob) {
                const int len = snap(60 + static_cast<int>(unit(rng) * 210));
                const int latest = cc.close_minute - len;
                const int b = snap(cc.open_minute +
                                   static_cast<int>(unit(rng) * (latest - cc.open_minute)));
                out << join_csv({m.machine_id, d.iso(),
                                 format_clock(b) + "-" + format_clock(b + len), "failure"})
                    << '\n';
                any = true;
            }
        }
        if (any) ++blocked_days;
    }
    GeneratedCalendar result;
    result.csv = out.str();
    result.share_days_with_block =
        working_days == 0 ? 0.0 : static_cast<double>(blocked_days) / working_days;
    return result;
}

} // namespace rtsched
