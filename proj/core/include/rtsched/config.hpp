#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

namespace rtsched {

// Table-of-objectives weights. Integer-valued on purpose: plan costs are
// exact int64 sums, so ordering decisions are reproducible and scale
// invariance holds exactly.
struct ObjectiveWeights {
    std::int64_t waiting_per_day = 10000; // x priority multiplier, per working day late
    std::int64_t excess_per_day = 10000;
    std::int64_t off_site_per_fraction = 6000;
    std::int64_t non_preferred_per_fraction = 3000;
    std::int64_t partial_switch = 3000;
    std::int64_t window_switch = 10;
    std::int64_t off_window_per_fraction = 10;
    std::map<Priority, std::int64_t> priority_multipliers = {
        {Priority::A, 3}, {Priority::B, 2}, {Priority::C, 1}};

    std::int64_t waiting_weight(Priority p) const {
        return waiting_per_day * priority_multipliers.at(p);
    }
    void validate() const; // throws ConfigError on non-positive weights

    // True when one waiting day outweighs every lower-priority term a
    // course of n fractions can accrue. Informational: the defaults do not
    // hold it for long courses.
    bool dominates(int n_fractions) const;
};

struct PlaceholderParams {
    int fractions = 5;
    int duration = 15;          // minutes per fraction
    double prior_daily_rate = 5.0; // cold-start priority-A arrivals/day
};

struct SolverParams {
    int plans_per_course = 200;   // K
    int start_day_window = 15;    // H_s, working days after earliest start
    double budget_seconds = 60.0; // logged when exceeded; search itself is deterministic
    std::uint64_t seed = 1;
    int threads = 1; // plan enumeration workers; results independent of the count
    int local_search_passes = 2;
    int reservation_horizon_days = 15; // working days of placeholder coverage
    int trailing_window_days = 14;     // working days in the arrival-rate window
    PlaceholderParams placeholder;

    void validate() const;
};

struct SimParams {
    Date start = Date::from_ymd(2020, 1, 1);
    Date end = Date::from_ymd(2020, 12, 31);
    Date comparison_start = Date::from_ymd(2020, 4, 1);
    double trim = 0.01;
    int snapshot_every = 0; // working days; 0 = only on demand
    int horizon_days = 90;  // calendar days of planning horizon
    int baseline_reserve_minutes = 45; // static per-machine-day reservation

    void validate() const;
};

struct FilePaths {
    std::string arrivals;
    std::string calendar; // unavailability + failures CSV; optional
    std::string protocols;
    std::string park;
    std::string input_schedule; // optional
    std::string exclusions;     // optional, one course id per line
};

struct RunConfig {
    FilePaths files;
    ObjectiveWeights weights;
    SolverParams solver;
    SimParams sim;
    PreferenceModel preferences;
    std::string output_dir = "out";

    void validate() const;
    nlohmann::json to_json() const; // provenance header for every artifact
};

// --- JSON loaders ---------------------------------------------------------

RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const nlohmann::json& j);

// Park file: machines plus the clinic calendar.
void load_park_file(const std::string& path, MachinePark& park, CalendarConfig& cal);

ProtocolTable load_protocol_file(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace rtsched
