#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/ingest.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace rtsched {

// Calibration knobs for the synthetic arrival stream. Priority shares are
// sampled first; the protocol is then drawn from the mix restricted to that
// priority, so the priority mix is honoured regardless of the protocol table.
struct SyntheticConfig {
    double daily_rate_mean = 12.5; // patients per working day
    std::map<Priority, double> priority_mix = {
        {Priority::A, 0.37}, {Priority::B, 0.16}, {Priority::C, 0.47}};
    std::map<std::string, double> protocol_mix; // protocol id -> probability
    double consecutive_prob = 0.17;             // chance a patient gains a chained boost course
    std::map<std::string, double> site_mix;
    std::uint64_t seed = 1;
    std::string default_boost_protocol = "Boost";

    void validate(const ProtocolTable& protocols) const; // throws ConfigError
};

SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);
nlohmann::json synthetic_config_to_json(const SyntheticConfig& cfg);

// Poisson daily arrival counts on working days; attributes drawn from the
// mixes; deterministic under a fixed seed.
std::vector<ArrivalRecord> generate_synthetic(const SyntheticConfig& cfg,
                                              const WorkingCalendar& cal,
                                              const ProtocolTable& protocols,
                                              Date first_day, Date last_day);

// Machine unavailability generator for fixture years.
struct UnavailabilityConfig {
    double planned_full_day_prob = 0.020; // per machine-day
    double planned_partial_prob = 0.012;
    double failure_prob = 0.008;
    int partial_min_minutes = 120;
    int partial_max_minutes = 300;
    std::uint64_t seed = 2;
};

UnavailabilityConfig unavailability_config_from_json(const nlohmann::json& j);

struct GeneratedCalendar {
    std::string csv;              // ready-to-write calendar file
    double share_days_with_block; // fraction of working days carrying any row
};

GeneratedCalendar generate_unavailability(const UnavailabilityConfig& cfg,
                                          const WorkingCalendar& cal, const MachinePark& park,
                                          Date first_day, Date last_day);

} // namespace rtsched
