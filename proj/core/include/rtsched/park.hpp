#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/date.hpp"

#include <map>
#include <string>
#include <vector>

namespace rtsched {

// Half-open busy interval in minutes from midnight.
struct Interval {
    int begin = 0;
    int end = 0;
    int length() const { return end - begin; }
    bool overlaps(const Interval& o) const { return begin < o.end && o.begin < end; }
    auto operator<=>(const Interval&) const = default;
};

struct Machine {
    std::string machine_id;
    std::string site_id;
    std::string linac_type;
};

enum class BeamMatch { complete, partial, none };

const char* to_string(BeamMatch m);

enum class BlockKind { planned, failure };

// The machine fleet plus its calendars of planned unavailability and
// failures. Beam matching is derived from (type, site): same type and
// site -> complete, same type across sites -> partial, otherwise none.
class MachinePark {
public:
    void add_machine(Machine m); // throws ConfigError on duplicates
    const std::vector<Machine>& machines() const { return machines_; }
    const Machine& at(const std::string& machine_id) const;
    bool contains(const std::string& machine_id) const;

    BeamMatch beam_match(const std::string& m1, const std::string& m2) const;

    // Intervals are clipped to the operating window by the calendar parser;
    // duplicates merge. Overlapping intervals are coalesced.
    void add_block(const std::string& machine_id, Date date, Interval iv, BlockKind kind);

    // Planned + failure busy time for one machine-day, sorted and coalesced.
    std::vector<Interval> blocks(const std::string& machine_id, Date date) const;
    std::vector<Interval> blocks_of_kind(const std::string& machine_id, Date date,
                                         BlockKind kind) const;
    bool any_failure_between(Date a, Date b) const; // inclusive date range

    int blocked_minutes(const std::string& machine_id, Date date) const;

    // Dates carrying at least one block of any kind, ascending.
    std::vector<Date> blocked_dates() const;

private:
    std::vector<Machine> machines_;
    std::map<std::string, size_t> by_id_;
    // (machine, date) -> intervals; two maps keep the kinds separable.
    std::map<std::pair<std::string, Date>, std::vector<Interval>> planned_;
    std::map<std::pair<std::string, Date>, std::vector<Interval>> failures_;
};

// Sorted, coalesced union of interval sets.
std::vector<Interval> merge_intervals(std::vector<Interval> ivs);

} // namespace rtsched
