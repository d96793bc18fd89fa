#include "rtsched/park.hpp"

#include "rtsched/errors.hpp"

#include <algorithm>

namespace rtsched {

const char* to_string(BeamMatch m) {
    switch (m) {
    case BeamMatch::complete: return "complete";
    case BeamMatch::partial: return "partial";
    case BeamMatch::none: return "none";
    }
    return "?";
}

void MachinePark::add_machine(Machine m) {
    if (m.machine_id.empty() || m.site_id.empty() || m.linac_type.empty())
        throw ConfigError("machine entries need id, site and type");
    if (by_id_.count(m.machine_id)) throw ConfigError("duplicate machine '" + m.machine_id + "'");
    by_id_[m.machine_id] = machines_.size();
    machines_.push_back(std::move(m));
}

const Machine& MachinePark::at(const std::string& machine_id) const {
    auto it = by_id_.find(machine_id);
    if (it == by_id_.end()) throw ReferenceError("unknown machine '" + machine_id + "'");
    return machines_[it->second];
}

bool MachinePark::contains(const std::string& machine_id) const {
    return by_id_.count(machine_id) > 0;
}

BeamMatch MachinePark::beam_match(const std::string& m1, const std::string& m2) const {
    const Machine& a = at(m1);
    const Machine& b = at(m2);
    if (a.linac_type != b.linac_type) return BeamMatch::none;
    return a.site_id == b.site_id ? BeamMatch::complete : BeamMatch::partial;
}

void MachinePark::add_block(const std::string& machine_id, Date date, Interval iv,
                            BlockKind kind) {
    at(machine_id); // existence check
    if (iv.end <= iv.begin) return;
    auto& store = kind == BlockKind::planned ? planned_ : failures_;
    auto& list = store[{machine_id, date}];
    if (std::find(list.begin(), list.end(), iv) != list.end()) return; // idempotent merge
    list.push_back(iv);
    list = merge_intervals(std::move(list));
}

std::vector<Interval> MachinePark::blocks(const std::string& machine_id, Date date) const {
    std::vector<Interval> out = blocks_of_kind(machine_id, date, BlockKind::planned);
    auto f = blocks_of_kind(machine_id, date, BlockKind::failure);
    out.insert(out.end(), f.begin(), f.end());
    return merge_intervals(std::move(out));
}

std::vector<Interval> MachinePark::blocks_of_kind(const std::string& machine_id, Date date,
                                                  BlockKind kind) const {
    const auto& store = kind == BlockKind::planned ? planned_ : failures_;
    auto it = store.find({machine_id, date});
    return it == store.end() ? std::vector<Interval>{} : it->second;
}

bool MachinePark::any_failure_between(Date a, Date b) const {
    for (const auto& [key, ivs] : failures_)
        if (key.second >= a && key.second <= b && !ivs.empty()) return true;
    return false;
}

int MachinePark::blocked_minutes(const std::string& machine_id, Date date) const {
    int total = 0;
    for (const Interval& iv : blocks(machine_id, date)) total += iv.length();
    return total;
}

std::vector<Date> MachinePark::blocked_dates() const {
    std::vector<Date> dates;
    for (const auto& [key, ivs] : planned_)
        if (!ivs.empty()) dates.push_back(key.second);
    for (const auto& [key, ivs] : failures_)
        if (!ivs.empty()) dates.push_back(key.second);
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
    return dates;
}

std::vector<Interval> merge_intervals(std::vector<Interval> ivs) {
    std::sort(ivs.begin(), ivs.end());
    std::vector<Interval> out;
    for (const Interval& iv : ivs) {
        if (!out.empty() && iv.begin <= out.back().end)
            out.back().end = std::max(out.back().end, iv.end);
        else
            out.push_back(iv);
    }
    return out;
}

} // namespace rtsched
