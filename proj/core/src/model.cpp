#include "rtsched/model.hpp"

#include "rtsched/errors.hpp"

#include <algorithm>
#include <cctype>

namespace rtsched {

namespace {
std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}
} // namespace

const char* to_string(Priority p) {
    switch (p) {
    case Priority::A: return "A";
    case Priority::B: return "B";
    case Priority::C: return "C";
    }
    return "?";
}

Priority priority_from_string(const std::string& s) {
    if (s == "A" || s == "a") return Priority::A;
    if (s == "B" || s == "b") return Priority::B;
    if (s == "C" || s == "c") return Priority::C;
    throw ParseError("unknown priority '" + s + "'");
}

const char* to_string(Pattern p) {
    switch (p) {
    case Pattern::daily: return "daily";
    case Pattern::every_other_day: return "every_other_day";
    case Pattern::weekly: return "weekly";
    }
    return "?";
}

Pattern pattern_from_string(const std::string& s) {
    if (s == "daily") return Pattern::daily;
    if (s == "every_other_day") return Pattern::every_other_day;
    if (s == "weekly") return Pattern::weekly;
    throw ParseError("unknown pattern '" + s + "'");
}

int pattern_spacing(Pattern p) {
    switch (p) {
    case Pattern::daily: return 1;
    case Pattern::every_other_day: return 2;
    case Pattern::weekly: return 5;
    }
    return 1;
}

void TreatmentProtocol::validate() const {
    if (protocol_id.empty()) throw ConfigError("protocol id is empty");
    if (preferred_machines.empty() && allowed_machines.empty())
        throw ConfigError(protocol_id + ": machine sets are empty");
    for (const auto& m : preferred_machines)
        if (std::find(allowed_machines.begin(), allowed_machines.end(), m) !=
            allowed_machines.end())
            throw ConfigError(protocol_id + ": machine " + m + " is both preferred and allowed");
    if (min_fractions_per_week < 1 || min_fractions_per_week > 5)
        throw ConfigError(protocol_id + ": min_fractions_per_week out of [1,5]");
    if (pre_treatment_days < 0) throw ConfigError(protocol_id + ": negative pre-treatment");
    if (first_fraction_duration <= 0 || subsequent_fraction_duration <= 0)
        throw ConfigError(protocol_id + ": durations must be positive");
    if (max_fractions_per_day < 1)
        throw ConfigError(protocol_id + ": max_fractions_per_day must be >= 1");
    if (allowed_patterns.empty()) throw ConfigError(protocol_id + ": no allowed pattern");
    if (max_gap_between_fractions && *max_gap_between_fractions < 1)
        throw ConfigError(protocol_id + ": max gap must be >= 1 working day");
    if (gen_fractions_min < 1 || gen_fractions_max < gen_fractions_min)
        throw ConfigError(protocol_id + ": bad generator fraction range");
}

bool TreatmentProtocol::machine_allowed(const std::string& machine) const {
    return machine_preferred(machine) ||
           std::find(allowed_machines.begin(), allowed_machines.end(), machine) !=
               allowed_machines.end();
}

bool TreatmentProtocol::machine_preferred(const std::string& machine) const {
    return std::find(preferred_machines.begin(), preferred_machines.end(), machine) !=
           preferred_machines.end();
}

int TreatmentProtocol::min_pattern_spacing() const {
    int s = pattern_spacing(allowed_patterns.front());
    for (Pattern p : allowed_patterns) s = std::min(s, pattern_spacing(p));
    return s;
}

WindowPreference PreferenceModel::of(const std::string& patient_id) const {
    // FNV-1a over the id; stable across runs and platforms.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : patient_id) {
        h ^= c;
        h *= 1099511628211ull;
    }
    const double u = static_cast<double>(h % 10000) / 10000.0;
    if (u >= with_preference_share) return WindowPreference::none;
    const double v = static_cast<double>((h / 10000) % 10000) / 10000.0;
    return v < am_share ? WindowPreference::am : WindowPreference::pm;
}

void ProtocolTable::add(TreatmentProtocol p) {
    p.validate();
    const std::string key = lower(p.protocol_id);
    if (by_lower_name_.count(key))
        throw ConfigError("duplicate protocol '" + p.protocol_id + "'");
    by_lower_name_[key] = protocols_.size();
    protocols_.push_back(std::move(p));
}

const TreatmentProtocol& ProtocolTable::by_name(const std::string& name) const {
    const TreatmentProtocol* p = find(name);
    if (!p) throw ReferenceError("unknown protocol '" + name + "'");
    return *p;
}

const TreatmentProtocol* ProtocolTable::find(const std::string& name) const {
    auto it = by_lower_name_.find(lower(name));
    return it == by_lower_name_.end() ? nullptr : &protocols_[it->second];
}

void CourseTable::add(TreatmentCourse c) {
    if (c.n_fractions < 1) throw ConfigError(c.course_id + ": n_fractions must be >= 1");
    if (c.duration_first <= 0 || c.duration_rest <= 0)
        throw ConfigError(c.course_id + ": durations must be positive");
    if (by_id_.count(c.course_id)) throw ConfigError("duplicate course '" + c.course_id + "'");
    if (c.follows_course) {
        if (*c.follows_course == c.course_id)
            throw ConfigError(c.course_id + ": course follows itself");
        const TreatmentCourse* prev = find(*c.follows_course);
        if (!prev)
            throw ReferenceError(c.course_id + ": follows unknown course '" + *c.follows_course +
                                 "'");
        if (prev->patient_id != c.patient_id)
            throw ConfigError(c.course_id + ": chained course belongs to another patient");
    }
    by_id_[c.course_id] = courses_.size();
    by_date_[c.creation_date].push_back(courses_.size());
    courses_.push_back(std::move(c));
}

const TreatmentCourse& CourseTable::at(const std::string& course_id) const {
    const TreatmentCourse* c = find(course_id);
    if (!c) throw ReferenceError("unknown course '" + course_id + "'");
    return *c;
}

const TreatmentCourse* CourseTable::find(const std::string& course_id) const {
    auto it = by_id_.find(course_id);
    return it == by_id_.end() ? nullptr : &courses_[it->second];
}

std::vector<const TreatmentCourse*> CourseTable::arrivals_on(Date d) const {
    std::vector<const TreatmentCourse*> out;
    auto it = by_date_.find(d);
    if (it == by_date_.end()) return out;
    for (size_t i : it->second) out.push_back(&courses_[i]);
    return out;
}

Date earliest_start(const TreatmentCourse& course, const TreatmentProtocol& protocol,
                    const WorkingCalendar& cal) {
    return cal.next_working_day(course.creation_date + protocol.pre_treatment_days);
}

Date earliest_start_after(const TreatmentCourse& course, const TreatmentProtocol& protocol,
                          const WorkingCalendar& cal,
                          std::optional<Date> predecessor_last_fraction) {
    Date d = earliest_start(course, protocol, cal);
    if (predecessor_last_fraction) {
        const Date after = cal.next_working_day(*predecessor_last_fraction + 1);
        if (after > d) d = after;
    }
    return d;
}

int min_span(const TreatmentProtocol& protocol, int n_fractions) {
    // Densest allowed delivery is one treatment day per max_fractions_per_day
    // fractions, on consecutive working days.
    return (n_fractions + protocol.max_fractions_per_day - 1) / protocol.max_fractions_per_day;
}

} // namespace rtsched
