#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/date.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rtsched {

enum class Priority { A, B, C };

const char* to_string(Priority p);
Priority priority_from_string(const std::string& s);

// Day-pattern families a protocol may be delivered in. Spacing is the
// minimum number of working days between consecutive fractions.
enum class Pattern { daily, every_other_day, weekly };

const char* to_string(Pattern p);
Pattern pattern_from_string(const std::string& s);
int pattern_spacing(Pattern p); // 1 / 2 / 5 working days

// Scheduling rules for one cancer category.
struct TreatmentProtocol {
    std::string protocol_id;
    Priority priority = Priority::C;
    int min_fractions_per_week = 1;           // enforced on full Mon-Fri weeks
    int pre_treatment_days = 0;               // calendar days before first fraction
    std::vector<std::string> preferred_machines; // ordered by preference
    std::vector<std::string> allowed_machines;   // disjoint from preferred
    int first_fraction_duration = 20; // minutes
    int subsequent_fraction_duration = 12;
    int max_fractions_per_day = 1;
    std::optional<int> max_gap_between_fractions; // working days, absent = no cap
    std::vector<Pattern> allowed_patterns = {Pattern::daily};
    bool allow_partial_match_switch = true;

    // Synthetic-generator defaults (ignored by the engine itself).
    int gen_fractions_min = 1;
    int gen_fractions_max = 1;
    std::string gen_boost_protocol; // empty = generic boost

    void validate() const; // throws ConfigError

    bool machine_allowed(const std::string& machine) const;
    bool machine_preferred(const std::string& machine) const;
    int min_pattern_spacing() const;
    int fraction_duration(int fraction_index) const {
        return fraction_index == 1 ? first_fraction_duration : subsequent_fraction_duration;
    }
};

// One patient's treatment demand.
struct TreatmentCourse {
    std::string patient_id;
    std::string course_id;
    Date creation_date;
    std::string protocol_id;
    int n_fractions = 1;
    int duration_first = 0; // per-course durations override protocol defaults
    int duration_rest = 0;
    std::string site_preference;
    std::optional<std::string> follows_course;
    bool exclusion_flag = false; // excluded from metric aggregation

    int fraction_duration(int fraction_index) const {
        return fraction_index == 1 ? duration_first : duration_rest;
    }
};

// AM/PM treatment-time preference. Preferences were not part of the
// arrival record at the clinic, so they are derived deterministically
// from the patient id (share and AM split configurable).
enum class WindowPreference { none, am, pm };

struct PreferenceModel {
    double with_preference_share = 0.80;
    double am_share = 0.65;
    WindowPreference of(const std::string& patient_id) const;
};

class ProtocolTable {
public:
    void add(TreatmentProtocol p);
    // Case-insensitive name lookup; throws ReferenceError when unknown.
    const TreatmentProtocol& by_name(const std::string& name) const;
    const TreatmentProtocol* find(const std::string& name) const;
    const std::vector<TreatmentProtocol>& all() const { return protocols_; }

private:
    std::vector<TreatmentProtocol> protocols_;
    std::map<std::string, size_t> by_lower_name_;
};

class CourseTable {
public:
    void add(TreatmentCourse c); // throws ConfigError on duplicate/invalid chain
    const TreatmentCourse& at(const std::string& course_id) const;
    const TreatmentCourse* find(const std::string& course_id) const;
    bool contains(const std::string& course_id) const { return find(course_id) != nullptr; }
    const std::vector<TreatmentCourse>& all() const { return courses_; }
    std::vector<const TreatmentCourse*> arrivals_on(Date d) const;

private:
    std::vector<TreatmentCourse> courses_;
    std::map<std::string, size_t> by_id_;
    std::map<Date, std::vector<size_t>> by_date_;
};

// --- model operations ---------------------------------------------------

// Earliest date the first fraction may be delivered, ignoring capacity:
// creation + pre-treatment calendar days rolled to a working day. The
// predecessor rule for chained courses lives in the scheduler, where the
// predecessor's last fraction is known.
Date earliest_start(const TreatmentCourse& course, const TreatmentProtocol& protocol,
                    const WorkingCalendar& cal);

// As above but honouring a chained predecessor's last scheduled fraction.
Date earliest_start_after(const TreatmentCourse& course, const TreatmentProtocol& protocol,
                          const WorkingCalendar& cal,
                          std::optional<Date> predecessor_last_fraction);

// Minimum working days from first to last fraction inclusive, on the
// densest pattern with fully available machines. Baseline for excess time.
int min_span(const TreatmentProtocol& protocol, int n_fractions);

} // namespace rtsched
