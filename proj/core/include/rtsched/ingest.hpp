#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rtsched {

// One row of the arrival file. Per-course durations are authoritative;
// protocol durations are generator defaults only.
struct ArrivalRecord {
    std::string patient_id;
    std::string course_id;
    Date creation_date;
    std::string protocol_name;
    int n_fractions = 1;
    int duration_first = 0;
    int duration_rest = 0;
    std::string site_pref;
    std::optional<std::string> follows_course;
};

// Parses the arrival CSV. Records come back ordered by creation date then
// file order; protocol names must resolve (case-insensitive) and chained
// references must appear earlier in the file or in `known_courses`.
std::vector<ArrivalRecord> parse_arrivals(const std::string& path, const ProtocolTable& protocols,
                                          const std::set<std::string>& known_courses = {});
std::vector<ArrivalRecord> parse_arrivals_text(const std::string& content,
                                               const std::string& origin,
                                               const ProtocolTable& protocols,
                                               const std::set<std::string>& known_courses = {});

// Canonical serialization; parse(emit(x)) == x. Dates ISO-8601.
std::string emit_arrivals(const std::vector<ArrivalRecord>& records);

CourseTable build_course_table(const std::vector<ArrivalRecord>& records,
                               const std::set<std::string>& exclusions = {});

// One course id per line; '#' comments allowed.
std::set<std::string> load_exclusions(const std::string& path);

// A machine failure revealed on the morning of its date.
struct FailureEvent {
    std::string machine;
    Date date;
    Interval interval;
};

struct CalendarParseResult {
    std::vector<FailureEvent> failures; // file order within a date, dates ascending
    std::vector<std::string> warnings;  // e.g. intervals clipped to the operating window
};

// Loads the unavailability calendar (machine, date, interval|FULL_DAY,
// planned|failure). Planned rows go straight into the park. Failure rows
// are returned as events; when apply_failures_to_park is set they are also
// recorded in the park (post-hoc audits), otherwise the replay feeds them
// in on the morning of each day.
CalendarParseResult parse_calendar(const std::string& path, const CalendarConfig& cal,
                                   MachinePark& park, bool apply_failures_to_park);
CalendarParseResult parse_calendar_text(const std::string& content, const std::string& origin,
                                        const CalendarConfig& cal, MachinePark& park,
                                        bool apply_failures_to_park);

std::string emit_calendar(const MachinePark& park, const std::vector<FailureEvent>& failures);

} // namespace rtsched
