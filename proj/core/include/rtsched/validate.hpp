#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"
#include "rtsched/schedule.hpp"

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace rtsched {

enum class Severity { error, warning };

const char* to_string(Severity s);

// Check identifiers, stable across reports:
//   patient checks: fraction_count, start_day, consecutive_start,
//     working_day, max_fractions_per_day, six_hour_gap,
//     min_fractions_per_week, max_gap, machine_allowed, beam_match, pattern
//   machine checks: double_booking, unavailability, capacity,
//     machine_allowed (shared id with the patient-side check)
struct Violation {
    std::string check;
    Severity severity = Severity::error;
    std::string subject; // course id or machine id
    Date date;
    std::string detail;

    auto key() const { return std::tie(check, subject, date, detail); }
};

// Exhaustive audit of one course's schedule against its protocol.
// Findings are data, not failures. Shortfalls in weekly minimums or gap
// caps demote to warnings when a machine failure within the affected span
// explains the displacement.
std::vector<Violation> validate_patient(const TreatmentCourse& course,
                                        const TreatmentProtocol& protocol,
                                        const Schedule& schedule, const CourseTable& courses,
                                        const MachinePark& park, const WorkingCalendar& cal);

// Machine-side audit: double bookings, bookings inside blocked time or
// outside the operating window, protocol-machine mismatches, capacity.
std::vector<Violation> validate_machine(const std::string& machine, Date from, Date to,
                                        const Schedule& schedule, const CourseTable& courses,
                                        const ProtocolTable& protocols, const MachinePark& park,
                                        const WorkingCalendar& cal);

struct ValidationReport {
    std::vector<Violation> violations; // deduplicated union of both audits
    std::map<std::string, int> errors_by_check;
    std::map<std::string, int> warnings_by_check;
    int n_errors = 0;
    int n_warnings = 0;
};

ValidationReport validate_all(const Schedule& schedule, const CourseTable& courses,
                              const ProtocolTable& protocols, const MachinePark& park,
                              const WorkingCalendar& cal);

std::string violations_csv(const std::vector<Violation>& violations);
nlohmann::json validation_report_to_json(const ValidationReport& report);

} // namespace rtsched
