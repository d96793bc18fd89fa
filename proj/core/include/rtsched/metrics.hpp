#pragma once

#include "rtsched/calendar.hpp"
#include "rtsched/model.hpp"
#include "rtsched/park.hpp"
#include "rtsched/schedule.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rtsched {

// Working days from the earliest allowed start to the first fraction.
// `predecessor_last` carries the chained predecessor's final fraction date
// when the course has one. Throws UndefinedMetricError on unscheduled courses.
int waiting_time(const TreatmentCourse& course, const TreatmentProtocol& protocol,
                 const Schedule& schedule, const WorkingCalendar& cal,
                 std::optional<Date> predecessor_last = std::nullopt);

// Count of consecutive fraction pairs whose time window differs.
int window_switches(const TreatmentCourse& course, const Schedule& schedule);

struct MachinePrefCost {
    int non_preferred = 0;   // fractions on allowed-but-not-preferred machines
    int partial_switches = 0; // consecutive-fraction switches across sites
    int off_site = 0;        // fractions away from the patient's preferred site
};

MachinePrefCost machine_pref_cost(const TreatmentCourse& course, const Schedule& schedule,
                                  const TreatmentProtocol& protocol, const MachinePark& park);

// Working days first..last inclusive minus the protocol's minimal span.
// Throws UndefinedMetricError unless the course is fully scheduled.
int excess_days(const TreatmentCourse& course, const Schedule& schedule,
                const TreatmentProtocol& protocol, const WorkingCalendar& cal);

// Fractions delivered on the wrong side of noon for patients with a
// time-window preference; 0 for indifferent patients.
int off_window_fractions(const TreatmentCourse& course, const Schedule& schedule,
                         const CalendarConfig& cal, WindowPreference pref);

// Booked / available minutes over working days where the machine has any
// availability. Throws UndefinedMetricError when nothing was available.
double occupancy(const std::string& machine, Date from, Date to, const Schedule& schedule,
                 const MachinePark& park, const WorkingCalendar& cal);

struct CourseMetrics {
    std::string course_id;
    Priority priority = Priority::C;
    int waiting_days = 0;
    int waiting_calendar_days = 0;
    int window_switches = 0;
    int off_window_fractions = 0;
    int non_preferred_fractions = 0;
    int partial_switches = 0;
    int off_site_fractions = 0;
    int excess_days = 0;
    double start_time_stddev = 0.0; // auxiliary, not part of the objective
};

CourseMetrics course_metrics(const TreatmentCourse& course, const TreatmentProtocol& protocol,
                             const Schedule& schedule, const MachinePark& park,
                             const WorkingCalendar& cal, const PreferenceModel& prefs,
                             std::optional<Date> predecessor_last = std::nullopt);

struct MetricStats {
    int count = 0;
    double mean = 0.0;
    double max = 0.0;
    double trimmed_mean = 0.0; // top trim-quantile removed
};

struct PriorityBlock {
    int courses = 0;
    MetricStats waiting, waiting_calendar, window_switches, off_window, non_preferred,
        partial_switches, off_site, excess;
};

struct QualityReport {
    double trim = 0.0;
    std::map<Priority, PriorityBlock> by_priority; // empty groups absent
    std::map<std::string, double> machine_occupancy;
    double overall_occupancy = 0.0;
    int scheduled_courses = 0;
    int unscheduled_courses = 0;
    int excluded_courses = 0;
};

// Per-priority aggregates over fully scheduled, non-excluded courses whose
// creation date is >= from (when set). Occupancy is measured over
// [occupancy_from, occupancy_to].
QualityReport aggregate_report(const CourseTable& courses, const ProtocolTable& protocols,
                               const Schedule& schedule, const MachinePark& park,
                               const WorkingCalendar& cal, const PreferenceModel& prefs,
                               double trim, std::optional<Date> from, Date occupancy_from,
                               Date occupancy_to);

// Mean with the k = floor(trim*n) largest values removed.
double trimmed_mean(std::vector<double> values, double trim);

nlohmann::json report_to_json(const QualityReport& report);

// Raw per-course metric rows (CSV) and the long format used for plotting.
std::string course_metrics_csv(const std::vector<CourseMetrics>& rows);
std::string metrics_long_csv(const std::vector<CourseMetrics>& rows);
std::string occupancy_csv(const Schedule& schedule, const MachinePark& park,
                          const WorkingCalendar& cal, Date from, Date to);

std::vector<CourseMetrics> collect_course_metrics(const CourseTable& courses,
                                                  const ProtocolTable& protocols,
                                                  const Schedule& schedule,
                                                  const MachinePark& park,
                                                  const WorkingCalendar& cal,
                                                  const PreferenceModel& prefs,
                                                  std::optional<Date> from);

} // namespace rtsched
