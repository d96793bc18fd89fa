#include "rtsched/metrics.hpp"

#include "rtsched/csv.hpp"
#include "rtsched/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rtsched {

using nlohmann::json;

namespace {

std::optional<Date> predecessor_last_of(const TreatmentCourse& course, const CourseTable& courses,
                                        const Schedule& schedule) {
    if (!course.follows_course) return std::nullopt;
    if (!courses.contains(*course.follows_course)) return std::nullopt;
    return schedule.last_fraction_date(*course.follows_course);
}

} // namespace

int waiting_time(const TreatmentCourse& course, const TreatmentProtocol& protocol,
                 const Schedule& schedule, const WorkingCalendar& cal,
                 std::optional<Date> predecessor_last) {
    auto first = schedule.first_fraction_date(course.course_id);
    if (!first) throw UndefinedMetricError("waiting_time: course " + course.course_id + " unscheduled");
    const Date earliest = earliest_start_after(course, protocol, cal, predecessor_last);
    return cal.working_days_between(earliest, *first);
}

int window_switches(const TreatmentCourse& course, const Schedule& schedule) {
    auto appts = schedule.course_appointments(course.course_id);
    int switches = 0;
    for (size_t i = 1; i < appts.size(); ++i)
        if (appts[i]->window != appts[i - 1]->window) ++switches;
    return switches;
}

MachinePrefCost machine_pref_cost(const TreatmentCourse& course, const Schedule& schedule,
                                  const TreatmentProtocol& protocol, const MachinePark& park) {
    MachinePrefCost cost;
    auto appts = schedule.course_appointments(course.course_id);
    for (size_t i = 0; i < appts.size(); ++i) {
        const Appointment& a = *appts[i];
        if (!protocol.machine_preferred(a.machine)) ++cost.non_preferred;
        if (park.at(a.machine).site_id != course.site_preference) ++cost.off_site;
        if (i > 0 && appts[i - 1]->machine != a.machine &&
            park.beam_match(appts[i - 1]->machine, a.machine) == BeamMatch::partial)
            ++cost.partial_switches;
    }
    return cost;
}

int excess_days(const TreatmentCourse& course, const Schedule& schedule,
                const TreatmentProtocol& protocol, const WorkingCalendar& cal) {
    auto appts = schedule.course_appointments(course.course_id);
    if (static_cast<int>(appts.size()) != course.n_fractions)
        throw UndefinedMetricError("excess_days: course " + course.course_id +
                                   " not fully scheduled");
    const int span = cal.working_days_inclusive(appts.front()->date, appts.back()->date);
    return span - min_span(protocol, course.n_fractions);
}

int off_window_fractions(const TreatmentCourse& course, const Schedule& schedule,
                         const CalendarConfig& cal, WindowPreference pref) {
    if (pref == WindowPreference::none) return 0;
    int off = 0;
    for (const Appointment* a : schedule.course_appointments(course.course_id)) {
        if (a->start < 0) continue;
        const bool am = cal.is_am(a->start);
        if ((pref == WindowPreference::am) != am) ++off;
    }
    return off;
}

double occupancy(const std::string& machine, Date from, Date to, const Schedule& schedule,
                 const MachinePark& park, const WorkingCalendar& cal) {
    park.at(machine);
    long booked = 0, available = 0;
    for (Date d = from; d <= to; ++d) {
        if (!cal.is_working_day(d)) continue;
        const int avail = cal.config().operating_minutes() - park.blocked_minutes(machine, d);
        if (avail <= 0) continue; // fully blocked days don't count on either side
        available += avail;
        for (const Appointment* a : schedule.day_appointments(machine, d)) booked += a->duration;
    }
    if (available == 0)
        throw UndefinedMetricError("occupancy: machine " + machine +
                                   " has no available minutes in range");
    return static_cast<double>(booked) / static_cast<double>(available);
}

CourseMetrics course_metrics(const TreatmentCourse& course, const TreatmentProtocol& protocol,
                             const Schedule& schedule, const MachinePark& park,
                             const WorkingCalendar& cal, const PreferenceModel& prefs,
                             std::optional<Date> predecessor_last) {
    CourseMetrics m;
    m.course_id = course.course_id;
    m.priority = protocol.priority;
    m.waiting_days = waiting_time(course, protocol, schedule, cal, predecessor_last);
    const Date earliest = earliest_start_after(course, protocol, cal, predecessor_last);
    m.waiting_calendar_days = *schedule.first_fraction_date(course.course_id) - earliest;
    m.window_switches = window_switches(course, schedule);
    m.off_window_fractions = off_window_fractions(course, schedule, cal.config(),
                                                  prefs.of(course.patient_id));
    const MachinePrefCost pc = machine_pref_cost(course, schedule, protocol, park);
    m.non_preferred_fractions = pc.non_preferred;
    m.partial_switches = pc.partial_switches;
    m.off_site_fractions = pc.off_site;
    m.excess_days = excess_days(course, schedule, protocol, cal);

    auto appts = schedule.course_appointments(course.course_id);
    double sum = 0, sq = 0;
    int n = 0;
    for (const Appointment* a : appts)
        if (a->start >= 0) {
            sum += a->start;
            sq += static_cast<double>(a->start) * a->start;
            ++n;
        }
    if (n > 1) {
        const double mean = sum / n;
        m.start_time_stddev = std::sqrt(std::max(0.0, sq / n - mean * mean));
    }
    return m;
}

double trimmed_mean(std::vector<double> values, double trim) {
    if (values.empty()) return 0.0;
    const int k = static_cast<int>(std::floor(trim * static_cast<double>(values.size()) + 1e-12));
    std::sort(values.begin(), values.end());
    const int keep = static_cast<int>(values.size()) - k;
    double sum = 0;
    for (int i = 0; i < keep; ++i) sum += values[static_cast<size_t>(i)];
    return keep > 0 ? sum / keep : 0.0;
}

namespace {

MetricStats stats_of(const std::vector<double>& values, double trim) {
    MetricStats s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0, mx = values[0];
    for (double v : values) {
        sum += v;
        mx = std::max(mx, v);
    }
    s.mean = sum / static_cast<double>(values.size());
    s.max = mx;
    s.trimmed_mean = trimmed_mean(values, trim);
    return s;
}

json stats_to_json(const MetricStats& s) {
    return json{{"count", s.count}, {"mean", s.mean}, {"max", s.max},
                {"trimmed_mean", s.trimmed_mean}};
}

} // namespace

std::vector<CourseMetrics> collect_course_metrics(const CourseTable& courses,
                                                  const ProtocolTable& protocols,
                                                  const Schedule& schedule,
                                                  const MachinePark& park,
                                                  const WorkingCalendar& cal,
                                                  const PreferenceModel& prefs,
                                                  std::optional<Date> from) {
    std::vector<CourseMetrics> rows;
    for (const TreatmentCourse& c : courses.all()) {
        if (c.exclusion_flag) continue;
        if (from && c.creation_date < *from) continue;
        auto appts = schedule.course_appointments(c.course_id);
        if (static_cast<int>(appts.size()) != c.n_fractions) continue; // not fully scheduled
        const TreatmentProtocol& proto = protocols.by_name(c.protocol_id);
        rows.push_back(course_metrics(c, proto, schedule, park, cal, prefs,
                                      predecessor_last_of(c, courses, schedule)));
    }
    return rows;
}

QualityReport aggregate_report(const CourseTable& courses, const ProtocolTable& protocols,
                               const Schedule& schedule, const MachinePark& park,
                               const WorkingCalendar& cal, const PreferenceModel& prefs,
                               double trim, std::optional<Date> from, Date occupancy_from,
                               Date occupancy_to) {
    if (trim < 0.0 || trim >= 0.5) throw ConfigError("trim must lie in [0, 0.5)");
    QualityReport report;
    report.trim = trim;

    std::map<Priority, std::map<std::string, std::vector<double>>> values;
    for (const TreatmentCourse& c : courses.all()) {
        if (c.exclusion_flag) {
            ++report.excluded_courses;
            continue;
        }
        if (from && c.creation_date < *from) continue;
        auto appts = schedule.course_appointments(c.course_id);
        if (static_cast<int>(appts.size()) != c.n_fractions) {
            ++report.unscheduled_courses;
            continue;
        }
        const TreatmentProtocol& proto = protocols.by_name(c.protocol_id);
        const CourseMetrics m = course_metrics(c, proto, schedule, park, cal, prefs,
                                               predecessor_last_of(c, courses, schedule));
        ++report.scheduled_courses;
        auto& v = values[proto.priority];
        v["waiting"].push_back(m.waiting_days);
        v["waiting_calendar"].push_back(m.waiting_calendar_days);
        v["window_switches"].push_back(m.window_switches);
        v["off_window"].push_back(m.off_window_fractions);
        v["non_preferred"].push_back(m.non_preferred_fractions);
        v["partial_switches"].push_back(m.partial_switches);
        v["off_site"].push_back(m.off_site_fractions);
        v["excess"].push_back(m.excess_days);
    }
    for (const auto& [prio, metric_values] : values) {
        PriorityBlock block;
        block.courses = static_cast<int>(metric_values.at("waiting").size());
        block.waiting = stats_of(metric_values.at("waiting"), trim);
        block.waiting_calendar = stats_of(metric_values.at("waiting_calendar"), trim);
        block.window_switches = stats_of(metric_values.at("window_switches"), trim);
        block.off_window = stats_of(metric_values.at("off_window"), trim);
        block.non_preferred = stats_of(metric_values.at("non_preferred"), trim);
        block.partial_switches = stats_of(metric_values.at("partial_switches"), trim);
        block.off_site = stats_of(metric_values.at("off_site"), trim);
        block.excess = stats_of(metric_values.at("excess"), trim);
        report.by_priority[prio] = block;
    }

    long booked_total = 0, available_total = 0;
    for (const Machine& m : park.machines()) {
        long booked = 0, available = 0;
        for (Date d = occupancy_from; d <= occupancy_to; ++d) {
            if (!cal.is_working_day(d)) continue;
            const int avail =
                cal.config().operating_minutes() - park.blocked_minutes(m.machine_id, d);
            if (avail <= 0) continue;
            available += avail;
            for (const Appointment* a : schedule.day_appointments(m.machine_id, d))
                booked += a->duration;
        }
        if (available > 0)
            report.machine_occupancy[m.machine_id] =
                static_cast<double>(booked) / static_cast<double>(available);
        booked_total += booked;
        available_total += available;
    }
    report.overall_occupancy =
        available_total > 0 ? static_cast<double>(booked_total) / available_total : 0.0;
    return report;
}

json report_to_json(const QualityReport& report) {
    json by_priority = json::object();
    for (const auto& [prio, block] : report.by_priority) {
        by_priority[to_string(prio)] = json{{"courses", block.courses},
                                            {"waiting", stats_to_json(block.waiting)},
                                            {"waiting_calendar", stats_to_json(block.waiting_calendar)},
                                            {"window_switches", stats_to_json(block.window_switches)},
                                            {"off_window", stats_to_json(block.off_window)},
                                            {"non_preferred", stats_to_json(block.non_preferred)},
                                            {"partial_switches", stats_to_json(block.partial_switches)},
                                            {"off_site", stats_to_json(block.off_site)},
                                            {"excess", stats_to_json(block.excess)}};
    }
    json occ = json::object();
    for (const auto& [m, v] : report.machine_occupancy) occ[m] = v;
    return json{{"trim", report.trim},
                {"by_priority", by_priority},
                {"machine_occupancy", occ},
                {"overall_occupancy", report.overall_occupancy},
                {"scheduled_courses", report.scheduled_courses},
                {"unscheduled_courses", report.unscheduled_courses},
                {"excluded_courses", report.excluded_courses}};
}

std::string course_metrics_csv(const std::vector<CourseMetrics>& rows) {
    std::ostringstream out;
    out << "# course,priority,waiting_days,waiting_calendar_days,window_switches,"
           "off_window_fractions,non_preferred_fractions,partial_switches,off_site_fractions,"
           "excess_days,start_time_stddev\n";
    for (const CourseMetrics& m : rows) {
        std::ostringstream sd;
        sd.precision(2);
        sd << std::fixed << m.start_time_stddev;
        out << join_csv({m.course_id, to_string(m.priority), std::to_string(m.waiting_days),
                         std::to_string(m.waiting_calendar_days),
                         std::to_string(m.window_switches),
                         std::to_string(m.off_window_fractions),
                         std::to_string(m.non_preferred_fractions),
                         std::to_string(m.partial_switches),
                         std::to_string(m.off_site_fractions), std::to_string(m.excess_days),
                         sd.str()})
            << '\n';
    }
    return out.str();
}

std::string metrics_long_csv(const std::vector<CourseMetrics>& rows) {
    std::ostringstream out;
    out << "# course,priority,metric,value\n";
    for (const CourseMetrics& m : rows) {
        auto emit = [&](const char* name, double v) {
            out << m.course_id << ',' << to_string(m.priority) << ',' << name << ',' << v << '\n';
        };
        emit("waiting", m.waiting_days);
        emit("window_switches", m.window_switches);
        emit("off_window", m.off_window_fractions);
        emit("non_preferred", m.non_preferred_fractions);
        emit("partial_switches", m.partial_switches);
        emit("off_site", m.off_site_fractions);
        emit("excess", m.excess_days);
    }
    return out.str();
}

std::string occupancy_csv(const Schedule& schedule, const MachinePark& park,
                          const WorkingCalendar& cal, Date from, Date to) {
    std::ostringstream out;
    out << "# machine,date,booked_minutes,available_minutes\n";
    for (const Machine& m : park.machines()) {
        for (Date d = from; d <= to; ++d) {
            if (!cal.is_working_day(d)) continue;
            const int avail =
                cal.config().operating_minutes() - park.blocked_minutes(m.machine_id, d);
            int booked = 0;
            for (const Appointment* a : schedule.day_appointments(m.machine_id, d))
                booked += a->duration;
            if (avail <= 0 && booked == 0) continue; // unavailable machine dates left blank
            out << join_csv({m.machine_id, d.iso(), std::to_string(booked),
                             std::to_string(std::max(avail, 0))})
                << '\n';
        }
    }
    return out.str();
}

} // namespace rtsched
