#include "rtsched/validate.hpp"

#include "rtsched/csv.hpp"
#include "rtsched/errors.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rtsched {

const char* to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

namespace {

constexpr int kSixHours = 6 * 60;

Date monday_of_week_on_or_after(Date d) { return d + ((7 - d.weekday()) % 7); }

void add(std::vector<Violation>& out, std::string check, Severity sev, std::string subject,
         Date date, std::string detail) {
    out.push_back({std::move(check), sev, std::move(subject), date, std::move(detail)});
}

} // namespace

std::vector<Violation> validate_patient(const TreatmentCourse& course,
                                        const TreatmentProtocol& protocol,
                                        const Schedule& schedule, const CourseTable& courses,
                                        const MachinePark& park, const WorkingCalendar& cal) {
    std::vector<Violation> out;
    const std::string& id = course.course_id;
    const auto appts = schedule.course_appointments(id);
    if (appts.empty()) return out;

    // fraction_count: every index 1..n exactly once.
    if (static_cast<int>(appts.size()) != course.n_fractions) {
        add(out, "fraction_count", Severity::error, id, appts.front()->date,
            "scheduled " + std::to_string(appts.size()) + " of " +
                std::to_string(course.n_fractions) + " fractions");
    } else {
        std::set<int> indices;
        for (const Appointment* a : appts) indices.insert(a->fraction);
        if (static_cast<int>(indices.size()) != course.n_fractions ||
            *indices.begin() != 1 || *indices.rbegin() != course.n_fractions)
            add(out, "fraction_count", Severity::error, id, appts.front()->date,
                "fraction indices are not 1.." + std::to_string(course.n_fractions));
    }

    // start_day: first fraction before the earliest allowed start.
    std::optional<Date> pred_last;
    if (course.follows_course && courses.contains(*course.follows_course))
        pred_last = schedule.last_fraction_date(*course.follows_course);
    const Date earliest_pre = earliest_start(course, protocol, cal);
    if (appts.front()->date < earliest_pre)
        add(out, "start_day", Severity::error, id, appts.front()->date,
            "first fraction before earliest allowed start " + earliest_pre.iso() +
                " (pre-treatment " + std::to_string(protocol.pre_treatment_days) + "d)");

    // consecutive_start: secondary course must start after the primary ends.
    if (course.follows_course && pred_last && appts.front()->date <= *pred_last)
        add(out, "consecutive_start", Severity::error, id, appts.front()->date,
            "starts before predecessor " + *course.follows_course + " ends (" +
                pred_last->iso() + ")");

    // working_day: treatments only on working days.
    for (const Appointment* a : appts)
        if (!cal.is_working_day(a->date))
            add(out, "working_day", Severity::error, id, a->date,
                "fraction " + std::to_string(a->fraction) + " on a closed day");

    // Per-day census.
    std::map<Date, std::vector<const Appointment*>> by_day;
    for (const Appointment* a : appts) by_day[a->date].push_back(a);
    const int day_cap = std::max(protocol.max_fractions_per_day, 2); // doubling is a legal repair
    for (const auto& [date, list] : by_day) {
        if (static_cast<int>(list.size()) > day_cap) {
            add(out, "max_fractions_per_day", Severity::error, id, date,
                std::to_string(list.size()) + " fractions on one day (cap " +
                    std::to_string(day_cap) + ")");
            continue; // six-hour check only applies within the cap
        }
        for (size_t i = 1; i < list.size(); ++i) {
            const int gap = list[i]->start - list[i - 1]->start;
            if (list[i]->start >= 0 && list[i - 1]->start >= 0 && gap < kSixHours)
                add(out, "six_hour_gap", Severity::error, id, date,
                    "same-day fractions only " + std::to_string(gap) + " min apart");
        }
    }

    // min_fractions_per_week on full Mon-Fri weeks inside the span. A
    // machine failure in the week explains a shortfall (repairs displace
    // fractions), so those demote to warnings.
    const Date first = appts.front()->date;
    const Date last = appts.back()->date;
    for (Date mon = monday_of_week_on_or_after(first); mon + 4 <= last; mon = mon + 7) {
        int working = 0;
        for (int i = 0; i < 5; ++i)
            if (cal.is_working_day(mon + i)) ++working;
        const int required = std::min(protocol.min_fractions_per_week, working);
        int count = 0;
        for (const Appointment* a : appts)
            if (a->date >= mon && a->date <= mon + 4) ++count;
        if (count < required) {
            const Severity sev = park.any_failure_between(mon, mon + 4) ? Severity::warning
                                                                        : Severity::error;
            add(out, "min_fractions_per_week", sev, id, mon,
                std::to_string(count) + " fractions in week of " + mon.iso() + ", minimum " +
                    std::to_string(required));
        }
    }

    // max_gap / pattern: gaps between consecutive treatment days.
    const int min_spacing = protocol.min_pattern_spacing();
    std::vector<Date> days;
    for (const auto& [date, list] : by_day) days.push_back(date);
    for (size_t i = 1; i < days.size(); ++i) {
        if (!cal.is_working_day(days[i - 1]) || !cal.is_working_day(days[i]))
            continue; // already flagged as working_day
        const int gap = cal.working_days_between(days[i - 1], days[i]);
        if (protocol.max_gap_between_fractions && gap > *protocol.max_gap_between_fractions) {
            const Severity sev = park.any_failure_between(days[i - 1], days[i])
                                     ? Severity::warning
                                     : Severity::error;
            add(out, "max_gap", sev, id, days[i],
                "gap of " + std::to_string(gap) + " working days exceeds cap " +
                    std::to_string(*protocol.max_gap_between_fractions));
        }
        if (gap < min_spacing)
            add(out, "pattern", Severity::error, id, days[i],
                "gap of " + std::to_string(gap) + " working days under the densest allowed "
                "pattern spacing " + std::to_string(min_spacing));
    }

    // machine_allowed and beam_match along the chronological sequence.
    for (const Appointment* a : appts)
        if (!protocol.machine_allowed(a->machine))
            add(out, "machine_allowed", Severity::error, id, a->date,
                "fraction " + std::to_string(a->fraction) + " on disallowed machine " +
                    a->machine);
    for (size_t i = 1; i < appts.size(); ++i) {
        if (appts[i - 1]->machine == appts[i]->machine) continue;
        if (!park.contains(appts[i - 1]->machine) || !park.contains(appts[i]->machine)) continue;
        const BeamMatch match = park.beam_match(appts[i - 1]->machine, appts[i]->machine);
        if (match == BeamMatch::none)
            add(out, "beam_match", Severity::error, id, appts[i]->date,
                "switch " + appts[i - 1]->machine + " -> " + appts[i]->machine +
                    " between unmatched machines");
        else if (match == BeamMatch::partial && !protocol.allow_partial_match_switch)
            add(out, "beam_match", Severity::error, id, appts[i]->date,
                "partial-match switch forbidden by protocol");
    }
    return out;
}

std::vector<Violation> validate_machine(const std::string& machine, Date from, Date to,
                                        const Schedule& schedule, const CourseTable& courses,
                                        const ProtocolTable& protocols, const MachinePark& park,
                                        const WorkingCalendar& cal) {
    std::vector<Violation> out;
    park.at(machine);
    const CalendarConfig& cc = cal.config();
    for (Date d = from; d <= to; ++d) {
        const auto appts = schedule.day_appointments(machine, d);
        if (appts.empty()) continue;
        const auto blocks = park.blocks(machine, d);
        int booked = 0;
        const Appointment* prev = nullptr;
        for (const Appointment* a : appts) {
            booked += a->duration;
            if (a->start < 0) continue;
            if (prev && prev->start >= 0 && prev->start + prev->duration > a->start)
                add(out, "double_booking", Severity::error, machine, d,
                    a->course_id + "#" + std::to_string(a->fraction) + " overlaps " +
                        prev->course_id + "#" + std::to_string(prev->fraction));
            if (a->start < cc.open_minute || a->start + a->duration > cc.close_minute)
                add(out, "unavailability", Severity::error, machine, d,
                    a->course_id + "#" + std::to_string(a->fraction) +
                        " outside the operating window");
            else
                for (const Interval& b : blocks)
                    if (b.overlaps(a->interval()))
                        add(out, "unavailability", Severity::error, machine, d,
                            a->course_id + "#" + std::to_string(a->fraction) +
                                " inside blocked time " + format_clock(b.begin) + "-" +
                                format_clock(b.end));
            const TreatmentCourse* course = courses.find(a->course_id);
            if (course) {
                const TreatmentProtocol* proto = protocols.find(course->protocol_id);
                if (proto && !proto->machine_allowed(machine))
                    add(out, "machine_allowed", Severity::error, a->course_id, a->date,
                        "fraction " + std::to_string(a->fraction) + " on disallowed machine " +
                            machine);
            }
            prev = a;
        }
        int blocked = 0;
        for (const Interval& b : blocks) blocked += b.length();
        if (booked > cc.operating_minutes() - blocked)
            add(out, "capacity", Severity::error, machine, d,
                std::to_string(booked) + " booked minutes exceed " +
                    std::to_string(cc.operating_minutes() - blocked) + " available");
    }
    return out;
}

ValidationReport validate_all(const Schedule& schedule, const CourseTable& courses,
                              const ProtocolTable& protocols, const MachinePark& park,
                              const WorkingCalendar& cal) {
    ValidationReport report;
    for (const TreatmentCourse& c : courses.all()) {
        if (!schedule.has_course(c.course_id)) continue; // unscheduled courses audit elsewhere
        const TreatmentProtocol& proto = protocols.by_name(c.protocol_id);
        auto v = validate_patient(c, proto, schedule, courses, park, cal);
        report.violations.insert(report.violations.end(), v.begin(), v.end());
    }
    // Machine audit across the populated date range.
    Date lo = cal.config().span_end, hi = cal.config().span_begin;
    for (const auto& [machine, date] : schedule.machine_days()) {
        lo = std::min(lo, date);
        hi = std::max(hi, date);
    }
    if (lo <= hi)
        for (const Machine& m : park.machines()) {
            auto v = validate_machine(m.machine_id, lo, hi, schedule, courses, protocols, park,
                                      cal);
            report.violations.insert(report.violations.end(), v.begin(), v.end());
        }

    // The two audits overlap on machine_allowed; report each finding once.
    std::sort(report.violations.begin(), report.violations.end(),
              [](const Violation& a, const Violation& b) { return a.key() < b.key(); });
    report.violations.erase(std::unique(report.violations.begin(), report.violations.end(),
                                        [](const Violation& a, const Violation& b) {
                                            return a.key() == b.key();
                                        }),
                            report.violations.end());
    for (const Violation& v : report.violations) {
        if (v.severity == Severity::error) {
            ++report.n_errors;
            ++report.errors_by_check[v.check];
        } else {
            ++report.n_warnings;
            ++report.warnings_by_check[v.check];
        }
    }
    return report;
}

std::string violations_csv(const std::vector<Violation>& violations) {
    std::ostringstream out;
    out << "# check,severity,subject,date,detail\n";
    for (const Violation& v : violations)
        out << join_csv({v.check, to_string(v.severity), v.subject, v.date.iso(), v.detail})
            << '\n';
    return out.str();
}

nlohmann::json validation_report_to_json(const ValidationReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const Violation& v : report.violations)
        rows.push_back({{"check", v.check},
                        {"severity", to_string(v.severity)},
                        {"subject", v.subject},
                        {"date", v.date.iso()},
                        {"detail", v.detail}});
    nlohmann::json errs = nlohmann::json::object(), warns = nlohmann::json::object();
    for (const auto& [k, n] : report.errors_by_check) errs[k] = n;
    for (const auto& [k, n] : report.warnings_by_check) warns[k] = n;
    return {{"violations", rows},
            {"errors_by_check", errs},
            {"warnings_by_check", warns},
            {"n_errors", report.n_errors},
            {"n_warnings", report.n_warnings}};
}

} // namespace rtsched
