#include "rtsched/disruption.hpp"

#include "rtsched/csv.hpp"
#include "rtsched/errors.hpp"

#include <algorithm>
#include <sstream>

namespace rtsched {

const char* to_string(RepairRule r) {
    switch (r) {
    case RepairRule::complete_same_day: return "complete_same_day";
    case RepairRule::partial_same_day: return "partial_same_day";
    case RepairRule::postpone_append: return "postpone_append";
    case RepairRule::postpone_double: return "postpone_double";
    case RepairRule::unrepaired: return "unrepaired";
    }
    return "?";
}

namespace {

constexpr int kSixHours = 6 * 60;
constexpr int kAppendSearchDays = 30; // working days past the course end

std::vector<Interval> busy_time(const Schedule& schedule, const MachinePark& park,
                                const std::string& machine, Date date,
                                const Appointment* exclude) {
    std::vector<Interval> busy = park.blocks(machine, date);
    for (const Appointment* a : schedule.day_appointments(machine, date)) {
        if (a == exclude) continue;
        if (a->start >= 0) busy.push_back(a->interval());
    }
    return merge_intervals(std::move(busy));
}

// Allowed machines of the protocol with the requested match against `anchor`,
// preferred tier first, then the allowed tier, protocol order.
std::vector<std::string> matched_machines(const TreatmentProtocol& proto, const MachinePark& park,
                                          const std::string& anchor, BeamMatch wanted) {
    std::vector<std::string> out;
    auto scan = [&](const std::vector<std::string>& tier) {
        for (const std::string& m : tier) {
            if (m == anchor) continue;
            if (park.beam_match(anchor, m) == wanted) out.push_back(m);
        }
    };
    scan(proto.preferred_machines);
    scan(proto.allowed_machines);
    return out;
}

} // namespace

std::vector<Displacement> apply_failure(Schedule& schedule, const FailureEvent& event,
                                        MachinePark& park, const ProtocolTable& protocols,
                                        const CourseTable& courses, const WorkingCalendar& cal) {
    const CalendarConfig& cc = cal.config();
    park.add_block(event.machine, event.date, event.interval, BlockKind::failure);

    // Affected: appointments on the failed machine overlapping the interval.
    struct Affected {
        std::string course_id;
        int fraction;
        Priority priority;
        int start;
    };
    std::vector<Affected> affected;
    for (const Appointment* a : schedule.day_appointments(event.machine, event.date)) {
        if (a->start < 0 || !a->interval().overlaps(event.interval)) continue;
        const TreatmentCourse& course = courses.at(a->course_id);
        affected.push_back({a->course_id, a->fraction,
                            protocols.by_name(course.protocol_id).priority, a->start});
    }
    std::sort(affected.begin(), affected.end(), [](const Affected& x, const Affected& y) {
        return std::tuple(static_cast<int>(x.priority), x.start, x.course_id, x.fraction) <
               std::tuple(static_cast<int>(y.priority), y.start, y.course_id, y.fraction);
    });

    std::vector<Displacement> log;
    for (const Affected& af : affected) {
        const Appointment& appt = schedule.at(af.course_id, af.fraction);
        const TreatmentCourse& course = courses.at(af.course_id);
        const TreatmentProtocol& proto = protocols.by_name(course.protocol_id);

        Displacement d;
        d.course_id = af.course_id;
        d.fraction = af.fraction;
        d.from_machine = appt.machine;
        d.from_date = appt.date;
        d.from_start = appt.start;
        d.rule = RepairRule::unrepaired;

        const int duration = appt.duration;

        // (1) same day, completely matched machine; never before the failure
        // begins.
        for (const std::string& m :
             matched_machines(proto, park, event.machine, BeamMatch::complete)) {
            const auto busy = busy_time(schedule, park, m, event.date, &appt);
            if (auto start = find_slot(cc, busy, duration, event.interval.begin)) {
                d.to_machine = m;
                d.to_date = event.date;
                d.to_start = *start;
                d.rule = RepairRule::complete_same_day;
                break;
            }
        }
        // (2) same day, partially matched machine, when the protocol allows.
        if (d.rule == RepairRule::unrepaired && proto.allow_partial_match_switch) {
            for (const std::string& m :
                 matched_machines(proto, park, event.machine, BeamMatch::partial)) {
                const auto busy = busy_time(schedule, park, m, event.date, &appt);
                if (auto start = find_slot(cc, busy, duration, event.interval.begin)) {
                    d.to_machine = m;
                    d.to_date = event.date;
                    d.to_start = *start;
                    d.rule = RepairRule::partial_same_day;
                    break;
                }
            }
        }
        // (3b) double a later treatment day, starts >= 6 h apart. Adds no
        // excess time, so it is preferred over appending whenever feasible.
        if (d.rule == RepairRule::unrepaired) {
            auto appts = schedule.course_appointments(af.course_id);
            std::vector<const Appointment*> later;
            for (const Appointment* a : appts)
                if (a->date > event.date) later.push_back(a);
            for (const Appointment* other : later) {
                // Only days holding a single fraction may be doubled.
                int on_day = 0;
                for (const Appointment* a : appts)
                    if (a->date == other->date) ++on_day;
                if (on_day != 1 || other->start < 0) continue;
                std::vector<std::string> cands = {other->machine};
                for (const std::string& m :
                     matched_machines(proto, park, other->machine, BeamMatch::complete))
                    cands.push_back(m);
                bool placed = false;
                for (const std::string& m : cands) {
                    const auto busy = busy_time(schedule, park, m, other->date, &appt);
                    std::optional<int> best;
                    if (auto early = find_slot(cc, busy, duration, cc.open_minute);
                        early && *early <= other->start - kSixHours)
                        best = early;
                    if (!best)
                        if (auto late = find_slot(cc, busy, duration, other->start + kSixHours))
                            best = late;
                    if (best) {
                        d.to_machine = m;
                        d.to_date = other->date;
                        d.to_start = *best;
                        d.rule = RepairRule::postpone_double;
                        placed = true;
                        break;
                    }
                }
                if (placed) break;
            }
        }
        // (3a) append a treatment day after the course end, keeping the
        // pattern spacing and finishing before any chained successor starts.
        if (d.rule == RepairRule::unrepaired) {
            auto appts = schedule.course_appointments(af.course_id);
            Date last = appts.back()->date;
            std::string last_machine = appts.back()->machine;
            if (&schedule.at(af.course_id, af.fraction) == appts.back() && appts.size() > 1) {
                last = appts[appts.size() - 2]->date;
                last_machine = appts[appts.size() - 2]->machine;
            }
            std::optional<Date> limit; // strictly before a successor's start
            for (const TreatmentCourse& other : courses.all()) {
                if (other.follows_course && *other.follows_course == af.course_id)
                    if (auto first = schedule.first_fraction_date(other.course_id))
                        limit = limit ? std::min(*limit, *first) : *first;
            }
            std::vector<std::string> cands = {last_machine};
            for (const std::string& m :
                 matched_machines(proto, park, last_machine, BeamMatch::complete))
                cands.push_back(m);
            if (proto.allow_partial_match_switch)
                for (const std::string& m :
                     matched_machines(proto, park, last_machine, BeamMatch::partial))
                    cands.push_back(m);
            auto day = cal.try_add_working_days(last, proto.min_pattern_spacing());
            for (int step = 0; day && step < kAppendSearchDays; ++step) {
                if (*day <= event.date) { // never move a fraction earlier
                    day = cal.try_add_working_days(*day, 1);
                    continue;
                }
                if (limit && *day >= *limit) break;
                bool placed = false;
                for (const std::string& m : cands) {
                    const auto busy = busy_time(schedule, park, m, *day, &appt);
                    if (auto start = find_slot(cc, busy, duration, cc.open_minute)) {
                        d.to_machine = m;
                        d.to_date = *day;
                        d.to_start = *start;
                        d.rule = RepairRule::postpone_append;
                        placed = true;
                        break;
                    }
                }
                if (placed) break;
                day = cal.try_add_working_days(*day, 1);
            }
        }

        if (d.rule != RepairRule::unrepaired)
            schedule.move(af.course_id, af.fraction, d.to_machine, d.to_date,
                          cc.window_of(d.to_start), d.to_start);
        log.push_back(std::move(d));
    }
    return log;
}

std::string displacement_csv(const std::vector<Displacement>& log) {
    std::ostringstream out;
    out << "# course,fraction,from_machine,from_date,from_start,to_machine,to_date,to_start,"
           "rule\n";
    for (const Displacement& d : log) {
        const bool repaired = d.rule != RepairRule::unrepaired;
        out << join_csv({d.course_id, std::to_string(d.fraction), d.from_machine,
                         d.from_date.iso(), format_clock(d.from_start),
                         repaired ? d.to_machine : "-", repaired ? d.to_date.iso() : "-",
                         repaired ? format_clock(d.to_start) : "-", to_string(d.rule)})
            << '\n';
    }
    return out.str();
}

} // namespace rtsched
