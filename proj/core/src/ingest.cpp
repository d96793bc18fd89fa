#include "rtsched/ingest.hpp"

#include "rtsched/config.hpp"
#include "rtsched/csv.hpp"
#include "rtsched/errors.hpp"

#include <algorithm>
#include <sstream>

namespace rtsched {

namespace {

int parse_int(const std::string& s, const std::string& what, int line) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
    }
}

} // namespace

std::vector<ArrivalRecord> parse_arrivals_text(const std::string& content,
                                               const std::string& origin,
                                               const ProtocolTable& protocols,
                                               const std::set<std::string>& known_courses) {
    std::vector<ArrivalRecord> records;
    std::set<std::string> seen = known_courses;
    for (const CsvRow& row : parse_csv(content)) {
        if (row.fields.size() != 9)
            throw ParseError(origin + " line " + std::to_string(row.line) + ": expected 9 columns, got " +
                             std::to_string(row.fields.size()));
        ArrivalRecord r;
        r.patient_id = row.fields[0];
        r.course_id = row.fields[1];
        try {
            r.creation_date = Date::parse(row.fields[2]);
        } catch (const ParseError& e) {
            throw ParseError(origin + " line " + std::to_string(row.line) + ": " + e.what());
        }
        r.protocol_name = row.fields[3];
        protocols.by_name(r.protocol_name); // unknown protocol is a hard error
        r.n_fractions = parse_int(row.fields[4], "fraction count", row.line);
        r.duration_first = parse_int(row.fields[5], "first duration", row.line);
        r.duration_rest = parse_int(row.fields[6], "duration", row.line);
        r.site_pref = row.fields[7];
        if (row.fields[8] != "-" && !row.fields[8].empty()) {
            r.follows_course = row.fields[8];
            if (!seen.count(*r.follows_course))
                throw ReferenceError(origin + " line " + std::to_string(row.line) +
                                     ": follows unknown course '" + *r.follows_course + "'");
        }
        if (r.n_fractions < 1)
            throw ParseError(origin + " line " + std::to_string(row.line) + ": fraction count < 1");
        seen.insert(r.course_id);
        records.push_back(std::move(r));
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const ArrivalRecord& a, const ArrivalRecord& b) {
                         return a.creation_date < b.creation_date;
                     });
    return records;
}

std::vector<ArrivalRecord> parse_arrivals(const std::string& path, const ProtocolTable& protocols,
                                          const std::set<std::string>& known_courses) {
    return parse_arrivals_text(read_text_file(path), path, protocols, known_courses);
}

std::string emit_arrivals(const std::vector<ArrivalRecord>& records) {
    std::ostringstream out;
    out << "# patient_id,course_id,creation_date,protocol,n_fractions,duration_first,"
           "duration_rest,site_pref,follows_course\n";
    for (const ArrivalRecord& r : records) {
        out << join_csv({r.patient_id, r.course_id, r.creation_date.iso(), r.protocol_name,
                         std::to_string(r.n_fractions), std::to_string(r.duration_first),
                         std::to_string(r.duration_rest), r.site_pref,
                         r.follows_course ? *r.follows_course : "-"})
            << '\n';
    }
    return out.str();
}

CourseTable build_course_table(const std::vector<ArrivalRecord>& records,
                               const std::set<std::string>& exclusions) {
    CourseTable table;
    for (const ArrivalRecord& r : records) {
        TreatmentCourse c;
        c.patient_id = r.patient_id;
        c.course_id = r.course_id;
        c.creation_date = r.creation_date;
        c.protocol_id = r.protocol_name;
        c.n_fractions = r.n_fractions;
        c.duration_first = r.duration_first;
        c.duration_rest = r.duration_rest;
        c.site_preference = r.site_pref;
        c.follows_course = r.follows_course;
        c.exclusion_flag = exclusions.count(r.course_id) > 0;
        table.add(std::move(c));
    }
    return table;
}

std::set<std::string> load_exclusions(const std::string& path) {
    std::set<std::string> out;
    for (const CsvRow& row : read_csv(path))
        if (!row.fields.empty() && !row.fields[0].empty()) out.insert(row.fields[0]);
    return out;
}

CalendarParseResult parse_calendar_text(const std::string& content, const std::string& origin,
                                        const CalendarConfig& cal, MachinePark& park,
                                        bool apply_failures_to_park) {
    CalendarParseResult result;
    for (const CsvRow& row : parse_csv(content)) {
        if (row.fields.size() != 4)
            throw ParseError(origin + " line " + std::to_string(row.line) +
                             ": expected machine,date,interval,kind");
        const std::string& machine = row.fields[0];
        if (!park.contains(machine))
            throw ReferenceError(origin + " line " + std::to_string(row.line) +
                                 ": unknown machine '" + machine + "'");
        Date date;
        try {
            date = Date::parse(row.fields[1]);
        } catch (const ParseError& e) {
            throw ParseError(origin + " line " + std::to_string(row.line) + ": " + e.what());
        }
        Interval iv;
        if (row.fields[2] == "FULL_DAY") {
            iv = {cal.open_minute, cal.close_minute};
        } else {
            const auto dash = row.fields[2].find('-');
            if (dash == std::string::npos)
                throw ParseError(origin + " line " + std::to_string(row.line) +
                                 ": interval must be HH:MM-HH:MM or FULL_DAY");
            iv.begin = parse_clock(row.fields[2].substr(0, dash));
            iv.end = parse_clock(row.fields[2].substr(dash + 1));
            if (iv.end <= iv.begin)
                throw ParseError(origin + " line " + std::to_string(row.line) +
                                 ": empty interval");
            const Interval clipped{std::max(iv.begin, cal.open_minute),
                                   std::min(iv.end, cal.close_minute)};
            if (clipped != iv) {
                result.warnings.push_back(origin + " line " + std::to_string(row.line) +
                                          ": interval clipped to the operating window");
                iv = clipped;
            }
            if (iv.end <= iv.begin) continue; // entirely outside the operating window
        }
        const std::string& kind = row.fields[3];
        if (kind == "planned") {
            park.add_block(machine, date, iv, BlockKind::planned);
        } else if (kind == "failure") {
            // Idempotent: exact duplicate rows collapse to one event.
            const bool dup = std::any_of(result.failures.begin(), result.failures.end(),
                                         [&](const FailureEvent& e) {
                                             return e.machine == machine && e.date == date &&
                                                    e.interval == iv;
                                         });
            if (!dup) result.failures.push_back({machine, date, iv});
            if (apply_failures_to_park) park.add_block(machine, date, iv, BlockKind::failure);
        } else {
            throw ParseError(origin + " line " + std::to_string(row.line) + ": kind must be planned or failure");
        }
    }
    std::stable_sort(result.failures.begin(), result.failures.end(),
                     [](const FailureEvent& a, const FailureEvent& b) { return a.date < b.date; });
    return result;
}

CalendarParseResult parse_calendar(const std::string& path, const CalendarConfig& cal,
                                   MachinePark& park, bool apply_failures_to_park) {
    return parse_calendar_text(read_text_file(path), path, cal, park, apply_failures_to_park);
}

std::string emit_calendar(const MachinePark& park, const std::vector<FailureEvent>& failures) {
    std::ostringstream out;
    out << "# machine,date,interval,kind\n";
    std::vector<std::string> lines;
    for (const Machine& m : park.machines()) {
        for (Date d : park.blocked_dates()) {
            for (const Interval& iv : park.blocks_of_kind(m.machine_id, d, BlockKind::planned))
                lines.push_back(join_csv({m.machine_id, d.iso(),
                                          format_clock(iv.begin) + "-" + format_clock(iv.end),
                                          "planned"}));
        }
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) out << l << '\n';
    for (const FailureEvent& e : failures)
        out << join_csv({e.machine, e.date.iso(),
                         format_clock(e.interval.begin) + "-" + format_clock(e.interval.end),
                         "failure"})
            << '\n';
    return out.str();
}

} // namespace rtsched
