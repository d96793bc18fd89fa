#pragma once

#include "rtsched/date.hpp"

#include <optional>
#include <set>
#include <vector>

namespace rtsched {

// Clinic-wide calendar: span, closed days, the operating window and its
// division into fixed time windows on a minute grid.
struct CalendarConfig {
    Date span_begin = Date::from_ymd(2020, 1, 1);
    Date span_end = Date::from_ymd(2021, 3, 31);
    std::set<int> weekend_days = {5, 6}; // Sat, Sun (Monday = 0)
    std::set<Date> holidays;

    int open_minute = 8 * 60;        // 08:00
    int close_minute = 17 * 60 + 30; // 17:30
    int time_grid = 5;               // minutes
    int window_length = 120;         // minutes; last window may be short
    int noon_minute = 12 * 60;       // AM/PM boundary

    void validate() const; // throws ConfigError

    int operating_minutes() const { return close_minute - open_minute; }
    int n_windows() const {
        return (operating_minutes() + window_length - 1) / window_length;
    }
    int window_begin(int w) const { return open_minute + w * window_length; }
    int window_end(int w) const {
        int e = open_minute + (w + 1) * window_length;
        return e < close_minute ? e : close_minute;
    }
    // Window containing a start time; -1 outside the operating window.
    int window_of(int minute) const {
        if (minute < open_minute || minute >= close_minute) return -1;
        return (minute - open_minute) / window_length;
    }
    bool is_am(int minute) const { return minute < noon_minute; }
};

// Immutable working-day index over a CalendarConfig span. Built once,
// shared read-only by every module.
class WorkingCalendar {
public:
    explicit WorkingCalendar(CalendarConfig cfg);

    const CalendarConfig& config() const { return cfg_; }

    bool in_span(Date d) const { return d >= cfg_.span_begin && d <= cfg_.span_end; }
    bool is_working_day(Date d) const;

    // Smallest working date >= d. Throws RangeError past span_end.
    Date next_working_day(Date d) const;

    // d must be a working day; moves n working days (n may be 0).
    Date add_working_days(Date d, int n) const;
    // As above but nullopt instead of throwing at the span edge.
    std::optional<Date> try_add_working_days(Date d, int n) const;

    // Index of d in the span's working-day sequence; throws RangeError if
    // d is not a working day in span.
    int working_index(Date d) const;

    // Inclusive working-day count between two working days (a <= b).
    int working_days_inclusive(Date a, Date b) const {
        return working_index(b) - working_index(a) + 1;
    }
    // Number of working-day steps from a to b (0 when equal).
    int working_days_between(Date a, Date b) const {
        return working_index(b) - working_index(a);
    }

    const std::vector<Date>& working_days() const { return working_days_; }

private:
    CalendarConfig cfg_;
    std::vector<Date> working_days_;
    std::vector<int> index_; // by day offset from span_begin; -1 = closed
};

} // namespace rtsched
