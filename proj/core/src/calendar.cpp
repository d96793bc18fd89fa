#include "rtsched/calendar.hpp"

#include "rtsched/errors.hpp"

namespace rtsched {

void CalendarConfig::validate() const {
    if (span_end < span_begin) throw ConfigError("calendar span is empty");
    if (open_minute < 0 || close_minute > 24 * 60 || close_minute <= open_minute)
        throw ConfigError("operating window must lie within the day and be non-empty");
    if (time_grid <= 0) throw ConfigError("time_grid must be positive");
    if (window_length <= 0 || window_length % time_grid != 0)
        throw ConfigError("window_length must be a positive multiple of time_grid");
    if (noon_minute < open_minute || noon_minute > close_minute)
        throw ConfigError("noon boundary must lie inside the operating window");
    if (weekend_days.size() >= 7) throw ConfigError("every weekday is a weekend day");
    for (int wd : weekend_days)
        if (wd < 0 || wd > 6) throw ConfigError("weekend day out of range");
}

WorkingCalendar::WorkingCalendar(CalendarConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const int span = cfg_.span_end - cfg_.span_begin + 1;
    index_.assign(static_cast<size_t>(span), -1);
    for (Date d = cfg_.span_begin; d <= cfg_.span_end; ++d) {
        const bool closed =
            cfg_.weekend_days.count(d.weekday()) > 0 || cfg_.holidays.count(d) > 0;
        if (!closed) {
            index_[static_cast<size_t>(d - cfg_.span_begin)] =
                static_cast<int>(working_days_.size());
            working_days_.push_back(d);
        }
    }
    if (working_days_.empty()) throw ConfigError("calendar span contains no working day");
}

bool WorkingCalendar::is_working_day(Date d) const {
    if (!in_span(d)) return false;
    return index_[static_cast<size_t>(d - cfg_.span_begin)] >= 0;
}

Date WorkingCalendar::next_working_day(Date d) const {
    if (d < cfg_.span_begin || d > cfg_.span_end + 1)
        throw RangeError("date " + d.iso() + " outside calendar span");
    for (Date x = d; x <= cfg_.span_end; ++x)
        if (is_working_day(x)) return x;
    throw RangeError("no working day on or after " + d.iso() + " within span");
}

Date WorkingCalendar::add_working_days(Date d, int n) const {
    int idx = working_index(d) + n;
    if (idx < 0 || idx >= static_cast<int>(working_days_.size()))
        throw RangeError("working-day arithmetic left the calendar span");
    return working_days_[static_cast<size_t>(idx)];
}

std::optional<Date> WorkingCalendar::try_add_working_days(Date d, int n) const {
    int idx = working_index(d) + n;
    if (idx < 0 || idx >= static_cast<int>(working_days_.size())) return std::nullopt;
    return working_days_[static_cast<size_t>(idx)];
}

int WorkingCalendar::working_index(Date d) const {
    if (!in_span(d)) throw RangeError("date " + d.iso() + " outside calendar span");
    int idx = index_[static_cast<size_t>(d - cfg_.span_begin)];
    if (idx < 0) throw RangeError(d.iso() + " is not a working day");
    return idx;
}

} // namespace rtsched
