#include "rtsched/date.hpp"

#include "rtsched/errors.hpp"

#include <array>
#include <cstdio>

namespace rtsched {

namespace {

// Civil-from-days / days-from-civil (Gregorian, proleptic).
std::int32_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = yr + (m <= 2);
}

bool valid_ymd(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    static constexpr std::array<int, 12> len = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int n = len[m - 1];
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) n = 29;
    return d <= n;
}

} // namespace

Date Date::from_ymd(int year, int month, int day) {
    if (!valid_ymd(year, month, day))
        throw ParseError("invalid date components: " + std::to_string(year) + "-" +
                         std::to_string(month) + "-" + std::to_string(day));
    return Date(days_from_civil(year, month, day));
}

Date Date::parse(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3)
        throw ParseError("cannot parse date '" + text + "'");
    if (y < 100) y += 2000; // two-digit-year input form
    return from_ymd(y, m, d);
}

void Date::to_ymd(int& year, int& month, int& day) const {
    civil_from_days(days_, year, month, day);
}

int Date::weekday() const {
    // 1970-01-01 was a Thursday (weekday 3 with Monday = 0).
    return static_cast<int>(((days_ % 7) + 7 + 3) % 7);
}

std::string Date::iso() const {
    int y, m, d;
    to_ymd(y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

int parse_clock(const std::string& text) {
    int h = 0, m = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d:%d%c", &h, &m, &extra) != 2 || h < 0 || h > 23 || m < 0 ||
        m > 59)
        throw ParseError("cannot parse clock time '" + text + "'");
    return h * 60 + m;
}

std::string format_clock(int minutes) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
    return buf;
}

} // namespace rtsched
