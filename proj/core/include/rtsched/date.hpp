#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace rtsched {

// Calendar date stored as a day count since 1970-01-01 (civil).
// Cheap to copy, totally ordered, and exact day arithmetic.
class Date {
public:
    Date() = default;
    static Date from_days(std::int32_t days) { return Date(days); }
    static Date from_ymd(int year, int month, int day);

    // Accepts ISO "2020-01-02" and the two-digit-year form "20-01-02"
    // (normalized to 20xx). Throws ParseError otherwise.
    static Date parse(const std::string& text);

    std::int32_t days() const { return days_; }
    void to_ymd(int& year, int& month, int& day) const;

    // 0 = Monday ... 6 = Sunday.
    int weekday() const;

    std::string iso() const; // "2020-01-02"

    Date operator+(int d) const { return Date(days_ + d); }
    Date operator-(int d) const { return Date(days_ - d); }
    int operator-(Date other) const { return days_ - other.days_; }
    Date& operator++() { ++days_; return *this; }

    auto operator<=>(const Date&) const = default;

private:
    explicit Date(std::int32_t days) : days_(days) {}
    std::int32_t days_ = 0;
};

// Minutes from midnight; "HH:MM" on the wire.
int parse_clock(const std::string& text);
std::string format_clock(int minutes);

} // namespace rtsched
