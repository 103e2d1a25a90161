// Proleptic-Gregorian calendar dates, day-number arithmetic and the two
// temporal-regime bucketing schemes.
//
// Dates live in years 1..9999. Day numbers count days since 1970-01-01
// (negative before), using the era-based civil conversion, so date
// arithmetic is O(1) and exactly matches single-day iteration.
#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "datefrag/error.hpp"

namespace datefrag {

inline constexpr int kMinYear = 1;
inline constexpr int kMaxYear = 9999;

constexpr bool is_leap_year(int year) {
    return year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
}

constexpr int days_in_month(int year, int month) {
    constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

constexpr bool valid_date_fields(int year, int month, int day) {
    return year >= kMinYear && year <= kMaxYear && month >= 1 && month <= 12 &&
           day >= 1 && day <= days_in_month(year, month);
}

struct CalendarDate {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const CalendarDate&) const = default;
};

inline CalendarDate make_date(int year, int month, int day) {
    if (!valid_date_fields(year, month, day)) {
        throw Error(ErrorCode::InvalidCalendarDate,
                    std::to_string(year) + "-" + std::to_string(month) + "-" + std::to_string(day));
    }
    return CalendarDate{year, month, day};
}

// Days since 1970-01-01.
constexpr std::int64_t day_number(const CalendarDate& d) {
    std::int64_t y = d.year;
    y -= d.month <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;                                          // [0, 399]
    const std::int64_t doy = (153 * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1; // [0, 365]
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;                  // [0, 146096]
    return era * 146097 + doe - 719468;
}

constexpr CalendarDate date_from_day_number(std::int64_t days) {
    const std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const int day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    const int month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    return CalendarDate{static_cast<int>(y + (month <= 2)), month, day};
}

inline CalendarDate add_days(const CalendarDate& d, std::int64_t n) {
    const CalendarDate out = date_from_day_number(day_number(d) + n);
    if (out.year < kMinYear || out.year > kMaxYear) {
        throw Error(ErrorCode::OutOfRange, "result year " + std::to_string(out.year) +
                                               " outside " + std::to_string(kMinYear) + ".." +
                                               std::to_string(kMaxYear));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Temporal regimes. Two bucketing schemes are in use and are deliberately
// kept distinct: the evaluation scheme has a Near Past bucket, the probing
// scheme does not and draws its Present/Future boundary one year earlier.
// Both partition the whole year axis.

enum class Regime { Past, NearPast, Present, Future };
enum class RegimeScheme { Eval, Probe };

constexpr Regime regime_of(const CalendarDate& d, RegimeScheme scheme) {
    if (scheme == RegimeScheme::Eval) {
        if (d.year < 2000) return Regime::Past;
        if (d.year <= 2009) return Regime::NearPast;
        if (d.year <= 2025) return Regime::Present;
        return Regime::Future;
    }
    if (d.year < 2010) return Regime::Past;
    if (d.year <= 2024) return Regime::Present;
    return Regime::Future;
}

constexpr std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Past: return "past";
        case Regime::NearPast: return "near_past";
        case Regime::Present: return "present";
        case Regime::Future: return "future";
    }
    return "?";
}

inline Regime regime_from_string(std::string_view s) {
    if (s == "past") return Regime::Past;
    if (s == "near_past") return Regime::NearPast;
    if (s == "present") return Regime::Present;
    if (s == "future") return Regime::Future;
    throw Error(ErrorCode::MalformedLine, "unknown regime '" + std::string(s) + "'");
}

inline std::string iso_string(const CalendarDate& d) {
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

inline CalendarDate date_from_iso(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw Error(ErrorCode::PatternMismatch, "expected YYYY-MM-DD, got '" + std::string(s) + "'");
    }
    auto num = [&](size_t pos, size_t len) {
        int v = 0;
        for (size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') {
                throw Error(ErrorCode::PatternMismatch, "expected digit in '" + std::string(s) + "'");
            }
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    return make_date(num(0, 4), num(5, 2), num(8, 2));
}

} // namespace datefrag
