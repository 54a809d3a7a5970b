#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace quantbench::data {

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;
};

// Accepts YYYY-MM-DD and YYYY/M/D (single-digit month/day allowed in either).
std::optional<Date> parse_date(std::string_view text);

// Always YYYY-MM-DD.
std::string to_string(const Date& d);

Date next_day(const Date& d);

} // namespace quantbench::data
