#include "quantbench/date.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace quantbench::data {

namespace {

bool leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> days{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && leap_year(y)) return 29;
    return days[static_cast<std::size_t>(m - 1)];
}

std::optional<int> parse_component(std::string_view s) {
    if (s.empty() || s.size() > 4) return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

} // namespace

std::optional<Date> parse_date(std::string_view text) {
    const char sep = text.find('/') != std::string_view::npos ? '/' : '-';
    const auto first = text.find(sep);
    if (first == std::string_view::npos) return std::nullopt;
    const auto second = text.find(sep, first + 1);
    if (second == std::string_view::npos) return std::nullopt;
    if (text.find(sep, second + 1) != std::string_view::npos) return std::nullopt;

    const auto y = parse_component(text.substr(0, first));
    const auto m = parse_component(text.substr(first + 1, second - first - 1));
    const auto d = parse_component(text.substr(second + 1));
    if (!y || !m || !d) return std::nullopt;
    if (*y < 1000 || *y > 9999 || *m < 1 || *m > 12) return std::nullopt;
    if (*d < 1 || *d > days_in_month(*y, *m)) return std::nullopt;
    return Date{*y, *m, *d};
}

std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

Date next_day(const Date& d) {
    Date r = d;
    ++r.day;
    if (r.day > days_in_month(r.year, r.month)) {
        r.day = 1;
        ++r.month;
        if (r.month > 12) {
            r.month = 1;
            ++r.year;
        }
    }
    return r;
}

} // namespace quantbench::data
