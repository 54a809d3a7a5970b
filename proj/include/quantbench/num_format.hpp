#pragma once

#include <charconv>
#include <string>

namespace quantbench {

// Shortest decimal string that round-trips the exact double value.
// All data-of-record artifacts (JSON reports, CSVs) use this form.
inline std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Fixed significant digits, for human-facing summaries only.
inline std::string format_double(double v, int significant) {
    char buf[48];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, significant);
    return std::string(buf, ptr);
}

} // namespace quantbench
