#include "quantbench/market_data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string_view>

#include "quantbench/num_format.hpp"

namespace quantbench::data {

namespace {

constexpr std::array<const char*, 7> kColumns{
    "Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

bool is_null_field(std::string_view s) {
    if (s.empty()) return true;
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower == "null";
}

double parse_price(std::string_view s, std::size_t line_no, const char* column) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw MalformedCsv("line " + std::to_string(line_no) + ": unparseable " + column +
                           " value \"" + std::string(s) + "\"");
    }
    return value;
}

long long parse_volume(std::string_view s, std::size_t line_no) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw MalformedCsv("line " + std::to_string(line_no) + ": unparseable Volume value \"" +
                           std::string(s) + "\"");
    }
    return value;
}

} // namespace

PriceSeries parse_csv(std::istream& text, std::string ticker) {
    std::string line;
    std::size_t line_no = 0;

    std::array<std::size_t, 7> col{};
    bool have_header = false;
    while (std::getline(text, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_line(line);
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            const auto it = std::find(fields.begin(), fields.end(), std::string_view(kColumns[c]));
            if (it == fields.end()) {
                throw MalformedCsv("header is missing column \"" + std::string(kColumns[c]) + "\"");
            }
            col[c] = static_cast<std::size_t>(it - fields.begin());
        }
        have_header = true;
        break;
    }
    if (!have_header) throw MalformedCsv("input has no header row");

    PriceSeries series;
    series.ticker = std::move(ticker);

    while (std::getline(text, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_line(line);
        const auto max_col = *std::max_element(col.begin(), col.end());
        if (fields.size() <= max_col) {
            throw MalformedCsv("line " + std::to_string(line_no) + ": expected at least " +
                               std::to_string(max_col + 1) + " fields, got " +
                               std::to_string(fields.size()));
        }

        bool any_null = false;
        for (std::size_t c = 1; c < kColumns.size(); ++c) {
            if (is_null_field(fields[col[c]])) {
                any_null = true;
                break;
            }
        }
        if (any_null) {
            ++series.dropped_rows;
            continue;
        }

        const auto date = parse_date(fields[col[0]]);
        if (!date) {
            throw MalformedCsv("line " + std::to_string(line_no) + ": unparseable date \"" +
                               std::string(fields[col[0]]) + "\"");
        }

        Bar bar;
        bar.date = *date;
        bar.open = parse_price(fields[col[1]], line_no, "Open");
        bar.high = parse_price(fields[col[2]], line_no, "High");
        bar.low = parse_price(fields[col[3]], line_no, "Low");
        bar.close = parse_price(fields[col[4]], line_no, "Close");
        bar.adj_close = parse_price(fields[col[5]], line_no, "Adj Close");
        bar.volume = parse_volume(fields[col[6]], line_no);

        if (bar.adj_close <= 0) {
            throw MalformedCsv("line " + std::to_string(line_no) + ": Adj Close must be positive");
        }
        if (bar.volume < 0) {
            throw MalformedCsv("line " + std::to_string(line_no) + ": Volume must be non-negative");
        }
        if (bar.low > std::min(bar.open, bar.close) || bar.high < std::max(bar.open, bar.close)) {
            throw MalformedCsv("line " + std::to_string(line_no) +
                               ": OHLC ordering violated (low <= open,close <= high)");
        }
        series.bars.push_back(bar);
    }

    if (series.bars.empty()) {
        throw EmptySeries("no valid rows for " + series.ticker + " (" +
                          std::to_string(series.dropped_rows) + " dropped)");
    }

    std::stable_sort(series.bars.begin(), series.bars.end(),
                     [](const Bar& a, const Bar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < series.bars.size(); ++i) {
        if (series.bars[i].date == series.bars[i - 1].date) {
            throw DuplicateDate("duplicate date " + to_string(series.bars[i].date));
        }
    }
    return series;
}

PriceSeries parse_csv(const std::string& text, std::string ticker) {
    std::istringstream in(text);
    return parse_csv(in, std::move(ticker));
}

PriceSeries load_csv_file(const std::filesystem::path& file, std::string ticker) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    return parse_csv(in, std::move(ticker));
}

std::string serialize_csv(const PriceSeries& series) {
    std::string out = "Date,Open,High,Low,Close,Adj Close,Volume\n";
    for (const auto& bar : series.bars) {
        out += to_string(bar.date);
        out += ',';
        out += format_double(bar.open);
        out += ',';
        out += format_double(bar.high);
        out += ',';
        out += format_double(bar.low);
        out += ',';
        out += format_double(bar.close);
        out += ',';
        out += format_double(bar.adj_close);
        out += ',';
        out += std::to_string(bar.volume);
        out += '\n';
    }
    return out;
}

void write_csv_file(const PriceSeries& series, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << serialize_csv(series);
}

PriceSeries slice(const PriceSeries& series, const DateRange& range) {
    if (range.end < range.start) {
        throw UsageError("date range start " + to_string(range.start) + " is after end " +
                         to_string(range.end));
    }
    PriceSeries out;
    out.ticker = series.ticker;
    out.dropped_rows = series.dropped_rows;
    for (const auto& bar : series.bars) {
        if (range.start <= bar.date && bar.date <= range.end) out.bars.push_back(bar);
    }
    if (out.bars.empty()) {
        throw EmptySeries("no bars for " + series.ticker + " in " + to_string(range.start) +
                          ".." + to_string(range.end));
    }
    return out;
}

std::vector<DatedValue> adjusted_closes(const PriceSeries& series) {
    std::vector<DatedValue> out;
    out.reserve(series.bars.size());
    for (const auto& bar : series.bars) out.push_back({bar.date, bar.adj_close});
    return out;
}

} // namespace quantbench::data
