#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "quantbench/date.hpp"
#include "quantbench/errors.hpp"

namespace quantbench::data {

struct MalformedCsv : DataError { using DataError::DataError; };
struct EmptySeries : DataError { using DataError::DataError; };
struct DuplicateDate : DataError { using DataError::DataError; };
struct NetworkError : DataError { using DataError::DataError; };
struct UnknownTicker : DataError { using DataError::DataError; };

struct Bar {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
    double adj_close = 0;
    long long volume = 0;

    bool operator==(const Bar&) const = default;
};

struct DatedValue {
    Date date;
    double value = 0;
};

struct DateRange {
    Date start;
    Date end;
};

struct PriceSeries {
    std::string ticker;
    std::vector<Bar> bars;
    std::size_t dropped_rows = 0; // rows discarded for null/empty numeric fields
};

// Columns are located by header name; rows are sorted by date on the way in.
// Rows with any "null" or empty numeric field are dropped and counted.
PriceSeries parse_csv(std::istream& text, std::string ticker);
PriceSeries parse_csv(const std::string& text, std::string ticker);
PriceSeries load_csv_file(const std::filesystem::path& file, std::string ticker);

std::string serialize_csv(const PriceSeries& series);
void write_csv_file(const PriceSeries& series, const std::filesystem::path& file);

PriceSeries slice(const PriceSeries& series, const DateRange& range);
std::vector<DatedValue> adjusted_closes(const PriceSeries& series);

} // namespace quantbench::data
