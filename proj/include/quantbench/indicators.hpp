#pragma once

#include <string>
#include <utility>
#include <vector>

#include "quantbench/errors.hpp"
#include "quantbench/market_data.hpp"

namespace quantbench::indicators {

struct ZeroPeriod : ModelError { using ModelError::ModelError; };
struct PeriodTooLong : ModelError { using ModelError::ModelError; };
struct MismatchedSource : ModelError { using ModelError::ModelError; };
struct PeriodOrderViolation : ModelError { using ModelError::ModelError; };
struct MisalignedInputs : ModelError { using ModelError::ModelError; };

struct SmaSeries {
    int period = 0;
    std::string source_ticker;
    std::vector<data::DatedValue> values; // starts at the source's (period-1)-th bar
};

struct DifferenceSeries {
    std::vector<data::DatedValue> values; // short minus long; positive = bullish
};

enum class Signal { Buy, Sell, Hold };

struct SignalSeries {
    std::vector<data::Date> dates;
    std::vector<Signal> events;
};

SmaSeries sma(const std::vector<data::DatedValue>& prices, int period,
              std::string source_ticker = {});
SmaSeries sma(const data::PriceSeries& series, int period);

std::pair<SmaSeries, SmaSeries> align_crop(const SmaSeries& short_sma, const SmaSeries& long_sma);
DifferenceSeries difference(const SmaSeries& short_sma, const SmaSeries& long_sma);

// Sign-change scan; exact zeros carry the previous day's sign forward.
SignalSeries crossover_signals(const DifferenceSeries& diff);

} // namespace quantbench::indicators
