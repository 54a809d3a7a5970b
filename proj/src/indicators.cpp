#include "quantbench/indicators.hpp"

#include <algorithm>

namespace quantbench::indicators {

namespace {

int sign_of(double v) {
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
}

} // namespace

SmaSeries sma(const std::vector<data::DatedValue>& prices, int period,
              std::string source_ticker) {
    if (period < 1) throw ZeroPeriod("SMA period must be >= 1, got " + std::to_string(period));
    if (static_cast<std::size_t>(period) > prices.size()) {
        throw PeriodTooLong("SMA period " + std::to_string(period) + " exceeds series length " +
                            std::to_string(prices.size()));
    }

    SmaSeries out;
    out.period = period;
    out.source_ticker = std::move(source_ticker);
    out.values.reserve(prices.size() - static_cast<std::size_t>(period) + 1);

    long double window = 0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        window += prices[i].value;
        if (i + 1 < static_cast<std::size_t>(period)) continue;
        if (i + 1 > static_cast<std::size_t>(period)) {
            window -= prices[i - static_cast<std::size_t>(period)].value;
        }
        out.values.push_back({prices[i].date, static_cast<double>(window / period)});
    }
    return out;
}

SmaSeries sma(const data::PriceSeries& series, int period) {
    return sma(adjusted_closes(series), period, series.ticker);
}

std::pair<SmaSeries, SmaSeries> align_crop(const SmaSeries& short_sma, const SmaSeries& long_sma) {
    if (short_sma.period >= long_sma.period) {
        throw PeriodOrderViolation("short period " + std::to_string(short_sma.period) +
                                   " must be less than long period " +
                                   std::to_string(long_sma.period));
    }
    if (short_sma.source_ticker != long_sma.source_ticker) {
        throw MismatchedSource("SMA inputs come from \"" + short_sma.source_ticker + "\" and \"" +
                               long_sma.source_ticker + "\"");
    }
    if (short_sma.values.empty() || long_sma.values.empty()) {
        throw MismatchedSource("SMA inputs must be non-empty");
    }

    const auto anchor = long_sma.values.front().date;
    const auto it = std::lower_bound(
        short_sma.values.begin(), short_sma.values.end(), anchor,
        [](const data::DatedValue& v, const data::Date& d) { return v.date < d; });
    if (it == short_sma.values.end() || it->date != anchor) {
        throw MismatchedSource("long SMA start " + data::to_string(anchor) +
                               " not found in short SMA dates");
    }

    SmaSeries cropped_short = short_sma;
    cropped_short.values.assign(it, short_sma.values.end());
    SmaSeries cropped_long = long_sma;

    if (cropped_short.values.size() != cropped_long.values.size()) {
        throw MismatchedSource("SMA inputs do not share a common tail");
    }
    return {std::move(cropped_short), std::move(cropped_long)};
}

DifferenceSeries difference(const SmaSeries& short_sma, const SmaSeries& long_sma) {
    if (short_sma.values.size() != long_sma.values.size()) {
        throw MisalignedInputs("SMA inputs differ in length");
    }
    DifferenceSeries out;
    out.values.reserve(short_sma.values.size());
    for (std::size_t i = 0; i < short_sma.values.size(); ++i) {
        if (short_sma.values[i].date != long_sma.values[i].date) {
            throw MisalignedInputs("SMA inputs differ at index " + std::to_string(i));
        }
        out.values.push_back(
            {short_sma.values[i].date, short_sma.values[i].value - long_sma.values[i].value});
    }
    return out;
}

SignalSeries crossover_signals(const DifferenceSeries& diff) {
    SignalSeries out;
    if (diff.values.empty()) return out;
    out.dates.reserve(diff.values.size());
    out.events.reserve(diff.values.size());

    out.dates.push_back(diff.values.front().date);
    out.events.push_back(Signal::Hold);
    int prev = sign_of(diff.values.front().value);
    for (std::size_t i = 1; i < diff.values.size(); ++i) {
        int cur = sign_of(diff.values[i].value);
        if (cur == 0) cur = prev;
        Signal event = Signal::Hold;
        if (prev < 0 && cur > 0) event = Signal::Buy;
        if (prev > 0 && cur < 0) event = Signal::Sell;
        out.dates.push_back(diff.values[i].date);
        out.events.push_back(event);
        prev = cur;
    }
    return out;
}

} // namespace quantbench::indicators
