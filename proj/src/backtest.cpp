#include "quantbench/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "quantbench/indicators.hpp"
#include "quantbench/models.hpp"
#include "quantbench/num_format.hpp"

namespace quantbench::backtest {

namespace {

// Continuous constant implies indicative constant (deltas are only ever
// captured from the continuous curve), so identical flat curves get ratio 1
// instead of the standalone function's ZeroDenominator.
double report_volatility_ratio(const EquityCurve& indicative, const EquityCurve& continuous) {
    if (std_dev(continuous.values, 1) == 0 && std_dev(indicative.values, 1) == 0) return 1.0;
    return volatility_ratio(indicative, continuous);
}

BacktestReport make_report(EquityCurve continuous, EquityCurve indicative,
                           std::optional<double> avg_confidence) {
    BacktestReport report;
    report.continuous_final = continuous.values.back();
    report.indicative_final = indicative.values.back();
    report.outperformance_pct = outperformance_pct(indicative, continuous);
    report.volatility_ratio = report_volatility_ratio(indicative, continuous);
    report.avg_confidence = avg_confidence;
    report.continuous = std::move(continuous);
    report.indicative = std::move(indicative);
    return report;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string strategy_detail(const ReportMeta& meta) {
    std::string detail = meta.strategy;
    if (meta.short_period && meta.long_period) {
        detail += " (short " + std::to_string(*meta.short_period) + ", long " +
                  std::to_string(*meta.long_period) + ")";
    } else if (meta.train_start) {
        detail += " (train start " + data::to_string(*meta.train_start) + ")";
    }
    return detail;
}

} // namespace

double std_dev(const std::vector<double>& values, int ddof) {
    if (ddof != 0 && ddof != 1) throw UsageError("ddof must be 0 or 1");
    if (values.size() < static_cast<std::size_t>(ddof) + 1) {
        throw TooFewValues("std_dev with ddof=" + std::to_string(ddof) + " requires at least " +
                           std::to_string(ddof + 1) + " values");
    }
    long double mean = 0;
    for (const double v : values) mean += v;
    mean /= static_cast<long double>(values.size());
    long double sq = 0;
    for (const double v : values) {
        const long double d = v - mean;
        sq += d * d;
    }
    const auto denom = static_cast<long double>(values.size() - static_cast<std::size_t>(ddof));
    return static_cast<double>(std::sqrt(static_cast<double>(sq / denom)));
}

double volatility_ratio(const EquityCurve& indicative, const EquityCurve& continuous) {
    if (indicative.values.size() != continuous.values.size()) {
        throw MisalignedCurves("curves differ in length");
    }
    if (indicative.values.size() < 2) throw TooFewValues("volatility ratio requires >= 2 days");
    const double denom = std_dev(continuous.values, 1);
    if (denom == 0) throw ZeroDenominator("continuous curve is constant");
    return std_dev(indicative.values, 1) / denom;
}

double outperformance_pct(const EquityCurve& indicative, const EquityCurve& continuous) {
    if (indicative.values.size() != continuous.values.size() || indicative.values.empty()) {
        throw MisalignedCurves("curves differ in length or are empty");
    }
    std::size_t above = 0;
    for (std::size_t i = 0; i < indicative.values.size(); ++i) {
        if (indicative.values[i] > continuous.values[i]) ++above;
    }
    return 100.0 * static_cast<double>(above) / static_cast<double>(indicative.values.size());
}

BacktestReport run_crossover(const data::PriceSeries& series, int short_period, int long_period) {
    if (short_period >= long_period) {
        throw indicators::PeriodOrderViolation("short period " + std::to_string(short_period) +
                                               " must be less than long period " +
                                               std::to_string(long_period));
    }
    if (series.bars.size() <= static_cast<std::size_t>(long_period)) {
        throw SeriesTooShort(series.ticker + " has " + std::to_string(series.bars.size()) +
                             " bars; the (" + std::to_string(short_period) + "," +
                             std::to_string(long_period) + ") crossover needs more than " +
                             std::to_string(long_period));
    }

    const auto prices = adjusted_closes(series);
    const auto short_sma = indicators::sma(prices, short_period, series.ticker);
    const auto long_sma = indicators::sma(prices, long_period, series.ticker);
    const auto [aligned_short, aligned_long] = indicators::align_crop(short_sma, long_sma);
    const auto diff = indicators::difference(aligned_short, aligned_long);
    const auto signals = indicators::crossover_signals(diff);

    const std::size_t warmup = static_cast<std::size_t>(long_period) - 1;
    const std::size_t days = diff.values.size();

    EquityCurve continuous{CurveLabel::Continuous, {}, {}};
    EquityCurve indicative{CurveLabel::Indicative, {}, {}};
    continuous.dates.reserve(days);
    continuous.values.reserve(days);
    for (std::size_t i = 0; i < days; ++i) {
        continuous.dates.push_back(prices[warmup + i].date);
        continuous.values.push_back(prices[warmup + i].value);
    }
    indicative.dates = continuous.dates;
    indicative.values.reserve(days);
    indicative.values.push_back(continuous.values.front());

    bool bought = diff.values.front().value > 0;
    for (std::size_t i = 1; i < days; ++i) {
        const double delta = continuous.values[i] - continuous.values[i - 1];
        indicative.values.push_back(indicative.values.back() + (bought ? delta : 0));
        if (signals.events[i] == indicators::Signal::Sell) bought = false;
        else if (signals.events[i] == indicators::Signal::Buy) bought = true;
    }

    return make_report(std::move(continuous), std::move(indicative), std::nullopt);
}

BacktestReport run_predictive(const data::PriceSeries& series, const PredictiveConfig& config,
                              const BarProbe& probe) {
    if (!(config.train_start < config.eval_start) || config.end < config.eval_start) {
        throw UsageError("predictive ranges must satisfy train start < evaluation start <= end");
    }

    const auto window = data::slice(series, {config.train_start, config.end});
    const auto& bars = window.bars;

    std::size_t eval_begin = 0;
    while (eval_begin < bars.size() && bars[eval_begin].date < config.eval_start) ++eval_begin;

    if (eval_begin < 30) {
        throw SeriesTooShort("training range has " + std::to_string(eval_begin) +
                             " bars; need at least 30");
    }
    const std::size_t eval_days = bars.size() - eval_begin;
    if (eval_days < 2) {
        throw SeriesTooShort("evaluation range has " + std::to_string(eval_days) +
                             " bars; need at least 2");
    }

    EquityCurve continuous{CurveLabel::Continuous, {}, {}};
    EquityCurve indicative{CurveLabel::Indicative, {}, {}};
    for (std::size_t i = eval_begin; i < bars.size(); ++i) {
        continuous.dates.push_back(bars[i].date);
        continuous.values.push_back(bars[i].adj_close);
    }
    indicative.dates = continuous.dates;
    indicative.values.push_back(continuous.values.front());

    std::vector<double> confidences;

    for (std::size_t r = 1; r < eval_days; ++r) {
        const std::size_t day = eval_begin + r; // series index being predicted
        const auto& predicted_date = bars[day].date;

        // Everything strictly before the predicted day, expanding window.
        models::FeatureMatrix labeled;
        std::vector<double> final_row;
        for (std::size_t i = 0; i < day; ++i) {
            if (probe) probe(bars[i].date, predicted_date);
            std::vector<double> row{bars[i].open,      bars[i].high,
                                    bars[i].low,       bars[i].close,
                                    bars[i].adj_close, static_cast<double>(bars[i].volume)};
            if (i + 1 < day) {
                labeled.rows.push_back(std::move(row));
                labeled.targets.push_back(bars[i + 1].adj_close);
            } else {
                final_row = std::move(row);
            }
        }
        const double last_known = bars[day - 1].adj_close;

        double prediction = 0;
        try {
            if (config.scale_features) {
                models::FeatureMatrix all;
                all.rows = labeled.rows;
                all.rows.push_back(final_row);
                const auto kind = config.model == PredictiveModel::Knn
                                      ? models::ScalerKind::MinMax
                                      : models::ScalerKind::Standardize;
                const auto scaler = models::fit_scaler(kind, all);
                labeled = models::apply_scaler(scaler, labeled);
                final_row = models::apply_scaler(scaler, final_row);
            }

            const std::uint64_t step_seed = config.seed + r;
            const auto split = models::train_test_split(labeled, 0.2, step_seed);

            std::vector<double> held_out;
            held_out.reserve(split.test.row_count());
            if (config.model == PredictiveModel::LinearRegression) {
                const auto model = models::fit_linear(split.train);
                for (const auto& row : split.test.rows) {
                    held_out.push_back(models::predict_linear(model, row));
                }
                prediction = models::predict_linear(model, final_row);
            } else {
                static const std::vector<int> kCandidates{2, 3, 4, 5, 6, 7, 8,
                                                          9, 10, 11, 12, 13, 14, 15};
                const auto grid = models::grid_search_k(split.train, kCandidates, 5, step_seed);
                const auto model = models::fit_knn(split.train, grid.chosen_k);
                for (const auto& row : split.test.rows) {
                    held_out.push_back(models::predict_knn(model, row));
                }
                prediction = models::predict_knn(model, final_row);
            }

            try {
                confidences.push_back(models::r2_score(held_out, split.test.targets));
            } catch (const models::ZeroVariance&) {
                // Held-out targets constant: confidence undefined for this step.
            }
        } catch (const Error& e) {
            if (e.cls() == ErrorClass::Model) {
                throw ModelError("evaluation day " + std::to_string(r) + " (" +
                                 data::to_string(predicted_date) + "): " + e.what());
            }
            throw;
        }

        const double delta = bars[day].adj_close - last_known;
        indicative.values.push_back(indicative.values.back() +
                                    (prediction > last_known ? delta : 0));
    }

    std::optional<double> avg_confidence;
    if (!confidences.empty()) {
        long double sum = 0;
        for (const double c : confidences) sum += c;
        avg_confidence = static_cast<double>(sum / confidences.size());
    }
    return make_report(std::move(continuous), std::move(indicative), avg_confidence);
}

std::string report_to_json(const BacktestReport& report, const ReportMeta& meta) {
    std::string out = "{\n";
    out += "  \"ticker\": \"" + json_escape(meta.ticker) + "\",\n";
    out += "  \"strategy\": \"" + json_escape(meta.strategy) + "\",\n";
    out += "  \"short\": " + (meta.short_period ? std::to_string(*meta.short_period) : "null") + ",\n";
    out += "  \"long\": " + (meta.long_period ? std::to_string(*meta.long_period) : "null") + ",\n";
    out += "  \"train_start\": " +
           (meta.train_start ? "\"" + data::to_string(*meta.train_start) + "\"" : "null") + ",\n";
    out += "  \"seed\": " + std::to_string(meta.seed) + ",\n";
    out += "  \"continuous_final\": " + format_double(report.continuous_final) + ",\n";
    out += "  \"indicative_final\": " + format_double(report.indicative_final) + ",\n";
    out += "  \"outperformance_pct\": " + format_double(report.outperformance_pct) + ",\n";
    out += "  \"volatility_ratio\": " + format_double(report.volatility_ratio) + ",\n";
    out += "  \"avg_confidence\": " +
           (report.avg_confidence ? format_double(*report.avg_confidence) : "null") + ",\n";
    out += "  \"curves\": {\n    \"dates\": [";
    for (std::size_t i = 0; i < report.continuous.dates.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + data::to_string(report.continuous.dates[i]) + "\"";
    }
    out += "],\n    \"continuous\": [";
    for (std::size_t i = 0; i < report.continuous.values.size(); ++i) {
        if (i) out += ", ";
        out += format_double(report.continuous.values[i]);
    }
    out += "],\n    \"indicative\": [";
    for (std::size_t i = 0; i < report.indicative.values.size(); ++i) {
        if (i) out += ", ";
        out += format_double(report.indicative.values[i]);
    }
    out += "]\n  }\n}\n";
    return out;
}

std::string report_block(const BacktestReport& report, const ReportMeta& meta) {
    std::string out;
    out += "Ticker: " + meta.ticker + "\n";
    out += "Strategy: " + strategy_detail(meta) + "\n";
    out += "Seed: " + std::to_string(meta.seed) + "\n";
    out += "Continuous Investing Final Price: " + format_double(report.continuous_final, 6) + "\n";
    out += "Indicative Investing Final Price: " + format_double(report.indicative_final, 6) + "\n";
    if (report.avg_confidence) {
        out += "AVG Model Confidence: " + format_double(*report.avg_confidence, 6) + "\n";
    }
    out += "Outperformance Percentage: " + format_double(report.outperformance_pct, 6) + "%\n";
    out += "Volatility Ratio: " + format_double(report.volatility_ratio, 6) + "\n";
    return out;
}

std::string curves_to_csv(const BacktestReport& report) {
    std::string out = "Date,Continuous,Indicative\n";
    for (std::size_t i = 0; i < report.continuous.dates.size(); ++i) {
        out += data::to_string(report.continuous.dates[i]);
        out += ',';
        out += format_double(report.continuous.values[i]);
        out += ',';
        out += format_double(report.indicative.values[i]);
        out += '\n';
    }
    return out;
}

} // namespace quantbench::backtest
