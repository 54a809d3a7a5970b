#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quantbench/errors.hpp"
#include "quantbench/market_data.hpp"

namespace quantbench::backtest {

struct SeriesTooShort : ModelError { using ModelError::ModelError; };
struct TooFewValues : ModelError { using ModelError::ModelError; };
struct ZeroDenominator : ModelError { using ModelError::ModelError; };
struct MisalignedCurves : ModelError { using ModelError::ModelError; };

enum class CurveLabel { Continuous, Indicative };

struct EquityCurve {
    CurveLabel label = CurveLabel::Continuous;
    std::vector<data::Date> dates;
    std::vector<double> values;
};

enum class PredictiveModel { LinearRegression, Knn };

struct PredictiveConfig {
    PredictiveModel model = PredictiveModel::LinearRegression;
    data::Date train_start;
    data::Date eval_start;
    data::Date end;
    std::uint64_t seed = 0;
    bool scale_features = true; // off reproduces fitting on raw feature space
};

struct BacktestReport {
    double continuous_final = 0;
    double indicative_final = 0;
    double outperformance_pct = 0;
    double volatility_ratio = 0;
    std::optional<double> avg_confidence; // predictive strategies only
    EquityCurve continuous;
    EquityCurve indicative;
};

// Called for every bar read while forming a prediction, before the truth for
// the predicted day is revealed.
using BarProbe = std::function<void(const data::Date& accessed, const data::Date& predicted)>;

BacktestReport run_crossover(const data::PriceSeries& series, int short_period, int long_period);
BacktestReport run_predictive(const data::PriceSeries& series, const PredictiveConfig& config,
                              const BarProbe& probe = {});

double std_dev(const std::vector<double>& values, int ddof);
double volatility_ratio(const EquityCurve& indicative, const EquityCurve& continuous);
double outperformance_pct(const EquityCurve& indicative, const EquityCurve& continuous);

struct ReportMeta {
    std::string ticker;
    std::string strategy; // "crossover", "linreg", "knn"
    std::optional<int> short_period;
    std::optional<int> long_period;
    std::optional<data::Date> train_start;
    std::uint64_t seed = 0;
};

std::string report_to_json(const BacktestReport& report, const ReportMeta& meta);
std::string report_block(const BacktestReport& report, const ReportMeta& meta);
std::string curves_to_csv(const BacktestReport& report);

} // namespace quantbench::backtest
