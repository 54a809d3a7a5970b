#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quantbench/errors.hpp"
#include "quantbench/market_data.hpp"

namespace quantbench::optimizer {

struct EmptyGrid : UsageError { using UsageError::UsageError; };
struct NoDataForTicker : DataError { using DataError::DataError; };
struct EmptyInput : ModelError { using ModelError::ModelError; };

struct SmaPair {
    int short_period = 0;
    int long_period = 0;

    auto operator<=>(const SmaPair&) const = default;
};

struct TrialRecord {
    std::string ticker;
    SmaPair pair;
    double outperformance_pct = 0;
    double volatility_ratio = 0;
};

struct SkippedTrial {
    std::string ticker;
    SmaPair pair;
    std::string reason;
};

struct GridResult {
    std::vector<TrialRecord> records;  // (ticker, pair) lexicographic
    std::vector<SkippedTrial> skipped; // same ordering
};

std::vector<SmaPair> enumerate_pairs(int short_min, int short_max, int long_min, int long_max);

// One run_crossover trial per (ticker, pair). Results land in preallocated
// slots indexed by (ticker, pair), so output order and values are identical
// for any worker count. workers <= 0 means the OpenMP default.
GridResult run_grid(const std::vector<data::PriceSeries>& series_list,
                    const std::vector<SmaPair>& pairs, int workers = 0);

// Plain-loop reference implementation; must produce bit-identical results.
GridResult run_grid_serial(const std::vector<data::PriceSeries>& series_list,
                           const std::vector<SmaPair>& pairs);

// Loads each ticker through the callback; tickers that fail to load have all
// their pairs recorded as skipped. Every ticker failing raises NoDataForTicker.
using SeriesLoader = std::function<data::PriceSeries(const std::string& ticker)>;
GridResult run_grid_fetch(const std::vector<std::string>& tickers, const SeriesLoader& loader,
                          const std::vector<SmaPair>& pairs, int workers = 0);

enum class GroupBy { Pair, Short, Long, RatioBucket };

struct PairAggregate {
    GroupBy grouping = GroupBy::Pair;
    SmaPair pair;      // set when grouping by Pair
    int key = 0;       // short period, long period, or ratio-bucket index otherwise
    double mean_outperformance_pct = 0;
    double mean_volatility_ratio = 0;
    std::size_t trials = 0;
};

std::vector<PairAggregate> aggregate(const std::vector<TrialRecord>& records, GroupBy group_by,
                                     double ratio_bucket_width = 0.25);

enum class RankMetric { OutperformanceDesc, VolatilityAsc };

struct RankingRow {
    int rank = 0;
    SmaPair pair;
    double metric = 0;
};

struct RankingTable {
    RankMetric metric = RankMetric::OutperformanceDesc;
    std::vector<RankingRow> rows;
};

RankingTable rank(const std::vector<PairAggregate>& aggregates, RankMetric metric);

struct ScatterPoint {
    double volatility_ratio = 0;
    double outperformance_pct = 0;
};

struct ScatterData {
    std::vector<ScatterPoint> points;           // one per pair aggregate
    std::optional<double> correlation;          // sample Pearson; missing if undefined
};

ScatterData scatter_export(const std::vector<TrialRecord>& records);

std::string trials_to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> trials_from_csv(const std::string& text);
std::string ranking_to_csv(const RankingTable& table);
std::string aggregates_to_csv(const std::vector<PairAggregate>& aggregates,
                              double ratio_bucket_width = 0.25);
std::string scatter_to_csv(const ScatterData& scatter);
std::string scatter_summary_json(const ScatterData& scatter);

} // namespace quantbench::optimizer
