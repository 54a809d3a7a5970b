#include "quantbench/optimizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "quantbench/backtest.hpp"
#include "quantbench/num_format.hpp"

namespace quantbench::optimizer {

namespace {

struct TrialSlot {
    bool ok = false;
    bool skipped = false;
    TrialRecord record;
    SkippedTrial skip;
};

void run_one(const data::PriceSeries& series, const SmaPair& pair, TrialSlot& slot) {
    try {
        const auto report =
            backtest::run_crossover(series, pair.short_period, pair.long_period);
        slot.record = {series.ticker, pair, report.outperformance_pct, report.volatility_ratio};
        slot.ok = true;
    } catch (const std::exception& e) {
        slot.skip = {series.ticker, pair, e.what()};
        slot.skipped = true;
    }
}

GridResult run_grid_impl(const std::vector<data::PriceSeries>& series_list,
                         const std::vector<SmaPair>& pairs, int workers, bool parallel) {
    if (series_list.empty()) throw NoDataForTicker("no ticker series to optimize over");
    if (pairs.empty()) throw EmptyGrid("no SMA pairs requested");

    // Canonical (ticker, pair) lexicographic order, independent of input order.
    std::vector<const data::PriceSeries*> series;
    series.reserve(series_list.size());
    for (const auto& s : series_list) series.push_back(&s);
    std::stable_sort(series.begin(), series.end(),
                     [](const auto* a, const auto* b) { return a->ticker < b->ticker; });
    std::vector<SmaPair> sorted_pairs = pairs;
    std::sort(sorted_pairs.begin(), sorted_pairs.end());

    const std::size_t total = series.size() * sorted_pairs.size();
    std::vector<TrialSlot> slots(total);

    auto body = [&](std::size_t idx) {
        const std::size_t ti = idx / sorted_pairs.size();
        const std::size_t pi = idx % sorted_pairs.size();
        run_one(*series[ti], sorted_pairs[pi], slots[idx]);
    };

#ifdef _OPENMP
    if (parallel) {
        const int threads = workers > 0 ? workers : omp_get_max_threads();
        const auto total_ll = static_cast<long long>(total);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
        for (long long idx = 0; idx < total_ll; ++idx) {
            body(static_cast<std::size_t>(idx));
        }
    } else {
        for (std::size_t idx = 0; idx < total; ++idx) body(idx);
    }
#else
    (void)workers;
    (void)parallel;
    for (std::size_t idx = 0; idx < total; ++idx) body(idx);
#endif

    GridResult result;
    for (auto& slot : slots) {
        if (slot.ok) result.records.push_back(std::move(slot.record));
        else if (slot.skipped) result.skipped.push_back(std::move(slot.skip));
    }
    return result;
}

bool skip_key_less(const SkippedTrial& a, const SkippedTrial& b) {
    if (a.ticker != b.ticker) return a.ticker < b.ticker;
    return a.pair < b.pair;
}

struct Accumulator {
    long double outperformance = 0;
    long double volatility = 0;
    std::size_t count = 0;
};

} // namespace

std::vector<SmaPair> enumerate_pairs(int short_min, int short_max, int long_min, int long_max) {
    if (short_min < 1 || long_min < 1) throw UsageError("SMA period bounds must be positive");
    if (short_min > short_max || long_min > long_max) {
        throw UsageError("SMA period bounds must satisfy min <= max");
    }

    std::vector<SmaPair> pairs;
    for (int s = short_min; s <= short_max; ++s) {
        for (int l = std::max(long_min, s + 1); l <= long_max; ++l) {
            pairs.push_back({s, l});
        }
    }
    if (pairs.empty()) {
        throw EmptyGrid("no pairs with long > short in short [" + std::to_string(short_min) + "," +
                        std::to_string(short_max) + "] x long [" + std::to_string(long_min) + "," +
                        std::to_string(long_max) + "]");
    }
    return pairs;
}

GridResult run_grid(const std::vector<data::PriceSeries>& series_list,
                    const std::vector<SmaPair>& pairs, int workers) {
    return run_grid_impl(series_list, pairs, workers, true);
}

GridResult run_grid_serial(const std::vector<data::PriceSeries>& series_list,
                           const std::vector<SmaPair>& pairs) {
    return run_grid_impl(series_list, pairs, 1, false);
}

GridResult run_grid_fetch(const std::vector<std::string>& tickers, const SeriesLoader& loader,
                          const std::vector<SmaPair>& pairs, int workers) {
    if (tickers.empty()) throw UsageError("no tickers requested");
    if (pairs.empty()) throw EmptyGrid("no SMA pairs requested");

    std::vector<data::PriceSeries> loaded;
    std::vector<std::pair<std::string, std::string>> failures; // ticker, reason
    for (const auto& ticker : tickers) {
        try {
            loaded.push_back(loader(ticker));
        } catch (const std::exception& e) {
            failures.emplace_back(ticker, e.what());
        }
    }
    if (loaded.empty()) {
        throw NoDataForTicker("all " + std::to_string(tickers.size()) + " tickers failed to load");
    }

    auto result = run_grid(loaded, pairs, workers);

    std::vector<SmaPair> sorted_pairs = pairs;
    std::sort(sorted_pairs.begin(), sorted_pairs.end());
    for (const auto& [ticker, reason] : failures) {
        for (const auto& pair : sorted_pairs) {
            result.skipped.push_back({ticker, pair, "load failed: " + reason});
        }
    }
    std::stable_sort(result.skipped.begin(), result.skipped.end(), skip_key_less);
    return result;
}

std::vector<PairAggregate> aggregate(const std::vector<TrialRecord>& records, GroupBy group_by,
                                     double ratio_bucket_width) {
    if (records.empty()) throw EmptyInput("aggregate requires records");
    if (group_by == GroupBy::RatioBucket && !(ratio_bucket_width > 0)) {
        throw UsageError("ratio bucket width must be positive");
    }

    std::map<std::pair<int, int>, Accumulator> groups;
    for (const auto& record : records) {
        std::pair<int, int> key;
        switch (group_by) {
            case GroupBy::Pair:
                key = {record.pair.short_period, record.pair.long_period};
                break;
            case GroupBy::Short:
                key = {record.pair.short_period, 0};
                break;
            case GroupBy::Long:
                key = {record.pair.long_period, 0};
                break;
            case GroupBy::RatioBucket:
                key = {static_cast<int>(std::floor(
                          static_cast<double>(record.pair.long_period) /
                          static_cast<double>(record.pair.short_period) / ratio_bucket_width)),
                      0};
                break;
        }
        auto& acc = groups[key];
        acc.outperformance += record.outperformance_pct;
        acc.volatility += record.volatility_ratio;
        ++acc.count;
    }

    std::vector<PairAggregate> out;
    out.reserve(groups.size());
    for (const auto& [key, acc] : groups) {
        PairAggregate agg;
        agg.grouping = group_by;
        if (group_by == GroupBy::Pair) {
            agg.pair = {key.first, key.second};
        }
        agg.key = key.first;
        agg.mean_outperformance_pct = static_cast<double>(acc.outperformance / acc.count);
        agg.mean_volatility_ratio = static_cast<double>(acc.volatility / acc.count);
        agg.trials = acc.count;
        out.push_back(agg);
    }
    return out;
}

RankingTable rank(const std::vector<PairAggregate>& aggregates, RankMetric metric) {
    if (aggregates.empty()) throw EmptyInput("rank requires aggregates");
    for (const auto& agg : aggregates) {
        if (agg.grouping != GroupBy::Pair) {
            throw UsageError("rank requires aggregates keyed by pair");
        }
    }

    RankingTable table;
    table.metric = metric;
    table.rows.reserve(aggregates.size());
    for (const auto& agg : aggregates) {
        const double value = metric == RankMetric::OutperformanceDesc
                                 ? agg.mean_outperformance_pct
                                 : agg.mean_volatility_ratio;
        table.rows.push_back({0, agg.pair, value});
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [metric](const RankingRow& a, const RankingRow& b) {
                  if (a.metric != b.metric) {
                      return metric == RankMetric::OutperformanceDesc ? a.metric > b.metric
                                                                      : a.metric < b.metric;
                  }
                  return a.pair < b.pair;
              });
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        table.rows[i].rank = static_cast<int>(i + 1);
    }
    return table;
}

ScatterData scatter_export(const std::vector<TrialRecord>& records) {
    const auto by_pair = aggregate(records, GroupBy::Pair);

    ScatterData scatter;
    scatter.points.reserve(by_pair.size());
    for (const auto& agg : by_pair) {
        scatter.points.push_back({agg.mean_volatility_ratio, agg.mean_outperformance_pct});
    }

    const std::size_t n = scatter.points.size();
    if (n >= 2) {
        long double mean_x = 0;
        long double mean_y = 0;
        for (const auto& p : scatter.points) {
            mean_x += p.volatility_ratio;
            mean_y += p.outperformance_pct;
        }
        mean_x /= n;
        mean_y /= n;
        long double sxy = 0;
        long double sxx = 0;
        long double syy = 0;
        for (const auto& p : scatter.points) {
            const long double dx = p.volatility_ratio - mean_x;
            const long double dy = p.outperformance_pct - mean_y;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        if (sxx > 0 && syy > 0) {
            scatter.correlation =
                static_cast<double>(sxy / std::sqrt(static_cast<double>(sxx)) /
                                    std::sqrt(static_cast<double>(syy)));
        }
    }
    return scatter;
}

std::string trials_to_csv(const std::vector<TrialRecord>& records) {
    std::string out = "Ticker,Short,Long,OutperformancePct,VolatilityRatio\n";
    for (const auto& r : records) {
        out += r.ticker;
        out += ',';
        out += std::to_string(r.pair.short_period);
        out += ',';
        out += std::to_string(r.pair.long_period);
        out += ',';
        out += format_double(r.outperformance_pct);
        out += ',';
        out += format_double(r.volatility_ratio);
        out += '\n';
    }
    return out;
}

std::vector<TrialRecord> trials_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw data::MalformedCsv("trial CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "Ticker,Short,Long,OutperformancePct,VolatilityRatio") {
        throw data::MalformedCsv("unexpected trial CSV header: " + line);
    }

    std::vector<TrialRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 5) {
            throw data::MalformedCsv("trial CSV line " + std::to_string(line_no) +
                                     " has " + std::to_string(fields.size()) + " fields");
        }

        TrialRecord record;
        record.ticker = fields[0];
        auto parse_int = [&](const std::string& s, int& value) {
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
            if (ec != std::errc{} || ptr != s.data() + s.size()) {
                throw data::MalformedCsv("trial CSV line " + std::to_string(line_no) +
                                         ": bad integer \"" + s + "\"");
            }
        };
        auto parse_num = [&](const std::string& s, double& value) {
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
            if (ec != std::errc{} || ptr != s.data() + s.size()) {
                throw data::MalformedCsv("trial CSV line " + std::to_string(line_no) +
                                         ": bad number \"" + s + "\"");
            }
        };
        parse_int(fields[1], record.pair.short_period);
        parse_int(fields[2], record.pair.long_period);
        parse_num(fields[3], record.outperformance_pct);
        parse_num(fields[4], record.volatility_ratio);
        records.push_back(std::move(record));
    }
    return records;
}

std::string ranking_to_csv(const RankingTable& table) {
    std::string out = "Rank,Short,Long,Metric\n";
    for (const auto& row : table.rows) {
        out += std::to_string(row.rank);
        out += ',';
        out += std::to_string(row.pair.short_period);
        out += ',';
        out += std::to_string(row.pair.long_period);
        out += ',';
        out += format_double(row.metric);
        out += '\n';
    }
    return out;
}

std::string aggregates_to_csv(const std::vector<PairAggregate>& aggregates,
                              double ratio_bucket_width) {
    if (aggregates.empty()) throw EmptyInput("no aggregates to serialize");
    const auto grouping = aggregates.front().grouping;

    std::string out;
    switch (grouping) {
        case GroupBy::Pair: out = "Short,Long,MeanOutperformancePct,MeanVolatilityRatio,Trials\n"; break;
        case GroupBy::Short: out = "Short,MeanOutperformancePct,MeanVolatilityRatio,Trials\n"; break;
        case GroupBy::Long: out = "Long,MeanOutperformancePct,MeanVolatilityRatio,Trials\n"; break;
        case GroupBy::RatioBucket:
            out = "RatioLow,RatioHigh,MeanOutperformancePct,MeanVolatilityRatio,Trials\n";
            break;
    }
    for (const auto& agg : aggregates) {
        switch (grouping) {
            case GroupBy::Pair:
                out += std::to_string(agg.pair.short_period) + ',' +
                       std::to_string(agg.pair.long_period);
                break;
            case GroupBy::Short:
            case GroupBy::Long:
                out += std::to_string(agg.key);
                break;
            case GroupBy::RatioBucket:
                out += format_double(agg.key * ratio_bucket_width) + ',' +
                       format_double((agg.key + 1) * ratio_bucket_width);
                break;
        }
        out += ',';
        out += format_double(agg.mean_outperformance_pct);
        out += ',';
        out += format_double(agg.mean_volatility_ratio);
        out += ',';
        out += std::to_string(agg.trials);
        out += '\n';
    }
    return out;
}

std::string scatter_to_csv(const ScatterData& scatter) {
    std::string out = "VolatilityRatio,OutperformancePct\n";
    for (const auto& p : scatter.points) {
        out += format_double(p.volatility_ratio);
        out += ',';
        out += format_double(p.outperformance_pct);
        out += '\n';
    }
    return out;
}

std::string scatter_summary_json(const ScatterData& scatter) {
    std::string out = "{\"points\": " + std::to_string(scatter.points.size()) + ", \"correlation\": ";
    out += scatter.correlation ? format_double(*scatter.correlation) : "null";
    out += "}\n";
    return out;
}

} // namespace quantbench::optimizer
