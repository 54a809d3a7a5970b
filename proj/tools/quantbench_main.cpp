#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "quantbench/backtest.hpp"
#include "quantbench/errors.hpp"
#include "quantbench/market_data.hpp"
#include "quantbench/num_format.hpp"
#include "quantbench/optimizer.hpp"
#include "quantbench/provider.hpp"
#include "quantbench/svg.hpp"

namespace fs = std::filesystem;
namespace qb = quantbench;

namespace {

struct Options {
    std::string ticker;
    std::vector<std::string> tickers;
    std::string tickers_file;
    std::string start;
    std::string end;
    std::string train_start;
    std::string strategy;
    int short_period = 0;
    int long_period = 0;
    bool raw_features = false;
    std::string provider_url;
    std::string cache_dir;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::string format;
    bool plot = false;
    int workers = 0;
    int short_min = 5;
    int short_max = 49;
    int long_min = 10;
    int long_max = 149;
    std::string config_file;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--provider-url", o.provider_url, "Base URL of the history provider");
    cmd->add_option("--cache-dir", o.cache_dir,
                    "CSV cache directory (default: $QUANTBENCH_CACHE_DIR or .quantbench-cache)");
    cmd->add_option("--out-dir", o.out_dir, "Directory for report artifacts");
    cmd->add_option("--seed", o.seed, "Random seed for splits and folds");
    cmd->add_option("--format", o.format, "Stdout payload: json or csv (default: summary block)");
    cmd->add_flag("--plot", o.plot, "Also write an SVG chart");
    cmd->add_option("--config", o.config_file, "JSON config file; flags override its values");
}

qb::data::Date parse_date_flag(const std::string& text, const char* flag) {
    const auto date = qb::data::parse_date(text);
    if (!date) {
        throw qb::UsageError(std::string(flag) + " must be a valid YYYY-MM-DD date, got \"" +
                             text + "\"");
    }
    return *date;
}

void merge_config(const CLI::App* cmd, Options& o) {
    if (o.config_file.empty()) return;
    std::ifstream in(o.config_file);
    if (!in) throw qb::UsageError("cannot open config file " + o.config_file);
    nlohmann::json cfg;
    try {
        in >> cfg;
    } catch (const nlohmann::json::parse_error& e) {
        throw qb::UsageError("config file " + o.config_file + " is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) throw qb::UsageError("config file must hold a JSON object");

    auto unset = [cmd](const char* flag) {
        return cmd->get_option_no_throw(flag) != nullptr && cmd->count(flag) == 0;
    };
    for (const auto& [key, value] : cfg.items()) {
        try {
            if (key == "provider_url") {
                if (unset("--provider-url")) o.provider_url = value.get<std::string>();
            } else if (key == "cache_dir") {
                if (unset("--cache-dir")) o.cache_dir = value.get<std::string>();
            } else if (key == "out_dir") {
                if (unset("--out-dir")) o.out_dir = value.get<std::string>();
            } else if (key == "seed") {
                if (unset("--seed")) o.seed = value.get<std::uint64_t>();
            } else if (key == "workers") {
                if (unset("--workers")) o.workers = value.get<int>();
            } else if (key == "format") {
                if (unset("--format")) o.format = value.get<std::string>();
            } else {
                throw qb::UsageError("unknown config key \"" + key + "\"");
            }
        } catch (const nlohmann::json::exception& e) {
            throw qb::UsageError("config key \"" + key + "\" has the wrong type: " + e.what());
        }
    }
}

std::string resolve_cache_dir(const Options& o) {
    if (!o.cache_dir.empty()) return o.cache_dir;
    if (const char* env = std::getenv("QUANTBENCH_CACHE_DIR"); env && *env) return env;
    return ".quantbench-cache";
}

void check_format(const Options& o) {
    if (!o.format.empty() && o.format != "json" && o.format != "csv") {
        throw qb::UsageError("--format must be json or csv, got \"" + o.format + "\"");
    }
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (const char c : name) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    }
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qb::DataError("cannot write " + path.string());
    out << content;
    if (!out) throw qb::DataError("failed while writing " + path.string());
}

int cmd_fetch(const Options& o) {
    const auto start = parse_date_flag(o.start, "--start");
    const auto end = parse_date_flag(o.end, "--end");
    if (o.ticker.empty()) throw qb::UsageError("--ticker must be non-empty");
    if (end < start) throw qb::UsageError("--start must not be after --end");

    qb::data::ProviderClient client({o.provider_url, resolve_cache_dir(o)});
    const qb::data::DateRange range{start, end};
    const auto series = client.fetch_history(o.ticker, range);
    std::cout << series.ticker << ": " << series.bars.size() << " bars ("
              << series.dropped_rows << " rows dropped) cached at "
              << client.cache_file(o.ticker, range).string() << "\n";
    return 0;
}

int cmd_backtest(const Options& o, const CLI::App* cmd) {
    check_format(o);
    const auto eval_start = parse_date_flag(o.start, "--start");
    const auto end = parse_date_flag(o.end, "--end");
    if (o.ticker.empty()) throw qb::UsageError("--ticker must be non-empty");
    if (end < eval_start) throw qb::UsageError("--start must not be after --end");

    const bool crossover = o.strategy == "crossover";
    if (!crossover && o.strategy != "linreg" && o.strategy != "knn") {
        throw qb::UsageError("--strategy must be crossover, linreg, or knn");
    }

    qb::backtest::ReportMeta meta;
    meta.ticker = o.ticker;
    meta.strategy = o.strategy;
    meta.seed = o.seed;

    qb::data::DateRange fetch_range{eval_start, end};
    std::optional<qb::backtest::PredictiveConfig> predictive;
    if (crossover) {
        if (cmd->count("--short") == 0 || cmd->count("--long") == 0) {
            throw qb::UsageError("crossover requires --short and --long");
        }
        if (o.short_period < 1) throw qb::UsageError("--short must be at least 1");
        if (o.short_period >= o.long_period) {
            throw qb::UsageError("--short must be less than --long");
        }
        meta.short_period = o.short_period;
        meta.long_period = o.long_period;
    } else {
        if (cmd->count("--train-start") == 0) {
            throw qb::UsageError(o.strategy + " requires --train-start");
        }
        const auto train_start = parse_date_flag(o.train_start, "--train-start");
        if (!(train_start < eval_start)) {
            throw qb::UsageError("--train-start must be before --start");
        }
        meta.train_start = train_start;
        fetch_range.start = train_start;

        qb::backtest::PredictiveConfig config;
        config.model = o.strategy == "knn" ? qb::backtest::PredictiveModel::Knn
                                           : qb::backtest::PredictiveModel::LinearRegression;
        config.train_start = train_start;
        config.eval_start = eval_start;
        config.end = end;
        config.seed = o.seed;
        config.scale_features = !o.raw_features;
        predictive = config;
    }

    qb::data::ProviderClient client({o.provider_url, resolve_cache_dir(o)});
    const auto series =
        qb::data::slice(client.fetch_history(o.ticker, fetch_range), fetch_range);

    const auto report = crossover
                            ? qb::backtest::run_crossover(series, o.short_period, o.long_period)
                            : qb::backtest::run_predictive(series, *predictive);

    std::string slug = sanitize(o.ticker) + "_" + o.strategy;
    if (crossover) {
        slug += "_" + std::to_string(o.short_period) + "_" + std::to_string(o.long_period);
    }
    fs::create_directories(o.out_dir);
    const auto json_text = qb::backtest::report_to_json(report, meta);
    const auto curves_text = qb::backtest::curves_to_csv(report);
    write_file(fs::path(o.out_dir) / (slug + "_report.json"), json_text);
    write_file(fs::path(o.out_dir) / (slug + "_curves.csv"), curves_text);
    if (o.plot) {
        write_file(fs::path(o.out_dir) / (slug + "_curves.svg"),
                   qb::svg::line_chart(report.continuous.dates, report.continuous.values,
                                       report.indicative.values));
    }

    if (o.format == "json") std::cout << json_text;
    else if (o.format == "csv") std::cout << curves_text;
    else std::cout << qb::backtest::report_block(report, meta);
    return 0;
}

void print_ranking(const qb::optimizer::RankingTable& table, const std::string& title) {
    std::cout << title << "\n";
    const auto& rows = table.rows;
    const std::size_t head = std::min<std::size_t>(5, rows.size());
    for (std::size_t i = 0; i < head; ++i) {
        std::cout << "  " << rows[i].rank << "  (" << rows[i].pair.short_period << ","
                  << rows[i].pair.long_period << ")  " << qb::format_double(rows[i].metric, 6)
                  << "\n";
    }
    if (rows.size() > head) {
        std::cout << "  ...\n";
        const std::size_t tail_start = std::max(head, rows.size() - 5);
        for (std::size_t i = tail_start; i < rows.size(); ++i) {
            std::cout << "  " << rows[i].rank << "  (" << rows[i].pair.short_period << ","
                      << rows[i].pair.long_period << ")  "
                      << qb::format_double(rows[i].metric, 6) << "\n";
        }
    }
}

int cmd_optimize(const Options& o, const CLI::App* cmd) {
    check_format(o);
    const auto start = parse_date_flag(o.start, "--start");
    const auto end = parse_date_flag(o.end, "--end");
    if (end < start) throw qb::UsageError("--start must not be after --end");
    if (o.workers < 0) throw qb::UsageError("--workers must be non-negative");

    std::vector<std::string> tickers = o.tickers;
    if (cmd->count("--tickers-file") > 0) {
        std::ifstream in(o.tickers_file);
        if (!in) throw qb::UsageError("cannot open tickers file " + o.tickers_file);
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            std::size_t first = 0;
            while (first < line.size() && line[first] == ' ') ++first;
            line = line.substr(first);
            if (!line.empty() && line[0] != '#') tickers.push_back(line);
        }
    }
    if (tickers.empty()) {
        throw qb::UsageError("no tickers: pass --ticker or a non-empty --tickers-file");
    }

    const auto pairs =
        qb::optimizer::enumerate_pairs(o.short_min, o.short_max, o.long_min, o.long_max);

    const qb::data::DateRange range{start, end};
    qb::data::ProviderClient client({o.provider_url, resolve_cache_dir(o)});
    const auto loader = [&client, &range](const std::string& ticker) {
        return qb::data::slice(client.fetch_history(ticker, range), range);
    };

    const auto grid = qb::optimizer::run_grid_fetch(tickers, loader, pairs, o.workers);

    fs::create_directories(o.out_dir);
    const fs::path out_dir(o.out_dir);
    write_file(out_dir / "trials.csv", qb::optimizer::trials_to_csv(grid.records));

    std::optional<qb::optimizer::RankingTable> by_outperformance;
    std::optional<qb::optimizer::RankingTable> by_volatility;
    std::optional<qb::optimizer::ScatterData> scatter;
    if (!grid.records.empty()) {
        const auto pair_aggs = qb::optimizer::aggregate(grid.records, qb::optimizer::GroupBy::Pair);
        by_outperformance =
            qb::optimizer::rank(pair_aggs, qb::optimizer::RankMetric::OutperformanceDesc);
        by_volatility = qb::optimizer::rank(pair_aggs, qb::optimizer::RankMetric::VolatilityAsc);
        scatter = qb::optimizer::scatter_export(grid.records);

        write_file(out_dir / "ranking_outperformance.csv",
                   qb::optimizer::ranking_to_csv(*by_outperformance));
        write_file(out_dir / "ranking_volatility.csv",
                   qb::optimizer::ranking_to_csv(*by_volatility));
        write_file(out_dir / "aggregates_short.csv",
                   qb::optimizer::aggregates_to_csv(
                       qb::optimizer::aggregate(grid.records, qb::optimizer::GroupBy::Short)));
        write_file(out_dir / "aggregates_long.csv",
                   qb::optimizer::aggregates_to_csv(
                       qb::optimizer::aggregate(grid.records, qb::optimizer::GroupBy::Long)));
        write_file(out_dir / "aggregates_ratio.csv",
                   qb::optimizer::aggregates_to_csv(
                       qb::optimizer::aggregate(grid.records, qb::optimizer::GroupBy::RatioBucket)));
        write_file(out_dir / "scatter.csv", qb::optimizer::scatter_to_csv(*scatter));
        write_file(out_dir / "scatter_summary.json", qb::optimizer::scatter_summary_json(*scatter));
        if (o.plot) {
            std::vector<std::pair<double, double>> points;
            points.reserve(scatter->points.size());
            for (const auto& p : scatter->points) {
                points.emplace_back(p.volatility_ratio, p.outperformance_pct);
            }
            write_file(out_dir / "scatter.svg",
                       qb::svg::scatter_chart(points, "volatility ratio", "outperformance %"));
        }
    }

    std::cout << "Seed: " << o.seed << "\n";
    std::cout << "Tickers: " << tickers.size() << " requested\n";
    std::cout << "Pairs: " << pairs.size() << "\n";
    std::cout << "Trials: " << grid.records.size() << " completed, " << grid.skipped.size()
              << " skipped\n";
    if (by_outperformance) {
        std::cout << "\n";
        print_ranking(*by_outperformance, "Ranking by mean outperformance % (best first):");
        print_ranking(*by_volatility, "Ranking by mean volatility ratio (lowest first):");
        std::cout << "Correlation (volatility ratio vs outperformance %): "
                  << (scatter->correlation ? qb::format_double(*scatter->correlation, 6)
                                           : std::string("undefined"))
                  << "\n";
    }
    if (!grid.skipped.empty()) {
        std::cout << "\nSkipped trials:\n";
        std::map<std::pair<std::string, std::string>, std::size_t> grouped;
        for (const auto& skip : grid.skipped) ++grouped[{skip.ticker, skip.reason}];
        for (const auto& [key, count] : grouped) {
            std::cout << "  " << key.first << ": " << count << " trial"
                      << (count == 1 ? "" : "s") << " (" << key.second << ")\n";
        }
    }
    std::cout << "Artifacts written to " << o.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Backtesting and SMA parameter-optimization toolkit"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.\n"
               "QUANTBENCH_CACHE_DIR sets the default cache directory.");

    Options o;

    auto* fetch = app.add_subcommand("fetch", "Download and cache a ticker's history");
    fetch->add_option("--ticker", o.ticker, "Ticker symbol")->required();
    fetch->add_option("--start", o.start, "Range start, YYYY-MM-DD")->required();
    fetch->add_option("--end", o.end, "Range end, YYYY-MM-DD")->required();
    add_common(fetch, o);

    auto* backtest = app.add_subcommand("backtest", "Run one strategy over one ticker");
    backtest->add_option("--ticker", o.ticker, "Ticker symbol")->required();
    backtest->add_option("--strategy", o.strategy, "crossover, linreg, or knn")->required();
    backtest->add_option("--start", o.start, "Evaluation start, YYYY-MM-DD")->required();
    backtest->add_option("--end", o.end, "Evaluation end, YYYY-MM-DD")->required();
    backtest->add_option("--short", o.short_period, "Short SMA period (crossover)");
    backtest->add_option("--long", o.long_period, "Long SMA period (crossover)");
    backtest->add_option("--train-start", o.train_start, "Training start (linreg/knn)");
    backtest->add_flag("--raw-features", o.raw_features,
                       "Fit predictive models on unscaled features");
    add_common(backtest, o);

    auto* optimize = app.add_subcommand("optimize", "Grid-search SMA pairs over many tickers");
    optimize->add_option("--ticker", o.tickers, "Ticker symbol (repeatable)");
    optimize->add_option("--tickers-file", o.tickers_file, "File with one ticker per line");
    optimize->add_option("--start", o.start, "Range start, YYYY-MM-DD")->required();
    optimize->add_option("--end", o.end, "Range end, YYYY-MM-DD")->required();
    optimize->add_option("--short-min", o.short_min, "Smallest short period (default 5)");
    optimize->add_option("--short-max", o.short_max, "Largest short period (default 49)");
    optimize->add_option("--long-min", o.long_min, "Smallest long period (default 10)");
    optimize->add_option("--long-max", o.long_max, "Largest long period (default 149)");
    optimize->add_option("--workers", o.workers, "Worker threads (default: all cores)");
    add_common(optimize, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(fetch)) {
            merge_config(fetch, o);
            return cmd_fetch(o);
        }
        if (app.got_subcommand(backtest)) {
            merge_config(backtest, o);
            return cmd_backtest(o, backtest);
        }
        merge_config(optimize, o);
        return cmd_optimize(o, optimize);
    } catch (const qb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qb::exit_code_for(e.cls());
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}
