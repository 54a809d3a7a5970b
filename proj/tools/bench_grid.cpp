// Times the OpenMP grid against the serial reference on synthetic series and
// checks that both produce identical results.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "quantbench/market_data.hpp"
#include "quantbench/optimizer.hpp"
#include "quantbench/rand.hpp"

namespace qb = quantbench;

namespace {

qb::data::PriceSeries random_walk(const std::string& ticker, int bars, std::uint64_t seed) {
    qb::Rng rng(seed);
    qb::data::PriceSeries series;
    series.ticker = ticker;
    qb::data::Date date{2015, 1, 1};
    double price = 100.0;
    for (int i = 0; i < bars; ++i) {
        price *= 1.0 + (rng.next_unit() - 0.49) * 0.02;
        qb::data::Bar bar;
        bar.date = date;
        bar.open = price * 0.995;
        bar.close = price * 1.002;
        bar.high = price * 1.01;
        bar.low = price * 0.99;
        bar.adj_close = price;
        bar.volume = 1000 + static_cast<long long>(rng.next_below(9000));
        series.bars.push_back(bar);
        date = qb::data::next_day(date);
    }
    return series;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    int tickers = 3;
    int bars = 1260;
    if (argc > 1) tickers = std::atoi(argv[1]);
    if (argc > 2) bars = std::atoi(argv[2]);
    if (tickers < 1 || bars < 200) {
        std::cerr << "usage: bench_grid [tickers >= 1] [bars >= 200]\n";
        return 1;
    }

    std::vector<qb::data::PriceSeries> series_list;
    for (int i = 0; i < tickers; ++i) {
        series_list.push_back(random_walk("SYN" + std::to_string(i), bars, 1000 + i));
    }
    const auto pairs = qb::optimizer::enumerate_pairs(5, 49, 10, 149);
    std::cout << "grid: " << tickers << " tickers x " << pairs.size() << " pairs on " << bars
              << " bars\n";

    const auto t_serial = std::chrono::steady_clock::now();
    const auto serial = qb::optimizer::run_grid_serial(series_list, pairs);
    const double serial_s = seconds_since(t_serial);
    std::cout << "serial:   " << serial_s << " s\n";

    const auto t_parallel = std::chrono::steady_clock::now();
    const auto parallel = qb::optimizer::run_grid(series_list, pairs);
    const double parallel_s = seconds_since(t_parallel);
    std::cout << "parallel: " << parallel_s << " s (speedup " << serial_s / parallel_s << "x)\n";

    if (serial.records.size() != parallel.records.size() ||
        serial.skipped.size() != parallel.skipped.size()) {
        std::cerr << "MISMATCH: result sizes differ\n";
        return 1;
    }
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        const auto& a = serial.records[i];
        const auto& b = parallel.records[i];
        if (a.ticker != b.ticker || !(a.pair == b.pair) ||
            a.outperformance_pct != b.outperformance_pct ||
            a.volatility_ratio != b.volatility_ratio) {
            std::cerr << "MISMATCH at record " << i << "\n";
            return 1;
        }
    }
    std::cout << "results identical\n";
    return 0;
}
