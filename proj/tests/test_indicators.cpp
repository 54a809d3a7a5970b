#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "quantbench/indicators.hpp"
#include "test_util.hpp"

using namespace quantbench;
using indicators::Signal;

namespace {

indicators::DifferenceSeries diff_of(const std::vector<double>& values) {
    return {testutil::make_values(values)};
}

std::vector<double> raw(const indicators::SmaSeries& series) {
    std::vector<double> out;
    for (const auto& v : series.values) out.push_back(v.value);
    return out;
}

} // namespace

TEST_CASE("sma matches the hand-worked five-day example") {
    const auto result = indicators::sma(testutil::make_values({20, 22, 24, 25, 23, 22, 27}), 5);
    REQUIRE(result.values.size() == 3);
    CHECK(result.values[0].value == doctest::Approx(22.8).epsilon(1e-9));
    CHECK(result.values[1].value == doctest::Approx(23.2).epsilon(1e-9));
    CHECK(result.values[2].value == doctest::Approx(24.2).epsilon(1e-9));
    CHECK(result.period == 5);
    // First output sits on the 5th bar's date.
    CHECK(result.values[0].date == data::Date{2020, 1, 5});
}

TEST_CASE("sma with period 1 is the identity") {
    const std::vector<double> prices{3.5, 2.0, 9.25, 4.0};
    const auto result = indicators::sma(testutil::make_values(prices), 1);
    CHECK(raw(result) == prices);
}

TEST_CASE("sma with period equal to length gives one value") {
    std::vector<double> prices(10);
    std::iota(prices.begin(), prices.end(), 1.0);
    const auto result = indicators::sma(testutil::make_values(prices), 10);
    REQUIRE(result.values.size() == 1);
    CHECK(result.values[0].value == doctest::Approx(5.5).epsilon(1e-12));
}

TEST_CASE("sma rejects bad periods") {
    const auto prices = testutil::make_values({1, 2, 3});
    CHECK_THROWS_AS(indicators::sma(prices, 0), indicators::ZeroPeriod);
    CHECK_THROWS_AS(indicators::sma(prices, -2), indicators::ZeroPeriod);
    CHECK_THROWS_AS(indicators::sma(prices, 4), indicators::PeriodTooLong);
}

TEST_CASE("sma agrees with the naive windowed mean on long random series") {
    const auto series = testutil::random_walk_series("RW", 10000, 42);
    std::vector<double> closes;
    for (const auto& bar : series.bars) closes.push_back(bar.adj_close);
    for (const int period : {2, 5, 17, 200}) {
        const auto fast = raw(indicators::sma(series, period));
        const auto naive = testutil::naive_sma(closes, period);
        REQUIRE(fast.size() == naive.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(fast[i] == doctest::Approx(naive[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("sma is translation-equivariant") {
    const auto series = testutil::random_walk_series("RW", 500, 9);
    std::vector<double> closes, shifted;
    for (const auto& bar : series.bars) {
        closes.push_back(bar.adj_close);
        shifted.push_back(bar.adj_close + 250.0);
    }
    const auto base = raw(indicators::sma(testutil::make_values(closes), 20));
    const auto moved = raw(indicators::sma(testutil::make_values(shifted), 20));
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(moved[i] == doctest::Approx(base[i] + 250.0).epsilon(1e-9));
    }
}

TEST_CASE("sma is scale-equivariant and signals ignore positive scaling") {
    const auto series = testutil::random_walk_series("RW", 400, 11);
    std::vector<double> closes, scaled;
    for (const auto& bar : series.bars) {
        closes.push_back(bar.adj_close);
        scaled.push_back(bar.adj_close * 4.0); // power of two: exact in binary fp
    }
    const auto base = raw(indicators::sma(testutil::make_values(closes), 12));
    const auto big = raw(indicators::sma(testutil::make_values(scaled), 12));
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(big[i] == base[i] * 4.0);

    auto signals_for = [](const std::vector<double>& prices) {
        const auto values = testutil::make_values(prices);
        const auto [s, l] = indicators::align_crop(indicators::sma(values, 5),
                                                   indicators::sma(values, 12));
        return indicators::crossover_signals(indicators::difference(s, l)).events;
    };
    CHECK(signals_for(closes) == signals_for(scaled));
}

TEST_CASE("monotone series never fire the opposing signal") {
    std::vector<double> up, down;
    quantbench::Rng rng(5);
    double a = 100, b = 100;
    for (int i = 0; i < 300; ++i) {
        a += 0.01 + rng.next_unit();
        b = std::max(0.5, b - 0.01 - rng.next_unit() * 0.2);
        up.push_back(a);
        down.push_back(b);
    }
    auto run = [](const std::vector<double>& prices) {
        const auto values = testutil::make_values(prices);
        const auto [s, l] =
            indicators::align_crop(indicators::sma(values, 7), indicators::sma(values, 30));
        const auto diff = indicators::difference(s, l);
        return std::pair{diff, indicators::crossover_signals(diff)};
    };
    const auto [up_diff, up_signals] = run(up);
    for (const auto& v : up_diff.values) CHECK(v.value > 0);
    for (const auto e : up_signals.events) CHECK(e != Signal::Sell);
    const auto [down_diff, down_signals] = run(down);
    for (const auto& v : down_diff.values) CHECK(v.value < 0);
    for (const auto e : down_signals.events) CHECK(e != Signal::Buy);
}

TEST_CASE("align_crop truncates to the long warmup") {
    const auto values = testutil::make_values({10, 11, 12, 11, 10, 9});
    const auto short_sma = indicators::sma(values, 2);
    const auto long_sma = indicators::sma(values, 3);
    const auto [s, l] = indicators::align_crop(short_sma, long_sma);
    REQUIRE(s.values.size() == 4);
    REQUIRE(l.values.size() == 4);
    CHECK(s.values[0].date == l.values[0].date);
    CHECK(s.values[0].date == data::Date{2020, 1, 3}); // third bar
    for (std::size_t i = 0; i < 4; ++i) CHECK(s.values[i].date == l.values[i].date);

    SUBCASE("idempotent on aligned inputs") {
        const auto [s2, l2] = indicators::align_crop(s, l);
        CHECK(raw(s2) == raw(s));
        CHECK(raw(l2) == raw(l));
    }
}

TEST_CASE("align_crop validates its inputs") {
    const auto values = testutil::make_values({10, 11, 12, 11, 10, 9});
    const auto five = indicators::sma(values, 5);
    const auto three = indicators::sma(values, 3);
    CHECK_THROWS_AS(indicators::align_crop(five, three), indicators::PeriodOrderViolation);
    CHECK_THROWS_AS(indicators::align_crop(three, three), indicators::PeriodOrderViolation);

    auto foreign = indicators::sma(values, 2, "OTHER");
    auto local = indicators::sma(values, 5, "MINE");
    CHECK_THROWS_AS(indicators::align_crop(foreign, local), indicators::MismatchedSource);
}

TEST_CASE("difference subtracts long from short elementwise") {
    const auto values = testutil::make_values({10, 11, 12, 11, 10, 9});
    const auto [s, l] =
        indicators::align_crop(indicators::sma(values, 2), indicators::sma(values, 3));
    const auto diff = indicators::difference(s, l);
    REQUIRE(diff.values.size() == 4);
    CHECK(diff.values[0].value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(diff.values[1].value == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
    CHECK(diff.values[2].value == doctest::Approx(-0.5).epsilon(1e-9));

    SUBCASE("identical inputs give zeros") {
        const auto zero = indicators::difference(s, s);
        for (const auto& v : zero.values) CHECK(v.value == 0.0);
    }
    SUBCASE("swapping arguments negates") {
        const auto neg = indicators::difference(l, s);
        for (std::size_t i = 0; i < diff.values.size(); ++i) {
            CHECK(neg.values[i].value == -diff.values[i].value);
        }
    }
    SUBCASE("misaligned lengths are rejected") {
        CHECK_THROWS_AS(indicators::difference(indicators::sma(values, 2), l),
                        indicators::MisalignedInputs);
    }
}

TEST_CASE("crossover_signals finds sign changes") {
    using V = std::vector<Signal>;
    CHECK(indicators::crossover_signals(diff_of({0.5, 0.2, -0.5, -0.5})).events ==
          V{Signal::Hold, Signal::Hold, Signal::Sell, Signal::Hold});
    CHECK(indicators::crossover_signals(diff_of({-1, 1, -1})).events ==
          V{Signal::Hold, Signal::Buy, Signal::Sell});
    CHECK(indicators::crossover_signals(diff_of({1, 2, 3, 0.5})).events ==
          V{Signal::Hold, Signal::Hold, Signal::Hold, Signal::Hold});
    CHECK(indicators::crossover_signals(diff_of({2})).events == V{Signal::Hold});
}

TEST_CASE("exact zeros carry the previous sign") {
    using V = std::vector<Signal>;
    // The zero day itself never signals; the prior regime persists through it.
    CHECK(indicators::crossover_signals(diff_of({1, 0, -1})).events ==
          V{Signal::Hold, Signal::Hold, Signal::Sell});
    CHECK(indicators::crossover_signals(diff_of({-1, 0, 1})).events ==
          V{Signal::Hold, Signal::Hold, Signal::Buy});
    CHECK(indicators::crossover_signals(diff_of({-1, 0, 0, -2})).events ==
          V{Signal::Hold, Signal::Hold, Signal::Hold, Signal::Hold});
    // A leading zero has no sign to carry: the first real sign sets the regime.
    CHECK(indicators::crossover_signals(diff_of({0, 1, -1})).events ==
          V{Signal::Hold, Signal::Hold, Signal::Sell});
    CHECK(indicators::crossover_signals(diff_of({0, 0, 0})).events ==
          V{Signal::Hold, Signal::Hold, Signal::Hold});
}

TEST_CASE("signal dates mirror the difference dates") {
    const auto diff = diff_of({1, -1, 2, 2});
    const auto signals = indicators::crossover_signals(diff);
    REQUIRE(signals.dates.size() == diff.values.size());
    for (std::size_t i = 0; i < diff.values.size(); ++i) {
        CHECK(signals.dates[i] == diff.values[i].date);
    }
}
