#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace quantbench {

// mt19937_64 with hand-rolled bounded draws and shuffling, so that seeded
// sequences are identical across standard libraries (std::shuffle and
// std::uniform_int_distribution are not specified bit-for-bit).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n); rejects the biased low region.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        std::uint64_t v = engine_();
        while (v < threshold) v = engine_();
        return v % n;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[rng.next_below(i)]);
    }
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    shuffle(idx, rng);
    return idx;
}

} // namespace quantbench
