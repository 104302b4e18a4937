#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace lbai {

/// Counter-based generator: output i is a pure function of (key, i), so any
/// substream can be reproduced without replaying its predecessors.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key = 0) : key_(mix(key)) {}

    /// Independent substream for (seed, label, index). Used for per-trial and
    /// per-component streams so that trial order never changes results.
    static Rng derive(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return next(); }

    std::uint64_t next() { return mix(key_ + (++counter_) * kGamma); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., n-1}; unbiased (Lemire's multiply-and-reject).
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    Rng split(std::string_view label, std::uint64_t index = 0) const {
        return derive(key_, label, index);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    /// State width for memory accounting: key plus counter.
    static constexpr std::uint64_t kStateBits = 128;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// k distinct values from {0, ..., n-1}, sorted ascending (Floyd's algorithm).
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k, Rng& rng);

/// Fisher-Yates in place.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace lbai
