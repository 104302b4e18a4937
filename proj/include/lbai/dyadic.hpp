#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lbai/instance.hpp"
#include "lbai/rng.hpp"

namespace lbai {

/// Largest walk depth the enumeration oracles accept (2^12 walks).
inline constexpr unsigned kMaxWalkDepth = 12;
/// Largest dyadic prefix enumerate_windows accepts.
inline constexpr Round kMaxEnumerationPrefix = Round{1} << 20;

unsigned floor_log2(Round n);

/// T' = 2^floor(log2 T): the prefix all dyadic machinery works on.
inline Round dyadic_prefix(Round horizon) { return Round{1} << floor_log2(horizon); }

/// Inclusive range {lo, ..., hi} of scale exponents m.
struct ScaleRange {
    unsigned lo = 1;
    unsigned hi = 1;

    std::size_t size() const { return hi - lo + 1; }
    friend bool operator==(const ScaleRange&, const ScaleRange&) = default;
};

/// {ceil(M'/2), ..., M'} with M' = floor(log2 T).
ScaleRange default_scale_range(Round horizon);

/// Throws unless 1 <= lo <= hi <= floor(log2 T).
void validate_scales(Round horizon, ScaleRange scales);

/// A dyadic block of length 2^m split into an observation half
/// [t0 - w, t0 - 1] and a prediction half [t0, t0 + w - 1].
struct WindowChoice {
    unsigned m = 1;
    std::uint64_t b = 1;  // 1-based block index
    Round w = 1;
    Round t0 = 2;

    static WindowChoice at(unsigned m, std::uint64_t b);

    Round observation_start() const { return t0 - w; }
    Round prediction_end() const { return t0 + w - 1; }

    friend bool operator==(const WindowChoice&, const WindowChoice&) = default;
};

WindowChoice sample_window(Round horizon, ScaleRange scales, Rng& rng);

/// sample_window with m fixed; b uniform over [T'/2^m].
WindowChoice sample_window_at_scale(Round horizon, unsigned m, Rng& rng);

struct WeightedWindow {
    WindowChoice window;
    double probability = 0.0;
};

/// Every (m, b) pair once with its exact sampling probability.
std::vector<WeightedWindow> enumerate_windows(Round horizon, ScaleRange scales);

/// Perfect binary tree of block means over a length-2^M sequence.
/// level(j) holds the 2^j depth-j node values; every internal node is the
/// mean of its two children.
class DyadicTree {
public:
    explicit DyadicTree(std::span<const double> leaves);

    unsigned height() const { return height_; }
    std::span<const double> level(unsigned depth) const { return levels_.at(depth); }
    double value(unsigned depth, std::uint64_t index) const { return levels_.at(depth).at(index); }

private:
    unsigned height_ = 0;
    std::vector<std::vector<double>> levels_;
};

struct Lemma1Result {
    double expectation = 0.0;     // exact E_{m,b}[(y - y*)^2]
    std::optional<double> bound;  // 4 / (hi - lo); empty when hi == lo
};

/// Exact expected squared gap between observation and prediction means over
/// every window the sampler can draw.
Lemma1Result lemma1_gap(std::span<const double> sequence, ScaleRange scales);

struct WalkTrace {
    unsigned depth = 0;
    std::vector<double> sequence;
    std::vector<int> choices;        // 0 = left, 1 = right
    std::vector<double> node_values;  // Z(0), ..., Z(M)
};

WalkTrace walk_values(std::span<const double> sequence, std::span<const int> choices);

struct OrthogonalityResult {
    double lhs = 0.0;  // E[(Z(U) - Z(L))^2]
    double rhs = 0.0;  // E[sum_{j=L}^{U-1} (Z(j+1) - Z(j))^2]
};

/// Both sides by enumeration of all 2^M root-to-leaf walks (M <= kMaxWalkDepth).
OrthogonalityResult orthogonality_check(std::span<const double> sequence, unsigned lower, unsigned upper);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

}  // namespace lbai
