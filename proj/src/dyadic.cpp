#include "lbai/dyadic.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lbai {

unsigned floor_log2(Round n) {
    if (n < 1) throw std::invalid_argument("floor_log2: argument must be positive");
    return static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(n)) - 1);
}

ScaleRange default_scale_range(Round horizon) {
    const unsigned top = floor_log2(horizon);
    if (top < 1) throw std::invalid_argument("default_scale_range: horizon must be >= 2");
    return {std::max(1u, (top + 1) / 2), top};
}

void validate_scales(Round horizon, ScaleRange scales) {
    if (scales.lo < 1) throw std::invalid_argument("scale range: lo must be >= 1");
    if (scales.lo > scales.hi) throw std::invalid_argument("scale range: lo > hi");
    if (horizon < 2 || scales.hi > floor_log2(horizon))
        throw std::invalid_argument("scale range: hi = " + std::to_string(scales.hi) +
                                    " exceeds floor(log2 T) for T = " + std::to_string(horizon));
}

WindowChoice WindowChoice::at(unsigned m, std::uint64_t b) {
    if (m < 1 || m > 62 || b < 1) throw std::invalid_argument("WindowChoice: need m >= 1, b >= 1");
    WindowChoice c;
    c.m = m;
    c.b = b;
    c.w = Round{1} << (m - 1);
    c.t0 = static_cast<Round>(b - 1) * (Round{1} << m) + c.w + 1;
    return c;
}

WindowChoice sample_window_at_scale(Round horizon, unsigned m, Rng& rng) {
    validate_scales(horizon, {m, m});
    const auto blocks = static_cast<std::uint64_t>(dyadic_prefix(horizon) >> m);
    return WindowChoice::at(m, 1 + rng.below(blocks));
}

WindowChoice sample_window(Round horizon, ScaleRange scales, Rng& rng) {
    validate_scales(horizon, scales);
    const auto m = scales.lo + static_cast<unsigned>(rng.below(scales.size()));
    const auto blocks = static_cast<std::uint64_t>(dyadic_prefix(horizon) >> m);
    return WindowChoice::at(m, 1 + rng.below(blocks));
}

std::vector<WeightedWindow> enumerate_windows(Round horizon, ScaleRange scales) {
    validate_scales(horizon, scales);
    const Round prefix = dyadic_prefix(horizon);
    if (prefix > kMaxEnumerationPrefix) throw std::invalid_argument("enumerate_windows: T' exceeds 2^20");
    std::vector<WeightedWindow> out;
    const double scale_weight = 1.0 / static_cast<double>(scales.size());
    for (unsigned m = scales.lo; m <= scales.hi; ++m) {
        const auto blocks = static_cast<std::uint64_t>(prefix >> m);
        const double p = scale_weight / static_cast<double>(blocks);
        for (std::uint64_t b = 1; b <= blocks; ++b) out.push_back({WindowChoice::at(m, b), p});
    }
    return out;
}

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        carry_ += (sum_ - t) + x;
    else
        carry_ += (x - t) + sum_;
    sum_ = t;
}

DyadicTree::DyadicTree(std::span<const double> leaves) {
    if (leaves.empty() || !std::has_single_bit(leaves.size()))
        throw std::invalid_argument("DyadicTree: sequence length must be a power of two");
    height_ = static_cast<unsigned>(std::bit_width(leaves.size()) - 1);
    levels_.resize(height_ + 1);
    levels_[height_].assign(leaves.begin(), leaves.end());
    for (unsigned d = height_; d-- > 0;) {
        const auto& below = levels_[d + 1];
        auto& here = levels_[d];
        here.resize(below.size() / 2);
        for (std::size_t i = 0; i < here.size(); ++i) here[i] = 0.5 * (below[2 * i] + below[2 * i + 1]);
    }
}

Lemma1Result lemma1_gap(std::span<const double> sequence, ScaleRange scales) {
    const auto horizon = static_cast<Round>(sequence.size());
    validate_scales(horizon, scales);
    for (double v : sequence)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("lemma1_gap: value outside [0,1]");
    const Round prefix = dyadic_prefix(horizon);
    const DyadicTree tree(sequence.first(static_cast<std::size_t>(prefix)));
    const unsigned top = tree.height();

    CompensatedSum total;
    for (unsigned m = scales.lo; m <= scales.hi; ++m) {
        // children of the depth (top - m) block nodes: left = observation, right = prediction
        const auto halves = tree.level(top - m + 1);
        CompensatedSum per_scale;
        for (std::size_t i = 0; i + 1 < halves.size(); i += 2) {
            const double gap = halves[i] - halves[i + 1];
            per_scale.add(gap * gap);
        }
        const auto blocks = static_cast<double>(halves.size() / 2);
        total.add(per_scale.value() / blocks);
    }
    Lemma1Result result;
    result.expectation = total.value() / static_cast<double>(scales.size());
    if (scales.hi > scales.lo) result.bound = 4.0 / static_cast<double>(scales.hi - scales.lo);
    return result;
}

WalkTrace walk_values(std::span<const double> sequence, std::span<const int> choices) {
    const DyadicTree tree(sequence);
    if (choices.size() != tree.height())
        throw std::invalid_argument("walk_values: need exactly M choice bits");
    WalkTrace trace;
    trace.depth = tree.height();
    trace.sequence.assign(sequence.begin(), sequence.end());
    trace.choices.assign(choices.begin(), choices.end());
    std::uint64_t index = 0;
    trace.node_values.push_back(tree.value(0, 0));
    for (unsigned j = 0; j < tree.height(); ++j) {
        if (choices[j] != 0 && choices[j] != 1) throw std::invalid_argument("walk_values: choice must be 0 or 1");
        index = 2 * index + static_cast<std::uint64_t>(choices[j]);
        trace.node_values.push_back(tree.value(j + 1, index));
    }
    return trace;
}

OrthogonalityResult orthogonality_check(std::span<const double> sequence, unsigned lower, unsigned upper) {
    if (!sequence.empty() && std::has_single_bit(sequence.size()) &&
        std::bit_width(sequence.size()) - 1 > kMaxWalkDepth)
        throw std::invalid_argument("orthogonality_check: refusing to enumerate more than 2^12 walks");
    const DyadicTree tree(sequence);
    const unsigned height = tree.height();
    if (!(lower < upper && upper <= height))
        throw std::invalid_argument("orthogonality_check: need 0 <= L < U <= M");

    CompensatedSum lhs, rhs;
    const std::uint64_t walks = std::uint64_t{1} << height;
    for (std::uint64_t leaf = 0; leaf < walks; ++leaf) {
        auto z = [&](unsigned j) { return tree.value(j, leaf >> (height - j)); };
        const double span = z(upper) - z(lower);
        lhs.add(span * span);
        for (unsigned j = lower; j < upper; ++j) {
            const double step = z(j + 1) - z(j);
            rhs.add(step * step);
        }
    }
    const auto n = static_cast<double>(walks);
    return {lhs.value() / n, rhs.value() / n};
}

}  // namespace lbai
