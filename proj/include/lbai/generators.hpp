#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lbai/instance.hpp"
#include "lbai/rng.hpp"

namespace lbai {

// ---------------------------------------------------------------------------
// Sign trees (the two-arm lower-bound construction)
// ---------------------------------------------------------------------------

/// Probability that a depth-d node copies its parent's sign: (1 + sqrt(1 - 1/d)) / 2.
double copy_probability(unsigned depth);

/// Node value for sign `sign` at `depth` in a tree of height `height`:
/// (1 + sign * sqrt(depth / height)) / 2.
double sign_tree_value(unsigned depth, int sign, unsigned height);

/// A full sign/value assignment over a perfect binary tree, stored in heap
/// order: node 1 is the root, node i has children 2i and 2i + 1, and the
/// depth of node i is floor(log2 i).
class SignTreeAssignment {
public:
    SignTreeAssignment(unsigned height, std::vector<std::int8_t> signs);

    unsigned height() const { return height_; }
    std::size_t node_count() const { return signs_.size() - 1; }
    int sign(std::size_t node) const { return signs_.at(node); }
    double value(std::size_t node) const { return values_.at(node); }
    static unsigned depth_of(std::size_t node);

    /// The 2^M leaf values, left to right.
    std::vector<double> leaf_row() const;

    /// Heap index of the depth-`depth` node with 1-based position `index`.
    static std::size_t node_at(unsigned depth, std::uint64_t index) {
        return (std::size_t{1} << depth) + static_cast<std::size_t>(index - 1);
    }

private:
    unsigned height_;
    std::vector<std::int8_t> signs_;  // index 0 unused
    std::vector<double> values_;
};

SignTreeAssignment sample_sign_tree(unsigned height, Rng& rng);

/// K = 2, T = 2^M instance whose arm i plays the leaves of assignment i.
BanditInstance sign_tree_pair_to_instance(const SignTreeAssignment& first,
                                          const SignTreeAssignment& second);

/// Samples both trees from substreams of `seed` and records the generator spec.
/// With `shared_signs` both arms draw from the same stream (identical arms).
BanditInstance gen_sign_tree_pair(unsigned height, std::uint64_t seed, bool shared_signs = false);

// ---------------------------------------------------------------------------
// Polarized instances
// ---------------------------------------------------------------------------

struct PolarizedParams {
    std::size_t arms = 0;
    Round horizon = 0;
    std::size_t heavy = 1;                   // r
    std::optional<Round> light_cap;          // ones per light arm; default ceil(4 T^{1/4})
    std::optional<Round> heavy_zeros;        // zeros per heavy arm; default floor(sqrt(T) / 2)

    Round resolved_light_cap() const;
    Round resolved_heavy_zeros() const;
};

struct PolarizedInstance {
    BanditInstance instance;
    std::vector<std::size_t> heavy_arms;  // sorted
};

/// r heavy arms (all ones except `heavy_zeros` random zeros) and K - r light
/// arms with exactly `light_cap` ones at random rounds. Heavy arms are a
/// uniformly random subset.
PolarizedInstance gen_polarized(const PolarizedParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Set-disjointness embedding
// ---------------------------------------------------------------------------

struct SDInstanceSpec {
    std::size_t universe = 1;            // n = K - 1
    std::vector<std::size_t> alice;      // A, elements of [1, n]
    std::vector<std::size_t> bob;        // B, elements of [1, n]
    Round pivot = 1;                     // tau
    double band_fraction = 0.4;          // lambda
    Round horizon = 1;
    bool promise = true;                 // require |A ∩ B| <= 1

    void validate() const;
};

/// Integer rounds t with tau - lambda*w <= t < tau + lambda*w, clipped to [1, T].
struct Band {
    Round first = 1;
    Round last = 0;
    Round length() const { return last >= first ? last - first + 1 : 0; }
};

Band dummy_band(const SDInstanceSpec& spec, Round window);

/// K = n + 1 arms: dummy arm 0 is one on the pivot band, index arm i follows
/// 1[t < tau, i in A] + 1[t >= tau, i in B].
BanditInstance gen_set_disjointness(const SDInstanceSpec& spec, Round window);

// ---------------------------------------------------------------------------
// Bernoulli baseline
// ---------------------------------------------------------------------------

/// Independent Bernoulli(means[i]) rewards; round values are a pure hash of
/// (seed, arm, round).
BanditInstance gen_bernoulli(const std::vector<double>& means, Round horizon, std::uint64_t seed);

/// Bernoulli rewards whose means are redrawn uniformly on [0,1] in each of
/// `phases` equal stretches of the horizon. The best arm moves around, which
/// makes a cheap oblivious adversary for regret runs.
BanditInstance gen_phased_bernoulli(std::size_t arms, Round horizon, std::size_t phases, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rebuilding from a spec
// ---------------------------------------------------------------------------

/// Rebuilds any generator-backed instance from its recorded spec.
BanditInstance instantiate(const GeneratorSpec& spec);

}  // namespace lbai
