#pragma once

#include <cstdint>
#include <vector>

#include "lbai/countsketch.hpp"
#include "lbai/dyadic.hpp"
#include "lbai/generators.hpp"
#include "lbai/instance.hpp"
#include "lbai/meter.hpp"
#include "lbai/rng.hpp"

namespace lbai {

/// Sequential access to an instance: one arm per round, rounds strictly in
/// order, and a running count of queries for auditing.
class BanditEnvironment {
public:
    explicit BanditEnvironment(const BanditInstance& instance) : instance_(&instance) {}

    /// Round the next play happens in (1-based).
    Round round() const { return next_round_; }

    /// Plays `arm` in the current round and returns its reward.
    double play(std::size_t arm);

    /// Plays `arm` for `rounds` rounds without looking at the rewards.
    void play_blind(std::size_t arm, Round rounds);

    std::uint64_t queries() const { return queries_; }

private:
    const BanditInstance* instance_;
    Round next_round_ = 1;
    std::uint64_t queries_ = 0;
};

struct Prediction {
    WindowChoice window;
    std::size_t arm = 0;
    std::vector<double> estimates;  // per-arm accumulators (dense and full-information runs)
    MemoryReport memory;
    std::uint64_t queries = 0;
    std::uint64_t sketch_updates = 0;
};

struct LookaheadScore {
    std::size_t best_arm = 0;
    double best_avg = 0.0;
    double chosen_avg = 0.0;
    double error = 0.0;
};

/// Uniform-arm sampling over the observation half of a fixed window; the
/// output arm maximizes the accumulated reward (lowest index on ties).
Prediction run_bai_at(const BanditInstance& instance, const WindowChoice& window, Rng& rng);

/// Dense lookahead best-arm identification: sample a dyadic window, then run_bai_at.
Prediction run_bai(const BanditInstance& instance, ScaleRange scales, Rng& rng);

/// Metered state of the dense variant: K accumulators in [0, w] plus three
/// round registers.
std::vector<Descriptor> dense_bai_state(std::size_t arms, Round window, Round horizon);

struct SparseBaiParams {
    double phi = 1.0;
    double eps = 0.5;    // sketch accuracy
    double delta = 0.1;  // sketch failure probability
    SketchConstants constants;

    /// eps = 1 / sqrt(M') and delta = failure * eps, with M' = floor(log2 T).
    static SparseBaiParams defaults(Round horizon, double phi, double failure = 0.1);
};

/// Same window law and arm sampling as run_bai, with observations streamed into
/// a weighted CountSketch sized for n_est = w.
Prediction run_sparse_bai_at(const BanditInstance& instance, const SparseBaiParams& params,
                             const WindowChoice& window, Rng& rng);
Prediction run_sparse_bai(const BanditInstance& instance, const SparseBaiParams& params, ScaleRange scales,
                          Rng& rng);

/// Exact observation-window means for every arm, no sampling noise.
Prediction run_full_info_predictor(const BanditInstance& instance, ScaleRange scales, Rng& rng);
Prediction run_full_info_at(const BanditInstance& instance, const WindowChoice& window);

/// Lookahead error of a prediction over [t0, t0 + w - 1].
LookaheadScore score(const BanditInstance& instance, const Prediction& prediction);

/// Node-level error on a sign-tree pair: |f1(v_R) - f2(v_R)| when the chosen
/// arm does not own the larger right-child value, else 0.
double sign_tree_node_error(const SignTreeAssignment& first, const SignTreeAssignment& second,
                            const WindowChoice& window, std::size_t chosen);

}  // namespace lbai
