#include "lbai/lookahead.hpp"

#include <cmath>
#include <stdexcept>

namespace lbai {

double BanditEnvironment::play(std::size_t arm) {
    const double x = instance_->reward(arm, next_round_);
    ++next_round_;
    ++queries_;
    return x;
}

void BanditEnvironment::play_blind(std::size_t arm, Round rounds) {
    if (rounds < 0) throw std::invalid_argument("play_blind: negative round count");
    if (arm >= instance_->arms()) throw std::out_of_range("play_blind: arm out of range");
    if (next_round_ + rounds - 1 > instance_->horizon()) throw std::out_of_range("play_blind: past horizon");
    next_round_ += rounds;
    queries_ += static_cast<std::uint64_t>(rounds);
}

namespace {

void check_window(const BanditInstance& instance, const WindowChoice& window) {
    if (window.observation_start() < 1 || window.prediction_end() > instance.horizon())
        throw std::out_of_range("window [" + std::to_string(window.observation_start()) + ", " +
                                std::to_string(window.prediction_end()) + "] outside horizon");
}

std::size_t argmax_lowest(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

}  // namespace

std::vector<Descriptor> dense_bai_state(std::size_t arms, Round window, Round horizon) {
    return {
        Descriptor::fixed_point("accumulators", static_cast<std::uint64_t>(window), kDefaultFractionBits, arms),
        Descriptor::round_index("window registers", static_cast<std::uint64_t>(horizon), 3),
    };
}

Prediction run_bai_at(const BanditInstance& instance, const WindowChoice& window, Rng& rng) {
    check_window(instance, window);
    const std::size_t arms = instance.arms();
    BanditEnvironment env(instance);
    env.play_blind(0, window.observation_start() - 1);

    Prediction out;
    out.window = window;
    out.estimates.assign(arms, 0.0);
    for (Round t = window.observation_start(); t < window.t0; ++t) {
        const auto arm = static_cast<std::size_t>(rng.below(arms));
        out.estimates[arm] += env.play(arm);
    }
    out.arm = argmax_lowest(out.estimates);
    out.queries = env.queries();
    const auto state = dense_bai_state(arms, window.w, instance.horizon());
    out.memory = account(state);
    return out;
}

Prediction run_bai(const BanditInstance& instance, ScaleRange scales, Rng& rng) {
    const auto window = sample_window(instance.horizon(), scales, rng);
    return run_bai_at(instance, window, rng);
}

SparseBaiParams SparseBaiParams::defaults(Round horizon, double phi, double failure) {
    SparseBaiParams p;
    p.phi = phi;
    const double accuracy = 2.0 / std::sqrt(static_cast<double>(floor_log2(horizon)));  // eps_1
    p.eps = accuracy / 2.0;
    p.delta = failure * accuracy / 2.0;
    return p;
}

Prediction run_sparse_bai_at(const BanditInstance& instance, const SparseBaiParams& params,
                             const WindowChoice& window, Rng& rng) {
    check_window(instance, window);
    const std::size_t arms = instance.arms();
    Sketch sketch(SketchParams::sized(arms, params.phi, params.eps, params.delta,
                                      static_cast<std::uint64_t>(window.w), params.constants),
                  rng.next());
    BanditEnvironment env(instance);
    env.play_blind(0, window.observation_start() - 1);
    for (Round t = window.observation_start(); t < window.t0; ++t) {
        const auto arm = static_cast<std::size_t>(rng.below(arms));
        sketch.update(arm, env.play(arm));
    }

    Prediction out;
    out.window = window;
    // with no positive observation every arm ties at zero
    out.arm = sketch.total_updates() == 0 ? 0 : sketch.approx_top();
    out.queries = env.queries();
    out.sketch_updates = sketch.total_updates();
    auto state = sketch.descriptors();
    state.push_back(Descriptor::round_index("window registers", static_cast<std::uint64_t>(instance.horizon()), 3));
    out.memory = account(state);
    return out;
}

Prediction run_sparse_bai(const BanditInstance& instance, const SparseBaiParams& params, ScaleRange scales,
                          Rng& rng) {
    const auto window = sample_window(instance.horizon(), scales, rng);
    return run_sparse_bai_at(instance, params, window, rng);
}

Prediction run_full_info_at(const BanditInstance& instance, const WindowChoice& window) {
    check_window(instance, window);
    Prediction out;
    out.window = window;
    out.estimates.resize(instance.arms());
    for (std::size_t a = 0; a < instance.arms(); ++a)
        out.estimates[a] = window_average(instance, a, window.observation_start(), window.w);
    out.arm = argmax_lowest(out.estimates);
    out.queries = static_cast<std::uint64_t>(window.t0 - 1) * instance.arms();
    const auto state = dense_bai_state(instance.arms(), window.w, instance.horizon());
    out.memory = account(state);
    return out;
}

Prediction run_full_info_predictor(const BanditInstance& instance, ScaleRange scales, Rng& rng) {
    return run_full_info_at(instance, sample_window(instance.horizon(), scales, rng));
}

LookaheadScore score(const BanditInstance& instance, const Prediction& prediction) {
    const auto& win = prediction.window;
    if (win.t0 < 1 || win.prediction_end() > instance.horizon())
        throw std::out_of_range("score: prediction window outside horizon");
    if (prediction.arm >= instance.arms()) throw std::out_of_range("score: arm out of range");
    LookaheadScore s;
    s.best_avg = -1.0;
    for (std::size_t a = 0; a < instance.arms(); ++a) {
        const double avg = window_average(instance, a, win.t0, win.w);
        if (avg > s.best_avg) {
            s.best_avg = avg;
            s.best_arm = a;
        }
        if (a == prediction.arm) s.chosen_avg = avg;
    }
    s.error = s.best_avg - s.chosen_avg;
    return s;
}

double sign_tree_node_error(const SignTreeAssignment& first, const SignTreeAssignment& second,
                            const WindowChoice& window, std::size_t chosen) {
    if (first.height() != second.height()) throw std::invalid_argument("sign_tree_node_error: depth mismatch");
    const unsigned height = first.height();
    if (window.m > height) throw std::invalid_argument("sign_tree_node_error: window larger than tree");
    const unsigned child_depth = height - window.m + 1;
    const std::size_t right = SignTreeAssignment::node_at(child_depth, 2 * window.b);
    const double v1 = first.value(right);
    const double v2 = second.value(right);
    const double chosen_value = chosen == 0 ? v1 : v2;
    return std::max(v1, v2) - chosen_value;
}

}  // namespace lbai
