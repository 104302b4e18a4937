#include "lbai/sparsity.hpp"

#include <algorithm>
#include <string>

namespace lbai {

PhiUndefined::PhiUndefined(Round start, Round w)
    : std::domain_error("phi undefined: window [" + std::to_string(start) + ", " +
                        std::to_string(start + w - 1) + "] has no reward on any arm"),
      window_start(start) {}

namespace {

double window_phi(const std::vector<double>& counts, double& top) {
    double squares = 0.0;
    top = 0.0;
    for (double c : counts) {
        squares += c * c;
        top = std::max(top, c);
    }
    return top > 0.0 ? squares / (top * top) : 0.0;
}

}  // namespace

SparsityProfile local_sparsity(const BanditInstance& instance, Round window) {
    const Round horizon = instance.horizon();
    const std::size_t arms = instance.arms();
    if (window < 1 || window > horizon) throw std::invalid_argument("local_sparsity: need 1 <= w <= T");

    SparsityProfile profile;
    profile.window = window;
    profile.per_arm_totals.assign(arms, 0.0);

    // Rewards are read in place: two reads per arm per step keeps memory at O(K)
    // even for generator-backed instances far larger than RAM would hold densely.
    std::vector<double> counts(arms, 0.0);
    for (std::size_t a = 0; a < arms; ++a) {
        profile.per_arm_totals[a] = instance.window_sum(a, 1, horizon);
        counts[a] = instance.window_sum(a, 1, window);
    }

    for (Round start = 1;; ++start) {
        double top = 0.0;
        const double phi = window_phi(counts, top);
        if (top <= 0.0) throw PhiUndefined(start, window);
        if (phi > profile.phi) {
            profile.phi = phi;
            profile.worst_window_start = start;
        }
        if (start + window > horizon) break;
        for (std::size_t a = 0; a < arms; ++a)
            counts[a] += instance.reward(a, start + window) - instance.reward(a, start);
    }
    return profile;
}

}  // namespace lbai
