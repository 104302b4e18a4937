#pragma once

#include <stdexcept>
#include <vector>

#include "lbai/instance.hpp"

namespace lbai {

/// Raised when some window has no reward on any arm (phi is 0/0 there).
class PhiUndefined : public std::domain_error {
public:
    PhiUndefined(Round window_start, Round window);
    Round window_start;
};

struct SparsityProfile {
    Round window = 0;
    double phi = 0.0;              // max over windows of ||n(I)||_2^2 / max_i n_i(I)^2
    Round worst_window_start = 0;  // first window attaining phi
    std::vector<double> per_arm_totals;
};

/// Exact local sparsity over all T - w + 1 contiguous windows of length w.
/// The arm ordering is recomputed per window.
SparsityProfile local_sparsity(const BanditInstance& instance, Round window);

}  // namespace lbai
