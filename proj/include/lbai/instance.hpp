#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lbai {

using Round = std::int64_t;  // 1-based throughout

/// Pure (arm, round) -> reward map in [0, 1]. Implementations are immutable and
/// safe to read from many threads.
class RewardSource {
public:
    virtual ~RewardSource() = default;
    virtual double at(std::size_t arm, Round round) const = 0;
};

/// Provenance of a generator-backed instance; enough to rebuild it bit-exactly.
struct GeneratorSpec {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 0;
};

/// Instances with at most this many values are materialized densely.
inline constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 24;

/// K x T reward table fixed before any run (oblivious adversary). Copies share
/// the same immutable source.
class BanditInstance {
public:
    /// Row-major K x T values; every entry must lie in [0, 1].
    static BanditInstance dense(std::size_t arms, Round horizon, std::vector<double> row_major,
                                std::string label = "dense");
    static BanditInstance from_rows(const std::vector<std::vector<double>>& rows,
                                    std::string label = "dense");
    /// Wraps a generator. Materializes densely when arms * horizon <= kDenseLimit.
    static BanditInstance generated(std::size_t arms, Round horizon,
                                    std::shared_ptr<const RewardSource> source, std::string label,
                                    std::optional<GeneratorSpec> spec = std::nullopt);

    std::size_t arms() const { return arms_; }
    Round horizon() const { return horizon_; }
    const std::string& label() const { return label_; }
    const std::optional<GeneratorSpec>& generator() const { return spec_; }
    bool is_dense() const { return !dense_.empty(); }

    /// Same values, tagged with the generator that produced them.
    BanditInstance with_generator(GeneratorSpec spec) const {
        BanditInstance copy = *this;
        copy.spec_ = std::move(spec);
        return copy;
    }

    /// Reward of `arm` (0-based) at `round` (1-based). Range-checked.
    double reward(std::size_t arm, Round round) const;

    /// Sum over the w rounds starting at t0.
    double window_sum(std::size_t arm, Round t0, Round w) const;

    /// Copies rounds [first, first + out.size()) of one arm.
    void read_row(std::size_t arm, Round first, std::span<double> out) const;

private:
    BanditInstance() = default;

    double at_unchecked(std::size_t arm, Round round) const {
        return dense_.empty() ? source_->at(arm, round)
                              : dense_[arm * static_cast<std::size_t>(horizon_) +
                                       static_cast<std::size_t>(round - 1)];
    }

    std::size_t arms_ = 0;
    Round horizon_ = 0;
    std::string label_;
    // exactly one of these is populated
    std::shared_ptr<const std::vector<double>> dense_holder_;
    std::span<const double> dense_;
    std::shared_ptr<const RewardSource> source_;
    std::optional<GeneratorSpec> spec_;
};

BanditInstance make_dense(const std::vector<std::vector<double>>& values);

/// Exact average of arm's rewards on [t0, t0 + w - 1].
double window_average(const BanditInstance& instance, std::size_t arm, Round t0, Round w);

}  // namespace lbai
