#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbai/instance.hpp"
#include "lbai/meter.hpp"
#include "lbai/rng.hpp"

namespace lbai {

struct ArmProbability {
    std::size_t arm = 0;
    double probability = 0.0;
};

struct ArmLoss {
    std::size_t arm = 0;
    double loss = 0.0;
};

/// Distribution with an explicit support list; arms distinct, sorted.
class SparseDistribution {
public:
    SparseDistribution() = default;
    explicit SparseDistribution(std::vector<ArmProbability> support);

    const std::vector<ArmProbability>& support() const { return support_; }
    std::size_t size() const { return support_.size(); }
    double probability_of(std::size_t arm) const;
    std::size_t sample(Rng& rng) const;

private:
    std::vector<ArmProbability> support_;
};

class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Online learner over K experts that only ever emits distributions with at
/// most max_support() arms. next_distribution and observe must alternate.
class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;

    SparseDistribution next_distribution();
    /// Losses for the arms of the last emitted support; unlisted arms count as 0.
    void observe(std::span<const ArmLoss> losses);

    virtual std::size_t arms() const = 0;
    virtual std::size_t max_support() const = 0;
    virtual std::uint64_t bits() const = 0;
    virtual std::string name() const = 0;

protected:
    virtual SparseDistribution emit() = 0;
    virtual void absorb(std::span<const ArmLoss> losses) = 0;

private:
    bool awaiting_observe_ = false;
    std::vector<std::size_t> last_support_;
};

/// sqrt(8 ln K / Q), the tuned Hedge rate for Q rounds.
double default_hedge_eta(std::size_t arms, std::size_t rounds);

/// Multiplicative weights over all K arms. Reference learner; its state is
/// K full words.
class HedgeLearner final : public OnlineLearner {
public:
    HedgeLearner(std::size_t arms, double eta);

    std::size_t arms() const override { return cumulative_.size(); }
    std::size_t max_support() const override { return cumulative_.size(); }
    std::uint64_t bits() const override;
    std::string name() const override { return "hedge"; }

    const std::vector<double>& cumulative_losses() const { return cumulative_; }

protected:
    SparseDistribution emit() override;
    void absorb(std::span<const ArmLoss> losses) override;

private:
    double eta_;
    std::vector<double> cumulative_;
};

/// Hedge restricted to a pool of s arms. Every `epoch` observations the worst
/// pool arm is replaced by a random outside arm that inherits the pool median.
class PoolHedgeLearner final : public OnlineLearner {
public:
    PoolHedgeLearner(std::size_t arms, std::size_t pool_size, std::size_t epoch, double eta, Rng rng);

    std::size_t arms() const override { return arms_; }
    std::size_t max_support() const override { return pool_.size(); }
    std::uint64_t bits() const override;
    std::string name() const override { return "pool-hedge"; }

    std::vector<Descriptor> state() const;
    const std::vector<std::size_t>& pool() const { return pool_; }

protected:
    SparseDistribution emit() override;
    void absorb(std::span<const ArmLoss> losses) override;

private:
    void rotate();

    std::size_t arms_;
    std::size_t epoch_;
    double eta_;
    Rng rng_;
    std::vector<std::size_t> pool_;   // sorted arm ids
    std::vector<double> cumulative_;  // aligned with pool_
    std::size_t clock_ = 0;
};

enum class LossMode { complement, native };  // loss = 1 - reward, or the value itself

struct ReductionOptions {
    std::size_t blocks = 1;  // Q; must divide T
    LossMode mode = LossMode::complement;
    std::optional<unsigned> quantize_bits;  // default ceil(log2 T); 0 disables
};

/// What one block of the reduction saw.
struct BlockRecord {
    std::vector<ArmProbability> distribution;
    std::vector<Round> exploration_rounds;  // aligned with distribution order
    std::vector<ArmLoss> estimate;          // c-hat on the support
};

struct RegretTrace {
    std::size_t arms = 0;
    Round horizon = 0;
    std::size_t blocks = 0;
    Round block_length = 0;
    std::vector<std::uint32_t> played;  // per round
    std::vector<double> losses;         // per round, of the played arm
    std::vector<BlockRecord> records;
    std::vector<bool> exploration;      // per round
    double algorithm_loss = 0.0;
    double best_arm_loss = 0.0;
    std::size_t best_arm = 0;
    double regret = 0.0;
    double expected_exploitation_loss = 0.0;  // sum over blocks of sum_t p_tau . l_t
    std::uint64_t feedback_reads = 0;
    std::string learner;
    MemoryReport memory;
};

struct RegretDecomposition {
    double regret = 0.0;
    std::uint64_t exploration_rounds = 0;
    std::uint64_t exploration_bound = 0;  // Q * s
    double exploration_loss = 0.0;
    double exploitation_loss = 0.0;
    double expected_exploitation_loss = 0.0;
    double benchmark_loss = 0.0;
};

/// One block of the reduction with a frozen distribution: explores each
/// support arm once at uniformly placed rounds and samples elsewhere.
struct BlockOutcome {
    BlockRecord record;
    std::vector<std::uint32_t> played;
    std::vector<double> losses;
    std::vector<bool> exploration;
};

BlockOutcome play_block(const BanditInstance& instance, LossMode mode, Round block_start, Round block_length,
                        const SparseDistribution& distribution, unsigned quantize_bits, Rng& rng);

RegretTrace run_block_reduction(const BanditInstance& instance, OnlineLearner& learner,
                                const ReductionOptions& options, Rng& rng);

RegretDecomposition regret_report(const RegretTrace& trace);

/// Largest divisor of T not above ceil(T^{2/3} K^{1/3} / sigma).
std::size_t default_block_count(Round horizon, std::size_t arms, double sigma);

/// Loss of `arm` at `round` under `mode`.
double loss_at(const BanditInstance& instance, LossMode mode, std::size_t arm, Round round);

}  // namespace lbai
