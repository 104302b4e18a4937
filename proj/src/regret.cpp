#include "lbai/regret.hpp"

#include <algorithm>
#include <cmath>

#include "lbai/lookahead.hpp"

namespace lbai {

// ---------------------------------------------------------------------------
// Distributions

SparseDistribution::SparseDistribution(std::vector<ArmProbability> support) : support_(std::move(support)) {
    std::sort(support_.begin(), support_.end(),
              [](const ArmProbability& a, const ArmProbability& b) { return a.arm < b.arm; });
    double total = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (!(support_[i].probability >= 0.0)) throw std::invalid_argument("distribution: negative probability");
        if (i > 0 && support_[i].arm == support_[i - 1].arm)
            throw std::invalid_argument("distribution: repeated arm in support");
        total += support_[i].probability;
    }
    if (support_.empty() || std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("distribution: probabilities must sum to 1");
}

double SparseDistribution::probability_of(std::size_t arm) const {
    for (const auto& e : support_)
        if (e.arm == arm) return e.probability;
    return 0.0;
}

std::size_t SparseDistribution::sample(Rng& rng) const {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& e : support_) {
        cumulative += e.probability;
        if (u < cumulative) return e.arm;
    }
    // u fell in the rounding gap above the last partial sum
    for (auto it = support_.rbegin(); it != support_.rend(); ++it)
        if (it->probability > 0.0) return it->arm;
    return support_.back().arm;
}

// ---------------------------------------------------------------------------
// Learner protocol

SparseDistribution OnlineLearner::next_distribution() {
    if (awaiting_observe_) throw ProtocolError(name() + ": next_distribution called before observe");
    SparseDistribution d = emit();
    if (d.size() > max_support())
        throw std::logic_error(name() + ": emitted support larger than its bound");
    last_support_.clear();
    for (const auto& e : d.support()) last_support_.push_back(e.arm);
    awaiting_observe_ = true;
    return d;
}

void OnlineLearner::observe(std::span<const ArmLoss> losses) {
    if (!awaiting_observe_) throw ProtocolError(name() + ": observe called without a pending distribution");
    for (const auto& l : losses) {
        if (!std::binary_search(last_support_.begin(), last_support_.end(), l.arm))
            throw std::invalid_argument(name() + ": loss reported for an arm outside the last support");
        if (!(l.loss >= 0.0 && l.loss <= 1.0)) throw std::invalid_argument(name() + ": loss outside [0,1]");
    }
    absorb(losses);
    awaiting_observe_ = false;
}

double default_hedge_eta(std::size_t arms, std::size_t rounds) {
    const double k = static_cast<double>(std::max<std::size_t>(arms, 2));
    return std::sqrt(8.0 * std::log(k) / static_cast<double>(std::max<std::size_t>(rounds, 1)));
}

namespace {

SparseDistribution softmin(const std::vector<std::size_t>& ids, const std::vector<double>& cumulative, double eta) {
    const double floor = *std::min_element(cumulative.begin(), cumulative.end());
    std::vector<double> weights(cumulative.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] = std::exp(-eta * (cumulative[i] - floor));
        total += weights[i];
    }
    std::vector<ArmProbability> support(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) support[i] = {ids[i], weights[i] / total};
    return SparseDistribution(std::move(support));
}

}  // namespace

// ---------------------------------------------------------------------------
// Hedge

HedgeLearner::HedgeLearner(std::size_t arms, double eta) : eta_(eta), cumulative_(arms, 0.0) {
    if (arms < 1) throw std::invalid_argument("hedge: need at least one arm");
    if (!(eta > 0.0)) throw std::invalid_argument("hedge: eta must be positive");
}

SparseDistribution HedgeLearner::emit() {
    std::vector<std::size_t> ids(cumulative_.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return softmin(ids, cumulative_, eta_);
}

void HedgeLearner::absorb(std::span<const ArmLoss> losses) {
    for (const auto& l : losses) cumulative_[l.arm] += l.loss;
}

std::uint64_t HedgeLearner::bits() const {
    const Descriptor weights = Descriptor::word("weights", 64, cumulative_.size());
    return account(std::span(&weights, 1)).total();
}

// ---------------------------------------------------------------------------
// Pool Hedge

PoolHedgeLearner::PoolHedgeLearner(std::size_t arms, std::size_t pool_size, std::size_t epoch, double eta,
                                   Rng rng)
    : arms_(arms), epoch_(epoch), eta_(eta), rng_(rng) {
    if (pool_size < 2 || pool_size > arms) throw std::invalid_argument("pool-hedge: need 2 <= s <= K");
    if (epoch < 1) throw std::invalid_argument("pool-hedge: epoch must be >= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("pool-hedge: eta must be positive");
    for (auto a : sample_without_replacement(arms, pool_size, rng_)) pool_.push_back(static_cast<std::size_t>(a));
    cumulative_.assign(pool_size, 0.0);
}

SparseDistribution PoolHedgeLearner::emit() { return softmin(pool_, cumulative_, eta_); }

void PoolHedgeLearner::absorb(std::span<const ArmLoss> losses) {
    for (const auto& l : losses) {
        const auto it = std::lower_bound(pool_.begin(), pool_.end(), l.arm);
        cumulative_[static_cast<std::size_t>(it - pool_.begin())] += l.loss;
    }
    if (++clock_ == epoch_) {
        clock_ = 0;
        if (arms_ > pool_.size()) rotate();
    }
}

void PoolHedgeLearner::rotate() {
    std::size_t victim = 0;
    for (std::size_t i = 1; i < pool_.size(); ++i)
        if (cumulative_[i] >= cumulative_[victim]) victim = i;

    std::size_t incoming = 0;
    do {
        incoming = static_cast<std::size_t>(rng_.below(arms_));
    } while (std::binary_search(pool_.begin(), pool_.end(), incoming));

    pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(victim));
    cumulative_.erase(cumulative_.begin() + static_cast<std::ptrdiff_t>(victim));

    std::vector<double> sorted = cumulative_;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    const auto pos = std::lower_bound(pool_.begin(), pool_.end(), incoming) - pool_.begin();
    pool_.insert(pool_.begin() + pos, incoming);
    cumulative_.insert(cumulative_.begin() + pos, median);
}

std::vector<Descriptor> PoolHedgeLearner::state() const {
    return {
        Descriptor::arm_index("pool ids", arms_, pool_.size()),
        Descriptor::word("pool weights", 64, pool_.size()),
        Descriptor::counter("epoch clock", epoch_),
        Descriptor::word("rng state", Rng::kStateBits, 1, StateKind::seed),
    };
}

std::uint64_t PoolHedgeLearner::bits() const {
    const auto s = state();
    return account(s).total();
}

// ---------------------------------------------------------------------------
// Reduction

double loss_at(const BanditInstance& instance, LossMode mode, std::size_t arm, Round round) {
    const double x = instance.reward(arm, round);
    return mode == LossMode::complement ? 1.0 - x : x;
}

namespace {

double quantize(double loss, unsigned bits) {
    if (bits == 0) return loss;
    const double scale = std::ldexp(1.0, static_cast<int>(bits));
    return std::clamp(std::round(loss * scale) / scale, 0.0, 1.0);
}

BlockOutcome play_block_in(BanditEnvironment& env, LossMode mode, Round block_length,
                           const SparseDistribution& distribution, unsigned quantize_bits, Rng& rng) {
    const auto& support = distribution.support();
    if (block_length < static_cast<Round>(support.size()))
        throw std::invalid_argument("reduction: block shorter than the support");

    auto offsets = sample_without_replacement(static_cast<std::uint64_t>(block_length), support.size(), rng);
    shuffle(offsets, rng);
    std::vector<int> explorer(static_cast<std::size_t>(block_length), -1);
    for (std::size_t k = 0; k < offsets.size(); ++k) explorer[offsets[k]] = static_cast<int>(k);

    BlockOutcome out;
    out.record.distribution = support;
    out.record.exploration_rounds.resize(support.size());
    out.record.estimate.resize(support.size());
    out.played.reserve(static_cast<std::size_t>(block_length));
    out.losses.reserve(static_cast<std::size_t>(block_length));
    out.exploration.reserve(static_cast<std::size_t>(block_length));

    for (Round i = 0; i < block_length; ++i) {
        const int k = explorer[static_cast<std::size_t>(i)];
        const std::size_t arm = k >= 0 ? support[static_cast<std::size_t>(k)].arm : distribution.sample(rng);
        const Round t = env.round();
        const double reward = env.play(arm);
        const double loss = mode == LossMode::complement ? 1.0 - reward : reward;
        out.played.push_back(static_cast<std::uint32_t>(arm));
        out.losses.push_back(loss);
        out.exploration.push_back(k >= 0);
        if (k >= 0) {
            out.record.exploration_rounds[static_cast<std::size_t>(k)] = t;
            out.record.estimate[static_cast<std::size_t>(k)] = {arm, quantize(loss, quantize_bits)};
        }
    }
    return out;
}

}  // namespace

BlockOutcome play_block(const BanditInstance& instance, LossMode mode, Round block_start, Round block_length,
                        const SparseDistribution& distribution, unsigned quantize_bits, Rng& rng) {
    if (block_start < 1 || block_start + block_length - 1 > instance.horizon())
        throw std::out_of_range("play_block: block outside horizon");
    BanditEnvironment env(instance);
    env.play_blind(0, block_start - 1);
    return play_block_in(env, mode, block_length, distribution, quantize_bits, rng);
}

RegretTrace run_block_reduction(const BanditInstance& instance, OnlineLearner& learner,
                                const ReductionOptions& options, Rng& rng) {
    const Round horizon = instance.horizon();
    const auto q = static_cast<Round>(options.blocks);
    if (q < 1 || horizon % q != 0) throw std::invalid_argument("reduction: Q must divide T");
    if (learner.arms() != instance.arms()) throw std::invalid_argument("reduction: learner and instance disagree on K");
    const Round block_length = horizon / q;
    const unsigned qbits = options.quantize_bits.value_or(std::max(1u, ceil_log2(static_cast<std::uint64_t>(horizon))));

    RegretTrace trace;
    trace.arms = instance.arms();
    trace.horizon = horizon;
    trace.blocks = options.blocks;
    trace.block_length = block_length;
    trace.learner = learner.name();
    trace.played.reserve(static_cast<std::size_t>(horizon));
    trace.losses.reserve(static_cast<std::size_t>(horizon));

    BanditEnvironment env(instance);
    for (Round tau = 0; tau < q; ++tau) {
        const SparseDistribution p = learner.next_distribution();
        const Round start = env.round();
        auto outcome = play_block_in(env, options.mode, block_length, p, qbits, rng);
        learner.observe(outcome.record.estimate);

        // benchmark side: the algorithm never sees these reads
        for (Round t = start; t < start + block_length; ++t)
            for (const auto& e : p.support())
                trace.expected_exploitation_loss += e.probability * loss_at(instance, options.mode, e.arm, t);

        trace.played.insert(trace.played.end(), outcome.played.begin(), outcome.played.end());
        trace.losses.insert(trace.losses.end(), outcome.losses.begin(), outcome.losses.end());
        trace.exploration.insert(trace.exploration.end(), outcome.exploration.begin(), outcome.exploration.end());
        trace.records.push_back(std::move(outcome.record));
    }
    trace.feedback_reads = env.queries();

    for (double l : trace.losses) trace.algorithm_loss += l;
    std::vector<double> totals(instance.arms(), 0.0);
    for (std::size_t a = 0; a < instance.arms(); ++a)
        for (Round t = 1; t <= horizon; ++t) totals[a] += loss_at(instance, options.mode, a, t);
    trace.best_arm = static_cast<std::size_t>(std::min_element(totals.begin(), totals.end()) - totals.begin());
    trace.best_arm_loss = totals[trace.best_arm];
    trace.regret = trace.algorithm_loss - trace.best_arm_loss;

    const auto support = static_cast<std::uint64_t>(learner.max_support());
    const std::vector<Descriptor> state{
        Descriptor::word("learner state", learner.bits()),
        Descriptor::round_index("exploration rounds", static_cast<std::uint64_t>(horizon), support),
        Descriptor::word("loss estimates", qbits + 1, support),
        Descriptor::counter("block index", static_cast<std::uint64_t>(q)),
        Descriptor::round_index("round", static_cast<std::uint64_t>(horizon)),
    };
    trace.memory = account(state);
    return trace;
}

RegretDecomposition regret_report(const RegretTrace& trace) {
    RegretDecomposition d;
    d.regret = trace.regret;
    d.benchmark_loss = trace.best_arm_loss;
    d.expected_exploitation_loss = trace.expected_exploitation_loss;
    std::size_t widest = 0;
    for (const auto& r : trace.records) {
        d.exploration_rounds += r.exploration_rounds.size();
        widest = std::max(widest, r.distribution.size());
    }
    d.exploration_bound = static_cast<std::uint64_t>(trace.blocks) * widest;
    for (std::size_t t = 0; t < trace.losses.size(); ++t) {
        if (trace.exploration[t])
            d.exploration_loss += trace.losses[t];
        else
            d.exploitation_loss += trace.losses[t];
    }
    return d;
}

std::size_t default_block_count(Round horizon, std::size_t arms, double sigma) {
    if (horizon < 1 || arms < 1 || !(sigma > 0.0)) throw std::invalid_argument("default_block_count: bad arguments");
    const double target = std::ceil(std::pow(static_cast<double>(horizon), 2.0 / 3.0) *
                                    std::cbrt(static_cast<double>(arms)) / sigma);
    const auto cap = static_cast<Round>(std::clamp(target, 1.0, static_cast<double>(horizon)));
    for (Round q = cap; q >= 1; --q)
        if (horizon % q == 0) return static_cast<std::size_t>(q);
    return 1;
}

}  // namespace lbai
