#include "lbai/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lbai/countsketch.hpp"
#include "lbai/dyadic.hpp"
#include "lbai/generators.hpp"
#include "lbai/instance_io.hpp"
#include "lbai/lookahead.hpp"
#include "lbai/sparsity.hpp"

namespace lbai {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::bai, "bai"},
    {ExperimentKind::sparse_bai, "sparse-bai"},
    {ExperimentKind::regret, "regret"},
    {ExperimentKind::lemma1, "lemma1"},
    {ExperimentKind::orthogonality, "orthogonality"},
    {ExperimentKind::lb_error, "lb-error"},
    {ExperimentKind::lb_claim4, "lb-claim4"},
    {ExperimentKind::sd_demo, "sd-demo"},
    {ExperimentKind::sparsity, "sparsity"},
    {ExperimentKind::sketch_bench, "sketch-bench"},
};

// Reads keys from a JSON object and remembers which ones it saw, so that
// leftovers can be rejected as typos.
class KeyReader {
public:
    KeyReader(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
        if (!doc_.is_object()) throw std::invalid_argument(where_ + ": expected a JSON object");
    }

    template <class T>
    void read(const char* key, T& target) {
        seen_.insert(key);
        if (!doc_.contains(key)) return;
        try {
            target = doc_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(where_ + "." + key + ": " + e.what());
        }
    }

    template <class T>
    void read(const char* key, std::optional<T>& target) {
        seen_.insert(key);
        if (!doc_.contains(key) || doc_.at(key).is_null()) return;
        T value{};
        read(key, value);
        target = value;
    }

    void finish() const {
        for (const auto& item : doc_.items())
            if (!seen_.count(item.key())) throw std::invalid_argument(where_ + ": unknown key '" + item.key() + "'");
    }

private:
    const json& doc_;
    std::string where_;
    std::set<std::string> seen_;
};

json params_or_empty(const json& j) { return j.is_null() ? json::object() : j; }

}  // namespace

std::string to_string(ExperimentKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    throw std::logic_error("unnamed experiment kind");
}

ExperimentKind parse_kind(const std::string& text) {
    for (const auto& [k, name] : kKindNames)
        if (text == name) return k;
    throw std::invalid_argument("unknown experiment kind '" + text + "'");
}

ExperimentParams parse_params(ExperimentKind kind, const json& raw) {
    const json doc = params_or_empty(raw);
    KeyReader r(doc, "params");
    ExperimentParams out;
    switch (kind) {
        case ExperimentKind::bai:
        case ExperimentKind::sparse_bai: {
            BaiExperimentParams p;
            r.read("scale_lo", p.scale_lo);
            r.read("scale_hi", p.scale_hi);
            if (kind == ExperimentKind::sparse_bai) {
                r.read("phi", p.phi);
                r.read("eps", p.eps);
                r.read("delta", p.delta);
                r.read("failure", p.failure);
                if (!p.phi) throw std::invalid_argument("params.phi: required for sparse-bai");
                if (!(*p.phi >= 1.0)) throw std::invalid_argument("params.phi: must be >= 1");
                if (p.eps && !(*p.eps > 0.0 && *p.eps < 1.0)) throw std::invalid_argument("params.eps: need (0,1)");
                if (p.delta && !(*p.delta > 0.0 && *p.delta < 1.0))
                    throw std::invalid_argument("params.delta: need (0,1)");
                if (!(p.failure > 0.0 && p.failure < 1.0)) throw std::invalid_argument("params.failure: need (0,1)");
            }
            out = p;
            break;
        }
        case ExperimentKind::regret: {
            RegretExperimentParams p;
            std::string mode = "complement";
            r.read("learner", p.learner);
            r.read("blocks", p.blocks);
            r.read("sigma", p.sigma);
            r.read("pool", p.pool);
            r.read("epoch", p.epoch);
            r.read("eta", p.eta);
            r.read("mode", mode);
            r.read("quantize_bits", p.quantize_bits);
            if (p.learner != "hedge" && p.learner != "pool-hedge")
                throw std::invalid_argument("params.learner: expected hedge or pool-hedge");
            if (mode == "complement")
                p.mode = LossMode::complement;
            else if (mode == "native")
                p.mode = LossMode::native;
            else
                throw std::invalid_argument("params.mode: expected complement or native");
            if (!(p.sigma > 0.0)) throw std::invalid_argument("params.sigma: must be positive");
            if (p.eta && !(*p.eta > 0.0)) throw std::invalid_argument("params.eta: must be positive");
            if (p.epoch < 1) throw std::invalid_argument("params.epoch: must be >= 1");
            if (p.learner == "pool-hedge" && !p.pool) throw std::invalid_argument("params.pool: required for pool-hedge");
            out = p;
            break;
        }
        case ExperimentKind::lemma1: {
            Lemma1ExperimentParams p;
            r.read("length", p.length);
            r.read("lo", p.lo);
            r.read("hi", p.hi);
            if (p.length < 2 || (p.length & (p.length - 1)) != 0)
                throw std::invalid_argument("params.length: must be a power of two >= 2");
            validate_scales(static_cast<Round>(p.length), {p.lo, p.hi});
            out = p;
            break;
        }
        case ExperimentKind::orthogonality: {
            OrthogonalityExperimentParams p;
            r.read("depth", p.depth);
            r.read("lower", p.lower);
            r.read("upper", p.upper);
            if (p.depth < 1 || p.depth > kMaxWalkDepth)
                throw std::invalid_argument("params.depth: must be in [1, " + std::to_string(kMaxWalkDepth) + "]");
            if (p.lower.has_value() != p.upper.has_value())
                throw std::invalid_argument("params: give both lower and upper, or neither");
            if (p.lower && !(*p.lower < *p.upper && *p.upper <= p.depth))
                throw std::invalid_argument("params: need lower < upper <= depth");
            out = p;
            break;
        }
        case ExperimentKind::lb_error: {
            LbErrorExperimentParams p;
            r.read("height", p.height);
            r.read("shared_signs", p.shared_signs);
            if (p.height < 2 || p.height > 20) throw std::invalid_argument("params.height: must be in [2, 20]");
            out = p;
            break;
        }
        case ExperimentKind::lb_claim4: {
            Claim4ExperimentParams p;
            r.read("copy_probability", p.copy_probability);
            if (p.copy_probability && !(*p.copy_probability >= 0.0 && *p.copy_probability <= 1.0))
                throw std::invalid_argument("params.copy_probability: must be in [0,1]");
            out = p;
            break;
        }
        case ExperimentKind::sd_demo: {
            SdDemoExperimentParams p;
            r.read("n", p.universe);
            r.read("A", p.alice);
            r.read("B", p.bob);
            r.read("c", p.ratio);
            r.read("lambda", p.band_fraction);
            r.read("t", p.horizon);
            if (p.ratio < 1 || p.horizon < 2 || p.horizon % p.ratio != 0)
                throw std::invalid_argument("params: c must divide T");
            const Round w = p.horizon / p.ratio;
            if ((w & (w - 1)) != 0 || 2 * w > dyadic_prefix(p.horizon))
                throw std::invalid_argument("params: w = T/c must be a power of two with 2w <= T");
            if (!(p.band_fraction > 0.0 && p.band_fraction < 0.5))
                throw std::invalid_argument("params.lambda: must be in (0, 1/2)");
            SDInstanceSpec probe{p.universe, p.alice, p.bob, 1, p.band_fraction, p.horizon, true};
            probe.validate();
            out = p;
            break;
        }
        case ExperimentKind::sparsity: {
            SparsityExperimentParams p;
            r.read("window", p.window);
            r.read("naive_check", p.naive_check);
            if (p.window < 1) throw std::invalid_argument("params.window: must be >= 1");
            out = p;
            break;
        }
        case ExperimentKind::sketch_bench: {
            SketchBenchExperimentParams p;
            r.read("heavy", p.heavy);
            r.read("heavy_count", p.heavy_count);
            r.read("light", p.light);
            r.read("light_count", p.light_count);
            r.read("eps", p.eps);
            r.read("delta", p.delta);
            if (p.heavy < 1 || p.heavy_count < 1) throw std::invalid_argument("params: need at least one heavy item");
            if (!(p.eps > 0.0 && p.eps < 1.0) || !(p.delta > 0.0 && p.delta < 1.0))
                throw std::invalid_argument("params: eps and delta must lie in (0,1)");
            out = p;
            break;
        }
    }
    r.finish();
    return out;
}

// ---------------------------------------------------------------------------
// Config

BanditInstance build_instance(const json& spec, std::optional<std::uint64_t> seed_override) {
    if (!spec.is_object()) throw std::invalid_argument("instance: expected an object");
    if (spec.contains("file")) {
        KeyReader r(spec, "instance");
        std::string path;
        r.read("file", path);
        r.finish();
        return load_instance(path);
    }
    KeyReader r(spec, "instance");
    GeneratorSpec gs;
    gs.params = json::object();
    r.read("generator", gs.name);
    r.read("params", gs.params);
    r.read("seed", gs.seed);
    r.finish();
    if (gs.name.empty()) throw std::invalid_argument("instance: needs 'generator' or 'file'");
    if (seed_override) gs.seed = *seed_override;
    try {
        return instantiate(gs);
    } catch (const json::exception& e) {
        throw std::invalid_argument("instance.params: " + std::string(e.what()));
    }
}

namespace {

bool needs_instance(ExperimentKind kind) {
    return kind == ExperimentKind::bai || kind == ExperimentKind::sparse_bai || kind == ExperimentKind::regret ||
           kind == ExperimentKind::sparsity;
}

ScaleRange resolve_scales(const BaiExperimentParams& p, Round horizon) {
    ScaleRange s = default_scale_range(horizon);
    if (p.scale_lo) s.lo = *p.scale_lo;
    if (p.scale_hi) s.hi = *p.scale_hi;
    validate_scales(horizon, s);
    return s;
}

std::size_t resolve_blocks(const RegretExperimentParams& p, const BanditInstance& inst) {
    const std::size_t q = p.blocks.value_or(default_block_count(inst.horizon(), inst.arms(), p.sigma));
    if (q < 1 || inst.horizon() % static_cast<Round>(q) != 0)
        throw std::invalid_argument("params.blocks: must divide T = " + std::to_string(inst.horizon()));
    return q;
}

void check_against_instance(const ExperimentParams& params, const BanditInstance& inst) {
    if (const auto* b = std::get_if<BaiExperimentParams>(&params)) {
        resolve_scales(*b, inst.horizon());
    } else if (const auto* g = std::get_if<RegretExperimentParams>(&params)) {
        const std::size_t q = resolve_blocks(*g, inst);
        const std::size_t s = g->learner == "hedge" ? inst.arms() : *g->pool;
        if (g->learner == "pool-hedge" && (s < 2 || s > inst.arms()))
            throw std::invalid_argument("params.pool: need 2 <= s <= K");
        if (inst.horizon() / static_cast<Round>(q) < static_cast<Round>(s))
            throw std::invalid_argument("params.blocks: blocks shorter than the support size");
    } else if (const auto* sp = std::get_if<SparsityExperimentParams>(&params)) {
        if (sp->window > inst.horizon()) throw std::invalid_argument("params.window: exceeds T");
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    const ExperimentParams p = parse_params(kind, params);
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
        throw std::invalid_argument("max_failure_fraction: must be in [0,1]");
    if (kind == ExperimentKind::lb_claim4 && trials > 4096)
        throw std::invalid_argument("trials: lb-claim4 enumerates d = 1..trials; keep it <= 4096");
    if (needs_instance(kind)) {
        if (instance.is_null()) throw std::invalid_argument("instance: required for " + to_string(kind));
        check_against_instance(p, build_instance(instance, instance_per_trial ? std::optional<std::uint64_t>(0)
                                                                                : std::nullopt));
    } else if (!instance.is_null()) {
        throw std::invalid_argument("instance: not used by " + to_string(kind));
    }
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    ExperimentConfig c;
    KeyReader r(doc, "config");
    std::string kind, format = "csv";
    r.read("kind", kind);
    r.read("instance", c.instance);
    r.read("params", c.params);
    r.read("trials", c.trials);
    r.read("seed", c.master_seed);
    r.read("output", c.output);
    r.read("format", format);
    r.read("instance_per_trial", c.instance_per_trial);
    r.read("max_failure_fraction", c.max_failure_fraction);
    r.finish();
    c.kind = parse_kind(kind);
    if (format == "csv")
        c.format = OutputFormat::csv;
    else if (format == "json")
        c.format = OutputFormat::json;
    else
        throw std::invalid_argument("format: expected csv or json");
    c.params = params_or_empty(c.params);
    return c;
}

json ExperimentConfig::to_json() const {
    return {{"kind", to_string(kind)},
            {"instance", instance},
            {"params", params},
            {"trials", trials},
            {"seed", master_seed},
            {"output", output},
            {"format", format == OutputFormat::csv ? "csv" : "json"},
            {"instance_per_trial", instance_per_trial},
            {"max_failure_fraction", max_failure_fraction}};
}

std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial) {
    return Rng::derive(config.master_seed, to_string(config.kind), trial).next();
}

// ---------------------------------------------------------------------------
// Summaries

MetricSummary summarize(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("summary refused: no observations");
    MetricSummary s;
    s.count = values.size();
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    s.mean = sum.value() / static_cast<double>(s.count);
    if (s.count > 1) {
        CompensatedSum sq;
        for (double v : values) sq.add((v - s.mean) * (v - s.mean));
        s.std = std::sqrt(sq.value() / static_cast<double>(s.count - 1));
    }
    s.se = s.std / std::sqrt(static_cast<double>(s.count));
    s.ci_low = s.mean - 1.96 * s.se;
    s.ci_high = s.mean + 1.96 * s.se;
    return s;
}

namespace {

std::vector<std::string> columns_for(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::bai:
        case ExperimentKind::sparse_bai:
            return {"seed", "m", "b", "t0", "w", "arm", "error", "bits", "queries"};
        case ExperimentKind::regret:
            return {"seed",   "learner",           "K",           "T",          "Q",
                    "s",      "regret",            "exploration_rounds",       "learner_bits",
                    "memory_bits", "regret_per_round"};
        case ExperimentKind::lemma1:
            return {"seed", "length", "lo", "hi", "expectation", "bound", "within_bound"};
        case ExperimentKind::orthogonality:
            return {"seed", "depth", "lower", "upper", "lhs", "rhs", "abs_diff"};
        case ExperimentKind::lb_error:
            return {"seed", "m", "b", "t0", "w", "arm", "error", "node_error", "bound"};
        case ExperimentKind::lb_claim4:
            return {"d", "minimum", "equal_parents", "unequal_parents", "bound", "holds"};
        case ExperimentKind::sd_demo:
            return {"seed", "tau", "t0", "w", "intersect", "hit", "argmax", "correct_on_hit", "answer", "correct"};
        case ExperimentKind::sparsity:
            return {"seed", "window", "phi", "worst_window_start", "bound", "naive_match"};
        case ExperimentKind::sketch_bench:
            return {"seed", "stream_length", "phi", "returned", "returned_count", "max_count", "success",
                    "bits", "width", "depth"};
    }
    return {};
}

std::vector<std::string> metrics_for(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::bai:
        case ExperimentKind::sparse_bai:
            return {"error", "bits", "queries"};
        case ExperimentKind::regret:
            return {"regret", "exploration_rounds", "learner_bits", "regret_per_round"};
        case ExperimentKind::lemma1:
            return {"expectation", "within_bound"};
        case ExperimentKind::orthogonality:
            return {"abs_diff"};
        case ExperimentKind::lb_error:
            return {"error", "node_error"};
        case ExperimentKind::lb_claim4:
            return {"minimum", "holds"};
        case ExperimentKind::sd_demo:
            return {"hit", "correct_on_hit", "correct"};
        case ExperimentKind::sparsity:
            return {"phi", "naive_match"};
        case ExperimentKind::sketch_bench:
            return {"success", "bits"};
    }
    return {};
}

// Naive phi: every window summed from scratch.
double naive_local_sparsity(const BanditInstance& inst, Round w) {
    double worst = 0.0;
    for (Round start = 1; start + w - 1 <= inst.horizon(); ++start) {
        double sq = 0.0, top = 0.0;
        for (std::size_t a = 0; a < inst.arms(); ++a) {
            double n = 0.0;
            for (Round t = start; t < start + w; ++t) n += inst.reward(a, t);
            sq += n * n;
            top = std::max(top, n);
        }
        if (top == 0.0) throw PhiUndefined(start, w);
        worst = std::max(worst, sq / (top * top));
    }
    return worst;
}

struct TrialContext {
    const ExperimentConfig& config;
    const ExperimentParams& params;
    const std::optional<BanditInstance>& shared_instance;
};

TrialRecord run_trial(const TrialContext& ctx, std::size_t index) {
    const std::uint64_t seed = trial_seed(ctx.config, index);
    Rng rng(seed);
    std::optional<BanditInstance> own;
    auto instance = [&]() -> const BanditInstance& {
        if (ctx.config.instance_per_trial) {
            if (!own) own = build_instance(ctx.config.instance, rng.split("instance").next());
            return *own;
        }
        return *ctx.shared_instance;
    };

    TrialRecord rec;
    switch (ctx.config.kind) {
        case ExperimentKind::bai:
        case ExperimentKind::sparse_bai: {
            const auto& p = std::get<BaiExperimentParams>(ctx.params);
            const auto& inst = instance();
            const ScaleRange scales = resolve_scales(p, inst.horizon());
            Prediction pred;
            if (ctx.config.kind == ExperimentKind::bai) {
                pred = run_bai(inst, scales, rng);
            } else {
                auto sp = SparseBaiParams::defaults(inst.horizon(), *p.phi, p.failure);
                if (p.eps) sp.eps = *p.eps;
                if (p.delta) sp.delta = *p.delta;
                pred = run_sparse_bai(inst, sp, scales, rng);
            }
            const auto sc = score(inst, pred);
            rec = {{"seed", seed},         {"m", pred.window.m},       {"b", pred.window.b},
                   {"t0", pred.window.t0}, {"w", pred.window.w},       {"arm", pred.arm},
                   {"error", sc.error},    {"bits", pred.memory.total()}, {"queries", pred.queries}};
            break;
        }
        case ExperimentKind::regret: {
            const auto& p = std::get<RegretExperimentParams>(ctx.params);
            const auto& inst = instance();
            const std::size_t q = resolve_blocks(p, inst);
            const double eta = p.eta.value_or(default_hedge_eta(inst.arms(), q));
            std::unique_ptr<OnlineLearner> learner;
            if (p.learner == "hedge")
                learner = std::make_unique<HedgeLearner>(inst.arms(), eta);
            else
                learner = std::make_unique<PoolHedgeLearner>(inst.arms(), *p.pool, p.epoch, eta, rng.split("learner"));
            ReductionOptions opts{q, p.mode, p.quantize_bits};
            const auto trace = run_block_reduction(inst, *learner, opts, rng);
            const auto report = regret_report(trace);
            rec = {{"seed", seed},
                   {"learner", learner->name()},
                   {"K", inst.arms()},
                   {"T", inst.horizon()},
                   {"Q", q},
                   {"s", learner->max_support()},
                   {"regret", trace.regret},
                   {"exploration_rounds", report.exploration_rounds},
                   {"learner_bits", learner->bits()},
                   {"memory_bits", trace.memory.total()},
                   {"regret_per_round", trace.regret / static_cast<double>(inst.horizon())}};
            break;
        }
        case ExperimentKind::lemma1: {
            const auto& p = std::get<Lemma1ExperimentParams>(ctx.params);
            std::vector<double> seq(p.length);
            for (auto& x : seq) x = rng.uniform();
            const auto res = lemma1_gap(seq, {p.lo, p.hi});
            rec = {{"seed", seed}, {"length", p.length}, {"lo", p.lo}, {"hi", p.hi}, {"expectation", res.expectation}};
            if (res.bound) {
                rec["bound"] = *res.bound;
                rec["within_bound"] = res.expectation <= *res.bound + 1e-12 ? 1 : 0;
            } else {
                rec["bound"] = nullptr;
                rec["within_bound"] = nullptr;
            }
            break;
        }
        case ExperimentKind::orthogonality: {
            const auto& p = std::get<OrthogonalityExperimentParams>(ctx.params);
            std::vector<double> seq(std::size_t{1} << p.depth);
            for (auto& x : seq) x = rng.uniform();
            unsigned best_l = 0, best_u = 0;
            double best_lhs = 0.0, best_rhs = 0.0, worst = -1.0;
            auto consider = [&](unsigned l, unsigned u) {
                const auto res = orthogonality_check(seq, l, u);
                const double diff = std::abs(res.lhs - res.rhs);
                if (diff > worst) {
                    worst = diff;
                    best_l = l, best_u = u, best_lhs = res.lhs, best_rhs = res.rhs;
                }
            };
            if (p.lower) {
                consider(*p.lower, *p.upper);
            } else {
                for (unsigned l = 0; l <= p.depth; ++l)
                    for (unsigned u = l + 1; u <= p.depth; ++u) consider(l, u);
            }
            rec = {{"seed", seed}, {"depth", p.depth}, {"lower", best_l}, {"upper", best_u},
                   {"lhs", best_lhs}, {"rhs", best_rhs}, {"abs_diff", worst}};
            break;
        }
        case ExperimentKind::lb_error: {
            const auto& p = std::get<LbErrorExperimentParams>(ctx.params);
            Rng tree_rng = rng.split("sign_tree", 1);
            const auto first = sample_sign_tree(p.height, tree_rng);
            Rng other_rng = rng.split("sign_tree", 2);
            const auto second = p.shared_signs ? first : sample_sign_tree(p.height, other_rng);
            const auto inst = sign_tree_pair_to_instance(first, second);
            const auto pred = run_full_info_predictor(inst, default_scale_range(inst.horizon()), rng);
            const auto sc = score(inst, pred);
            rec = {{"seed", seed},
                   {"m", pred.window.m},
                   {"b", pred.window.b},
                   {"t0", pred.window.t0},
                   {"w", pred.window.w},
                   {"arm", pred.arm},
                   {"error", sc.error},
                   {"node_error", sign_tree_node_error(first, second, pred.window, pred.arm)},
                   {"bound", 1.0 / (8.0 * p.height)}};
            break;
        }
        case ExperimentKind::lb_claim4: {
            const auto& p = std::get<Claim4ExperimentParams>(ctx.params);
            const auto d = static_cast<unsigned>(index + 1);
            const auto v = claim4_oracle(d, p.copy_probability);
            rec = {{"d", d},
                   {"minimum", v.minimum},
                   {"equal_parents", v.equal_parents},
                   {"unequal_parents", v.unequal_parents},
                   {"bound", v.bound},
                   {"holds", v.minimum >= v.bound ? 1 : 0}};
            break;
        }
        case ExperimentKind::sd_demo: {
            const auto& p = std::get<SdDemoExperimentParams>(ctx.params);
            const Round horizon = p.horizon;
            const Round w = horizon / p.ratio;
            SDInstanceSpec spec{p.universe, p.alice, p.bob, 0, p.band_fraction, horizon, true};
            spec.pivot = 1 + static_cast<Round>(rng.below(static_cast<std::uint64_t>(horizon)));
            const auto inst = gen_set_disjointness(spec, w);
            const auto window = sample_window_at_scale(horizon, floor_log2(w) + 1, rng);
            const auto margin = static_cast<Round>(std::ceil(p.band_fraction * static_cast<double>(w) - 1e-9));
            const bool hit = window.t0 + margin <= spec.pivot && spec.pivot <= window.t0 + w - margin;

            std::size_t argmax = 0;
            double best = -1.0;
            for (std::size_t a = 0; a < inst.arms(); ++a) {
                const double avg = window_average(inst, a, window.t0, w);
                if (avg > best) best = avg, argmax = a;
            }
            std::set<std::size_t> a_set(p.alice.begin(), p.alice.end());
            bool intersect = false;
            for (auto b : p.bob) intersect = intersect || a_set.count(b) > 0;
            const bool decision = argmax != 0;
            const bool answer = hit ? decision : rng.bernoulli(0.5);
            rec = {{"seed", seed},      {"tau", spec.pivot},    {"t0", window.t0},
                   {"w", w},            {"intersect", intersect ? 1 : 0}, {"hit", hit ? 1 : 0},
                   {"argmax", argmax}};
            if (hit)
                rec["correct_on_hit"] = decision == intersect ? 1 : 0;
            else
                rec["correct_on_hit"] = nullptr;
            rec["answer"] = answer ? 1 : 0;
            rec["correct"] = answer == intersect ? 1 : 0;
            break;
        }
        case ExperimentKind::sparsity: {
            const auto& p = std::get<SparsityExperimentParams>(ctx.params);
            const auto& inst = instance();
            const auto prof = local_sparsity(inst, p.window);
            rec = {{"seed", seed}, {"window", p.window}, {"phi", prof.phi}, {"worst_window_start", prof.worst_window_start}};
            const auto& gen = inst.generator();
            if (gen && gen->name == "polarized") {
                const double r = gen->params.at("r").get<double>();
                const double k = gen->params.at("k").get<double>();
                const double t = gen->params.at("t").get<double>();
                rec["bound"] = 4.0 * r + 4.0 * (k - r) / std::pow(t, 0.75);
            } else {
                rec["bound"] = nullptr;
            }
            if (p.naive_check)
                rec["naive_match"] = naive_local_sparsity(inst, p.window) == prof.phi ? 1 : 0;
            else
                rec["naive_match"] = nullptr;
            break;
        }
        case ExperimentKind::sketch_bench: {
            const auto& p = std::get<SketchBenchExperimentParams>(ctx.params);
            const std::size_t universe = p.heavy + p.light;
            std::vector<std::uint64_t> ids(universe);
            for (std::size_t i = 0; i < universe; ++i) ids[i] = i;
            shuffle(ids, rng);  // ids[0 .. heavy-1] are the heavy items
            std::vector<std::uint64_t> counts(universe, 0);
            std::vector<std::uint64_t> stream;
            for (std::size_t i = 0; i < universe; ++i) {
                const auto c = i < p.heavy ? p.heavy_count : p.light_count;
                counts[ids[i]] = c;
                stream.insert(stream.end(), c, ids[i]);
            }
            shuffle(stream, rng);
            double sq = 0.0;
            std::uint64_t top = 0;
            for (auto c : counts) sq += static_cast<double>(c) * static_cast<double>(c), top = std::max(top, c);
            const double phi = sq / (static_cast<double>(top) * static_cast<double>(top));
            Sketch sketch = new_sketch(universe, phi, p.eps, p.delta, stream.size(), rng.next());
            for (auto item : stream) sketch.update(item);
            const auto chosen = sketch.approx_top();
            const bool ok = static_cast<double>(counts[chosen]) >= (1.0 - p.eps) * static_cast<double>(top);
            rec = {{"seed", seed},
                   {"stream_length", stream.size()},
                   {"phi", phi},
                   {"returned", chosen},
                   {"returned_count", counts[chosen]},
                   {"max_count", top},
                   {"success", ok ? 1 : 0},
                   {"bits", sketch.bits_used()},
                   {"width", sketch.params().width},
                   {"depth", sketch.params().depth}};
            break;
        }
    }
    return rec;
}

}  // namespace

std::vector<std::pair<std::string, MetricSummary>> summarize_records(ExperimentKind kind,
                                                                     const std::vector<TrialRecord>& records) {
    std::vector<std::pair<std::string, MetricSummary>> out;
    for (const auto& name : metrics_for(kind)) {
        std::vector<double> values;
        for (const auto& r : records)
            if (r.contains(name) && r.at(name).is_number()) values.push_back(r.at(name).get<double>());
        if (!values.empty()) out.emplace_back(name, summarize(values));
    }
    return out;
}

const MetricSummary& ExperimentResult::metric(const std::string& name) const {
    for (const auto& [n, s] : summary)
        if (n == name) return s;
    throw std::out_of_range("no summary for metric '" + name + "'" +
                            (summary_note.empty() ? std::string() : " (" + summary_note + ")"));
}

std::vector<double> ExperimentResult::column(const std::string& name) const {
    std::vector<double> out;
    for (const auto& r : records)
        if (r.contains(name) && r.at(name).is_number()) out.push_back(r.at(name).get<double>());
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const ExperimentParams params = parse_params(config.kind, config.params);
    std::optional<BanditInstance> shared;
    if (needs_instance(config.kind) && !config.instance_per_trial) shared = build_instance(config.instance);

    ExperimentResult result;
    result.kind = config.kind;
    result.columns = columns_for(config.kind);
    const TrialContext ctx{config, params, shared};
    for (std::size_t i = 0; i < config.trials; ++i) {
        try {
            result.records.push_back(run_trial(ctx, i));
        } catch (const std::exception& e) {
            result.failures.push_back({i, e.what()});
        }
    }
    if (config.trials == 0)
        result.summary_note = "trials = 0: no records, summary refused";
    else if (result.records.empty())
        result.summary_note = "every trial failed: summary refused";
    else
        result.summary = summarize_records(config.kind, result.records);
    return result;
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

namespace {

std::string csv_cell(const ordered_json& v) {
    if (v.is_null()) return "";
    if (v.is_number_float()) return format_number(v.get<double>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char c : s) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
        return quoted + "\"";
    }
    return v.dump();
}

}  // namespace

void write_csv(const ExperimentResult& result, std::ostream& out) {
    for (std::size_t i = 0; i < result.columns.size(); ++i) out << (i ? "," : "") << result.columns[i];
    out << '\n';
    for (const auto& r : result.records) {
        for (std::size_t i = 0; i < result.columns.size(); ++i) {
            const auto& col = result.columns[i];
            out << (i ? "," : "") << (r.contains(col) ? csv_cell(r.at(col)) : std::string());
        }
        out << '\n';
    }
}

ordered_json summary_json(const ExperimentResult& result) {
    ordered_json s = ordered_json::object();
    for (const auto& [name, m] : result.summary)
        s[name] = {{"mean", m.mean}, {"std", m.std}, {"se", m.se}, {"count", m.count},
                   {"ci95", {m.ci_low, m.ci_high}}};
    ordered_json out = {{"kind", to_string(result.kind)},
                        {"requested", result.requested()},
                        {"succeeded", result.records.size()},
                        {"failed", result.failures.size()},
                        {"metrics", s}};
    if (!result.summary_note.empty()) out["note"] = result.summary_note;
    return out;
}

void write_json(const ExperimentConfig& config, const ExperimentResult& result, std::ostream& out) {
    ordered_json failures = ordered_json::array();
    for (const auto& f : result.failures) failures.push_back({{"trial", f.trial}, {"error", f.message}});
    ordered_json doc = {{"config", ordered_json::parse(config.to_json().dump())},
                        {"columns", result.columns},
                        {"records", result.records},
                        {"failures", failures},
                        {"summary", summary_json(result)}};
    out << doc.dump(2) << '\n';
}

CsvTable parse_csv(std::istream& in) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
                    cell += '"', ++i;
                else if (c == '"')
                    quoted = false;
                else
                    cell += c;
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(std::move(cell));
                cell.clear();
            } else {
                cell += c;
            }
        }
        cells.push_back(std::move(cell));
        return cells;
    };
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
    table.header = split(line);
    while (std::getline(in, line)) {
        auto row = split(line);
        if (row.size() != table.header.size()) throw std::invalid_argument("csv: ragged row");
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Lower-bound pieces

Claim4Value claim4_oracle(unsigned depth, std::optional<double> copy_probability) {
    if (depth < 1) throw std::invalid_argument("claim4_oracle: depth must be >= 1");
    const long double alpha = copy_probability ? static_cast<long double>(*copy_probability)
                                               : 0.5L * (1.0L + std::sqrt(1.0L - 1.0L / depth));
    const int signs[2] = {1, -1};
    // loss[parent pair][choice]: Pr[children differ and the chosen child is -1 | parents]
    long double loss[4][2] = {};
    for (int p = 0; p < 4; ++p) {
        const int s1 = signs[p >> 1], s2 = signs[p & 1];
        for (int c = 0; c < 4; ++c) {
            const int c1 = signs[c >> 1], c2 = signs[c & 1];
            if (c1 == c2) continue;
            const long double pr = (c1 == s1 ? alpha : 1.0L - alpha) * (c2 == s2 ? alpha : 1.0L - alpha);
            if (c1 < 0) loss[p][0] += pr;
            if (c2 < 0) loss[p][1] += pr;
        }
    }
    Claim4Value best;
    long double best_total = std::numeric_limits<long double>::infinity();
    for (int h = 0; h < 16; ++h) {
        long double equal = 0.0L, unequal = 0.0L;
        for (int p = 0; p < 4; ++p) {
            const long double term = 0.25L * loss[p][(h >> p) & 1];
            (signs[p >> 1] == signs[p & 1] ? equal : unequal) += term;
        }
        if (equal + unequal < best_total) {
            best_total = equal + unequal;
            best.equal_parents = static_cast<double>(equal);
            best.unequal_parents = static_cast<double>(unequal);
        }
    }
    best.minimum = static_cast<double>(best_total);
    best.bound = 1.0 / (8.0 * depth);
    return best;
}

ExperimentResult lb_error_experiment(unsigned height, std::size_t trials, std::uint64_t seed, bool shared_signs) {
    ExperimentConfig c;
    c.kind = ExperimentKind::lb_error;
    c.params = {{"height", height}, {"shared_signs", shared_signs}};
    c.trials = trials;
    c.master_seed = seed;
    return run_experiment(c);
}

SdDemoSummary sd_demo_summary(const ExperimentResult& result) {
    SdDemoSummary s;
    s.trials = result.records.size();
    if (s.trials == 0) throw std::invalid_argument("sd_demo: no trials to summarize");
    const auto hit = summarize(result.column("hit"));
    const auto answer = summarize(result.column("correct"));
    const auto on_hit = result.column("correct_on_hit");
    s.hit_rate = hit.mean;
    s.hit_se = hit.se;
    s.hits = on_hit.size();
    s.conditional_accuracy = on_hit.empty() ? std::numeric_limits<double>::quiet_NaN() : summarize(on_hit).mean;
    s.sd_answer_accuracy = answer.mean;
    s.answer_se = answer.se;
    return s;
}

SdDemoSummary sd_demo(const SdDemoExperimentParams& params, std::size_t trials, std::uint64_t seed) {
    ExperimentConfig c;
    c.kind = ExperimentKind::sd_demo;
    c.params = {{"n", params.universe}, {"A", params.alice},        {"B", params.bob},
                {"c", params.ratio},    {"lambda", params.band_fraction}, {"t", params.horizon}};
    c.trials = trials;
    c.master_seed = seed;
    return sd_demo_summary(run_experiment(c));
}

}  // namespace lbai
