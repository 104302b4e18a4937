// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lbai/dyadic.hpp"
#include "lbai/generators.hpp"
#include "lbai/harness.hpp"
#include "lbai/lookahead.hpp"
#include "lbai/regret.hpp"
#include "lbai/sparsity.hpp"

using namespace lbai;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0 = none
    std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

unsigned bits_for(std::uint64_t values) {
    unsigned b = 0;
    while ((std::uint64_t{1} << b) < values) ++b;
    return b;
}

std::vector<double> random_sequence(std::size_t n, Rng& rng) {
    std::vector<double> s(n);
    for (auto& x : s) x = rng.uniform();
    return s;
}

// ---------------------------------------------------------------------------

Outcome lemma1_bound() {
    Rng rng(101);
    double worst = 0.0;
    const double bound = 4.0 / 6.0;
    for (int i = 0; i < 200; ++i) {
        const auto seq = random_sequence(1024, rng);
        worst = std::max(worst, lemma1_gap(seq, {3, 9}).expectation);
    }
    return {worst <= bound + 1e-12, fmt("max gap %.6f vs bound %.6f", worst, bound)};
}

Outcome orthogonality() {
    Outcome out;
    const std::vector<double> hand{1, 0, 0, 0};
    const auto h = orthogonality_check(hand, 0, 2);
    const bool hand_ok = std::abs(h.lhs - 3.0 / 16) <= 1e-15 && std::abs(h.rhs - 3.0 / 16) <= 1e-15;
    Rng rng(202);
    double worst = 0.0;
    std::size_t pairs = 0;
    for (int i = 0; i < 100; ++i) {
        const unsigned m = 1 + static_cast<unsigned>(rng.below(8));
        const auto seq = random_sequence(std::size_t{1} << m, rng);
        for (unsigned lo = 0; lo < m; ++lo)
            for (unsigned hi = lo + 1; hi <= m; ++hi, ++pairs) {
                const auto r = orthogonality_check(seq, lo, hi);
                worst = std::max(worst, std::abs(r.lhs - r.rhs));
            }
    }
    out.pass = hand_ok && worst <= 1e-10;
    out.detail = fmt("hand case lhs=%.6g rhs=%.6g; %zu pairs, max |lhs-rhs| %.3g", h.lhs, h.rhs, pairs, worst);
    return out;
}

Outcome martingale() {
    Rng rng(303);
    std::size_t nodes = 0, bad = 0;
    for (int rep = 0; rep < 20; ++rep)
        for (unsigned m = 1; m <= 10; ++m) {
            const DyadicTree tree(random_sequence(std::size_t{1} << m, rng));
            for (unsigned d = 0; d < m; ++d)
                for (std::uint64_t i = 0; i < (std::uint64_t{1} << d); ++i, ++nodes)
                    bad += tree.value(d, i) != (tree.value(d + 1, 2 * i) + tree.value(d + 1, 2 * i + 1)) / 2;
        }
    return {bad == 0, fmt("%zu internal nodes, %zu mismatches", nodes, bad)};
}

Outcome estimator_unbiased() {
    Rng gen(404);
    double worst_z = 0.0;
    const int reps = 10000;
    for (int inst_id = 0; inst_id < 10; ++inst_id) {
        const std::size_t k = 2 + gen.below(7);
        const Round t = 256;
        std::vector<double> v(k * t);
        for (auto& x : v) x = gen.uniform();
        const auto inst = BanditInstance::dense(k, t, std::move(v));
        const auto window = WindowChoice::at(5, 1 + gen.below(8));
        std::vector<double> sum(k, 0.0), sq(k, 0.0);
        Rng rng = Rng::derive(404, "reruns", static_cast<std::uint64_t>(inst_id));
        for (int r = 0; r < reps; ++r) {
            const auto p = run_bai_at(inst, window, rng);
            for (std::size_t a = 0; a < k; ++a) {
                const double y = static_cast<double>(k) * p.estimates[a] / static_cast<double>(window.w);
                sum[a] += y;
                sq[a] += y * y;
            }
        }
        for (std::size_t a = 0; a < k; ++a) {
            double truth = 0.0;
            for (Round s = window.observation_start(); s < window.t0; ++s) truth += inst.reward(a, s);
            truth /= static_cast<double>(window.w);
            const double mean = sum[a] / reps;
            const double se = std::sqrt((sq[a] / reps - mean * mean) / (reps - 1));
            worst_z = std::max(worst_z, std::abs(mean - truth) / se);
        }
    }
    return {worst_z <= 4.0, fmt("10 instances, max |mean - y| / SE = %.3f (limit 4)", worst_z)};
}

Outcome lower_bound_error() {
    const auto r = lb_error_experiment(16, 2000, 505);
    const auto& e = r.metric("error");
    const double target = 1.0 / 128;
    return {e.mean >= target - 3 * e.se, fmt("mean error %.5f, SE %.5f, need >= %.5f", e.mean, e.se, target - 3 * e.se)};
}

Outcome claim4() {
    bool all = true;
    double tightest = 1e9;
    for (unsigned d = 1; d <= 64; ++d) {
        const auto v = claim4_oracle(d);
        all = all && v.minimum >= 1.0 / (8.0 * d);
        tightest = std::min(tightest, v.minimum * 8.0 * d);
    }
    const auto one = claim4_oracle(1);
    const bool tight = one.minimum == 0.125;
    return {all && tight, fmt("bound holds for d=1..64: %s (min ratio %.4f); value at d=1 is %.6g, tightness expects 0.125",
                              all ? "yes" : "no", tightest, static_cast<double>(one.minimum))};
}

Outcome sketch_bench() {
    const auto c = ExperimentConfig::from_json({{"kind", "sketch-bench"}, {"trials", 500}, {"seed", 606}});
    const auto r = run_experiment(c);
    const auto& p = std::get<SketchBenchExperimentParams>(parse_params(c.kind, c.params));
    std::size_t bits_mismatch = 0;
    double worst_phi = 0.0;
    for (const auto& rec : r.records) {
        const double phi = rec.at("phi").get<double>();
        const auto n = rec.at("stream_length").get<std::uint64_t>();
        const std::size_t universe = p.heavy + p.light;
        worst_phi = std::max(worst_phi, phi);
        const auto width = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(8 * phi / (p.eps * p.eps))));
        const auto depth = static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n) / p.delta)));
        const std::uint64_t cap = static_cast<std::uint64_t>(std::ceil(2 * phi)) + 1;
        const std::uint64_t counter = bits_for(n + 1) + kDefaultFractionBits + 1;
        const std::uint64_t expected = depth * width * counter + cap * bits_for(universe) + cap * counter +
                                       bits_for(n + 1) + 4 * depth * 61;
        bits_mismatch += rec.at("bits").get<std::uint64_t>() != expected;
    }
    const auto& s = r.metric("success");
    const bool ok = r.failures.empty() && r.records.size() == 500 && s.mean >= 0.88 && bits_mismatch == 0 &&
                    worst_phi <= 8.0;
    return {ok, fmt("success %.3f over %zu trials (need 0.88), phi %.4f, bit mismatches %zu", s.mean,
                    r.records.size(), worst_phi, bits_mismatch)};
}

double naive_phi(const BanditInstance& inst, Round w) {
    double phi = 0.0;
    for (Round start = 1; start + w - 1 <= inst.horizon(); ++start) {
        double sq = 0.0, top = 0.0;
        for (std::size_t a = 0; a < inst.arms(); ++a) {
            double n = 0.0;
            for (Round t = start; t < start + w; ++t) n += inst.reward(a, t);
            sq += n * n;
            top = std::max(top, n);
        }
        phi = std::max(phi, sq / (top * top));
    }
    return phi;
}

Outcome sparsity_claim() {
    std::ostringstream detail;
    bool ok = true;
    const Round big = Round{1} << 16;
    for (std::size_t r : {1u, 2u, 4u}) {
        PolarizedParams pp;
        pp.arms = 64;
        pp.horizon = big;
        pp.heavy = r;
        const auto inst = gen_polarized(pp, 700 + r).instance;
        const double phi = local_sparsity(inst, 256).phi;
        const double bound = 4.0 * r + 4.0 * (64 - r) / std::pow(static_cast<double>(big), 0.75);
        ok = ok && phi <= bound;
        detail << fmt("r=%zu phi %.4f <= %.4f; ", r, phi, bound);
    }
    std::size_t matches = 0;
    for (std::size_t r : {1u, 2u, 4u}) {
        PolarizedParams pp;
        pp.arms = 64;
        pp.horizon = Round{1} << 12;
        pp.heavy = r;
        const auto inst = gen_polarized(pp, 800 + r).instance;
        matches += local_sparsity(inst, 256).phi == naive_phi(inst, 256);
    }
    ok = ok && matches == 3;
    detail << fmt("sliding equals naive on %zu/3 instances at T=4096", matches);
    return {ok, detail.str()};
}

Outcome memory_separation() {
    const Round t = Round{1} << 18;
    PolarizedParams pp;
    pp.arms = 256;
    pp.horizon = t;
    pp.heavy = 2;
    const auto inst = gen_polarized(pp, 909).instance;
    // Measured phi at the narrowest default window, the most favourable sizing for the sketch
    const Round narrowest = Round{1} << (default_scale_range(t).lo - 1);
    const double phi = local_sparsity(inst, narrowest).phi;
    const auto params = SparseBaiParams::defaults(t, phi);
    double worst_ratio = 0.0;
    for (std::uint64_t i = 0; i < 5; ++i) {
        Rng a = Rng::derive(909, "trial", i), b = Rng::derive(909, "trial", i);
        const auto dense = run_bai(inst, default_scale_range(t), a);
        const auto sparse = run_sparse_bai(inst, params, default_scale_range(t), b);
        worst_ratio = std::max(worst_ratio, static_cast<double>(sparse.memory.total()) /
                                                static_cast<double>(dense.memory.total()));
    }
    std::vector<double> bits;
    const auto window = WindowChoice::at(18, 1);
    for (std::size_t k : {64u, 128u, 256u}) {
        PolarizedParams q = pp;
        q.arms = k;
        Rng rng(910);
        bits.push_back(static_cast<double>(run_bai_at(gen_polarized(q, 911).instance, window, rng).memory.total()));
    }
    const double slope1 = (bits[1] - bits[0]) / 64, slope2 = (bits[2] - bits[1]) / 128;
    const bool linear = slope1 > 0 && slope1 == slope2;
    const bool ratio_ok = worst_ratio <= 0.10;
    return {linear && ratio_ok, fmt("phi %.4f at w=%lld; sparse/dense bits ratio %.2f (need <= 0.10); dense bits per arm %.1f and %.1f%s",
                                    phi, static_cast<long long>(narrowest), worst_ratio, slope1, slope2, linear ? " (linear)" : " (not linear)")};
}

Outcome sd_reduction() {
    std::ostringstream detail;
    bool ok = true;
    const Round t = Round{1} << 14;
    for (bool intersect : {true, false}) {
        SdDemoExperimentParams p;
        p.horizon = t;
        p.universe = 8;
        p.alice = {1, 2, 3};
        p.bob = intersect ? std::vector<std::size_t>{3, 4, 5} : std::vector<std::size_t>{4, 5, 6};
        p.ratio = 2;
        p.band_fraction = 0.4;
        const auto s = sd_demo(p, 5000, intersect ? 1001 : 1002);
        const double hit_floor = 0.1 - 1.0 / static_cast<double>(t - 1) - 3 * s.hit_se;
        const bool here = s.conditional_accuracy == 1.0 && s.hit_rate >= hit_floor && s.sd_answer_accuracy > 0.51;
        ok = ok && here;
        detail << fmt("%s: hit %.4f (floor %.4f), accuracy on hit %.3f, overall %.4f; ",
                      intersect ? "intersecting" : "disjoint", s.hit_rate, hit_floor, s.conditional_accuracy,
                      s.sd_answer_accuracy);
    }
    return {ok, detail.str()};
}

Outcome reduction_unbiased() {
    Rng gen(1100);
    const std::size_t k = 6;
    const Round t = 200;
    std::vector<double> v(k * t);
    for (auto& x : v) x = gen.uniform();
    const auto inst = BanditInstance::dense(k, t, std::move(v));
    const SparseDistribution d({{0, 0.1}, {2, 0.4}, {3, 0.2}, {5, 0.3}});
    const Round start = 41, len = 50;
    const int reps = 10000;
    std::vector<double> sum(k, 0.0), sq(k, 0.0);
    Rng rng(1101);
    for (int r = 0; r < reps; ++r) {
        const auto out = play_block(inst, LossMode::complement, start, len, d, 0, rng);
        for (const auto& e : out.record.estimate) sum[e.arm] += e.loss, sq[e.arm] += e.loss * e.loss;
    }
    double worst_z = 0.0;
    for (const auto& e : d.support()) {
        double c = 0.0;
        for (Round s = start; s < start + len; ++s) c += 1.0 - inst.reward(e.arm, s);
        c /= static_cast<double>(len);
        const double mean = sum[e.arm] / reps;
        const double se = std::sqrt((sq[e.arm] / reps - mean * mean) / (reps - 1));
        worst_z = std::max(worst_z, std::abs(mean - c) / se);
    }

    const auto big = gen_phased_bernoulli(20, 2000, 4, 1102);
    PoolHedgeLearner learner(20, 4, 2, 0.3, Rng(1103));
    Rng play(1104);
    const auto trace = run_block_reduction(big, learner, {40, LossMode::complement, std::nullopt}, play);
    std::uint64_t support_total = 0;
    for (const auto& rec : trace.records) support_total += rec.distribution.size();
    const auto rep = regret_report(trace);
    const auto flagged = static_cast<std::uint64_t>(std::count(trace.exploration.begin(), trace.exploration.end(), true));
    const bool counts = rep.exploration_rounds == support_total && flagged == support_total &&
                        support_total <= 40 * 4;
    return {worst_z <= 3.0 && counts,
            fmt("max |mean c-hat - c| / SE = %.3f (limit 3); exploration rounds %llu = sum |J| %llu <= Q*s = 160",
                worst_z, static_cast<unsigned long long>(rep.exploration_rounds),
                static_cast<unsigned long long>(support_total))};
}

ExperimentResult regret_run(Round t, std::optional<std::size_t> blocks, std::size_t trials) {
    json params = {{"learner", "hedge"}};
    if (blocks) params["blocks"] = *blocks;
    return run_experiment(ExperimentConfig::from_json(
        {{"kind", "regret"},
         {"instance", {{"generator", "phased_bernoulli"}, {"params", {{"k", 10}, {"t", t}, {"phases", 10}}}}},
         {"instance_per_trial", true},
         {"params", params},
         {"trials", trials},
         {"seed", 1200}}));
}

Outcome reduction_regret() {
    const double q = 300, t = 30000, k = 10, s = 10;
    const double bound = q * s + (t / q) * std::sqrt(q * std::log(k) / 2);
    const auto main = regret_run(30000, 300, 100);
    const auto& m = main.metric("regret");
    const bool within = main.failures.empty() && m.mean <= bound + 3 * m.se;
    const auto small = regret_run(10000, std::nullopt, 30), large = regret_run(30000, std::nullopt, 30);
    const double per_small = small.metric("regret_per_round").mean, per_large = large.metric("regret_per_round").mean;
    return {within && per_large < per_small,
            fmt("mean regret %.1f (SE %.1f) vs bound %.1f; regret/T %.4f at T=1e4 (Q=%g), %.4f at T=3e4 (Q=%g)", m.mean,
                m.se, bound, per_small, small.records.front().at("Q").get<double>(), per_large,
                large.records.front().at("Q").get<double>())};
}

std::string render(const ExperimentConfig& c) {
    const auto r = run_experiment(c);
    std::ostringstream csv, js;
    write_csv(r, csv);
    write_json(c, r, js);
    return csv.str() + js.str();
}

Outcome determinism() {
    const json bern = {{"generator", "bernoulli"}, {"params", {{"means", {0.2, 0.5, 0.8}}, {"t", 1024}}}, {"seed", 3}};
    const json pol = {{"generator", "polarized"}, {"params", {{"k", 16}, {"t", 4096}, {"r", 2}}}, {"seed", 4}};
    const std::vector<json> configs = {
        {{"kind", "bai"}, {"instance", bern}, {"trials", 20}},
        {{"kind", "sparse-bai"}, {"instance", bern}, {"params", {{"phi", 3.0}}}, {"trials", 10}},
        {{"kind", "regret"},
         {"instance", {{"generator", "phased_bernoulli"}, {"params", {{"k", 4}, {"t", 2000}, {"phases", 2}}}}},
         {"params", {{"blocks", 100}}},
         {"trials", 3}},
        {{"kind", "lemma1"}, {"trials", 5}},
        {{"kind", "orthogonality"}, {"trials", 5}},
        {{"kind", "lb-error"}, {"trials", 50}},
        {{"kind", "lb-claim4"}, {"trials", 8}},
        {{"kind", "sd-demo"}, {"trials", 50}},
        {{"kind", "sparsity"}, {"instance", pol}, {"params", {{"window", 64}}}, {"trials", 2}},
        {{"kind", "sketch-bench"}, {"trials", 10}},
    };
    std::size_t same = 0;
    for (auto doc : configs) {
        doc["seed"] = 1300;
        const auto c = ExperimentConfig::from_json(doc);
        same += render(c) == render(c);
    }
    return {same == configs.size(), fmt("%zu/%zu experiment kinds byte-identical across reruns", same, configs.size())};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "lemma1-bound", 10, lemma1_bound},
        {2, "orthogonality", 5, orthogonality},
        {3, "martingale-identity", 0, martingale},
        {4, "estimator-unbiased", 0, estimator_unbiased},
        {5, "error-lower-bound", 60, lower_bound_error},
        {6, "claim4-exact", 0, claim4},
        {7, "countsketch-approx-top", 30, sketch_bench},
        {8, "sparsity-analyzer", 0, sparsity_claim},
        {9, "memory-separation", 0, memory_separation},
        {10, "sd-reduction", 0, sd_reduction},
        {11, "reduction-unbiased", 0, reduction_unbiased},
        {12, "reduction-regret", 0, reduction_regret},
        {13, "determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit > 0 && secs >= c.time_limit) {
            o.pass = false;
            o.detail += fmt(" [over time limit %.0f s]", c.time_limit);
        }
        failed += !o.pass;
        std::printf("%s %2d %-24s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
