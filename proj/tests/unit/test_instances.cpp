#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "lbai/generators.hpp"
#include "lbai/instance.hpp"
#include "lbai/instance_io.hpp"
#include "lbai/sparsity.hpp"

using namespace lbai;

namespace {

std::vector<double> row_of(const BanditInstance& inst, std::size_t arm) {
    std::vector<double> r;
    for (Round t = 1; t <= inst.horizon(); ++t) r.push_back(inst.reward(arm, t));
    return r;
}

// phi over every window, each summed from scratch
double brute_phi(const BanditInstance& inst, Round w) {
    double worst = 0.0;
    for (Round s = 1; s + w - 1 <= inst.horizon(); ++s) {
        double sq = 0.0, top = 0.0;
        for (std::size_t a = 0; a < inst.arms(); ++a) {
            double n = 0.0;
            for (Round t = s; t < s + w; ++t) n += inst.reward(a, t);
            sq += n * n;
            top = std::max(top, n);
        }
        worst = std::max(worst, sq / (top * top));
    }
    return worst;
}

}  // namespace

TEST_CASE("dense instance: indexing and range checks") {
    const auto inst = BanditInstance::from_rows({{0.0, 0.5, 1.0}, {1.0, 0.25, 0.0}});
    CHECK(inst.arms() == 2);
    CHECK(inst.horizon() == 3);
    CHECK(inst.reward(0, 2) == 0.5);
    CHECK(inst.reward(1, 2) == 0.25);
    CHECK(inst.window_sum(1, 1, 2) == 1.25);
    CHECK(window_average(inst, 0, 2, 2) == 0.75);
    CHECK_THROWS_AS(inst.reward(2, 1), std::out_of_range);
    CHECK_THROWS_AS(inst.reward(0, 0), std::out_of_range);
    CHECK_THROWS_AS(inst.reward(0, 4), std::out_of_range);
    CHECK_THROWS_AS(BanditInstance::from_rows({{0.0, 1.5}}), std::out_of_range);
}

TEST_CASE("instance JSON round trip, dense and generated") {
    const auto dense = BanditInstance::from_rows({{0.0, 0.5, 1.0}, {1.0, 0.25, 0.0}}, "tiny");
    const auto back = instance_from_json(instance_to_json(dense));
    for (std::size_t a = 0; a < 2; ++a) CHECK(row_of(back, a) == row_of(dense, a));

    const auto gen = gen_polarized({8, 256, 2, std::nullopt, std::nullopt}, 17).instance;
    const auto doc = instance_to_json(gen);
    CHECK(doc.at("kind") == "generator");
    const auto regen = instance_from_json(doc);
    for (std::size_t a = 0; a < 8; ++a) CHECK(row_of(regen, a) == row_of(gen, a));

    const auto path = std::filesystem::temp_directory_path() / "lbai_instance_roundtrip.json";
    save_instance(gen, path);
    const auto loaded = load_instance(path);
    CHECK(row_of(loaded, 3) == row_of(gen, 3));
    std::filesystem::remove(path);
}

TEST_CASE("instance JSON validation") {
    auto doc = instance_to_json(BanditInstance::from_rows({{0.0, 1.0}}));
    auto bad = doc;
    bad["colour"] = 1;
    CHECK_THROWS_AS(instance_from_json(bad), std::invalid_argument);

    bad = doc;
    bad["rewards"][1] = 1.0 + 1e-6;
    CHECK_THROWS_AS(instance_from_json(bad), std::out_of_range);

    auto close = doc;
    close["rewards"][1] = 1.0 + 1e-13;
    CHECK(instance_from_json(close).reward(0, 2) == 1.0);
    close["rewards"][0] = -1e-13;
    CHECK(instance_from_json(close).reward(0, 1) == 0.0);
}

TEST_CASE("sign tree values follow the depth law") {
    CHECK(copy_probability(1) == 0.5);
    CHECK(sign_tree_value(0, 1, 8) == 0.5);
    CHECK(sign_tree_value(8, 1, 8) == 1.0);
    CHECK(sign_tree_value(8, -1, 8) == 0.0);
    CHECK(sign_tree_value(2, -1, 8) == doctest::Approx(0.25));
}

TEST_CASE("sign tree: a child's expected value equals its parent's") {
    // alpha f(d, s) + (1 - alpha) f(d, -s) = f(d - 1, s)
    for (unsigned height : {4u, 16u, 20u})
        for (unsigned d = 1; d <= height; ++d)
            for (int s : {1, -1}) {
                const double a = copy_probability(d);
                const double child = a * sign_tree_value(d, s, height) + (1 - a) * sign_tree_value(d, -s, height);
                CHECK(child == doctest::Approx(sign_tree_value(d - 1, s, height)).epsilon(1e-14));
            }
}

TEST_CASE("sign tree sampling: copy frequency and leaf means") {
    Rng rng(3);
    const unsigned h = 6;
    std::vector<double> same(h + 1, 0.0), total(h + 1, 0.0);
    double leaf_sum[2] = {0, 0};
    double leaf_n[2] = {0, 0};
    for (int rep = 0; rep < 4000; ++rep) {
        const auto tree = sample_sign_tree(h, rng);
        CHECK(tree.sign(1) == 1);
        for (std::size_t v = 2; v < (std::size_t{1} << (h + 1)); ++v) {
            const unsigned d = SignTreeAssignment::depth_of(v);
            same[d] += tree.sign(v) == tree.sign(v / 2);
            total[d] += 1;
        }
        // leaf average under each depth-2 node, grouped by that node's sign
        const auto leaves = tree.leaf_row();
        for (std::uint64_t b = 1; b <= 4; ++b) {
            const auto node = SignTreeAssignment::node_at(2, b);
            double mean = 0;
            for (std::size_t i = (b - 1) * 16; i < b * 16; ++i) mean += leaves[i] / 16.0;
            const int k = tree.sign(node) > 0 ? 0 : 1;
            leaf_sum[k] += mean;
            leaf_n[k] += 1;
        }
    }
    for (unsigned d = 1; d <= h; ++d) {
        const double p = copy_probability(d);
        const double se = std::sqrt(p * (1 - p) / total[d]) + 1e-9;
        CHECK(std::abs(same[d] / total[d] - p) < 5 * se + 1e-3);
    }
    CHECK(leaf_sum[0] / leaf_n[0] == doctest::Approx(sign_tree_value(2, 1, h)).epsilon(0.02));
    CHECK(leaf_sum[1] / leaf_n[1] == doctest::Approx(sign_tree_value(2, -1, h)).epsilon(0.04));
}

TEST_CASE("sign tree pair instance uses the leaves as rewards") {
    const auto inst = gen_sign_tree_pair(5, 99);
    CHECK(inst.arms() == 2);
    CHECK(inst.horizon() == 32);
    for (std::size_t a = 0; a < 2; ++a)
        for (Round t = 1; t <= 32; ++t) CHECK((inst.reward(a, t) == 0.0 || inst.reward(a, t) == 1.0));
    const auto shared = gen_sign_tree_pair(5, 99, true);
    CHECK(row_of(shared, 0) == row_of(shared, 1));
}

TEST_CASE("polarized instances have the promised counts") {
    const PolarizedParams p{16, 4096, 3, std::nullopt, std::nullopt};
    CHECK(p.resolved_light_cap() == 32);   // ceil(4 * 4096^(1/4)) = 32
    CHECK(p.resolved_heavy_zeros() == 32); // floor(64 / 2)
    const auto gen = gen_polarized(p, 5);
    CHECK(gen.heavy_arms.size() == 3);
    for (std::size_t a = 0; a < 16; ++a) {
        const auto r = row_of(gen.instance, a);
        const double ones = std::accumulate(r.begin(), r.end(), 0.0);
        const bool heavy = std::find(gen.heavy_arms.begin(), gen.heavy_arms.end(), a) != gen.heavy_arms.end();
        CHECK(ones == (heavy ? 4096 - 32 : 32));
    }
    CHECK_THROWS_AS(gen_polarized({4, 100, 5, std::nullopt, std::nullopt}, 1), std::invalid_argument);
}

TEST_CASE("set-disjointness instance: rows and the dummy band") {
    SDInstanceSpec spec{6, {1, 2, 3}, {3, 4}, 500, 0.4, 1000, true};
    const Round w = 250;  // lambda * w = 100 exactly
    const auto band = dummy_band(spec, w);
    CHECK(band.first == 400);
    CHECK(band.last == 599);
    CHECK(band.length() == 200);
    const auto inst = gen_set_disjointness(spec, w);
    CHECK(inst.arms() == 7);
    CHECK(inst.reward(0, 399) == 0.0);
    CHECK(inst.reward(0, 400) == 1.0);
    CHECK(inst.reward(0, 599) == 1.0);
    CHECK(inst.reward(0, 600) == 0.0);
    CHECK(inst.reward(3, 1) == 1.0);    // in both sets
    CHECK(inst.reward(3, 1000) == 1.0);
    CHECK(inst.reward(1, 499) == 1.0);  // only Alice's
    CHECK(inst.reward(1, 500) == 0.0);
    CHECK(inst.reward(4, 499) == 0.0);  // only Bob's
    CHECK(inst.reward(4, 500) == 1.0);
    CHECK(inst.reward(6, 700) == 0.0);  // in neither

    // on a window with the pivot well inside, the dummy averages exactly 4/5
    CHECK(window_average(inst, 0, 375, 250) == doctest::Approx(0.8));
    CHECK(window_average(inst, 1, 375, 250) <= 0.6 + 1e-12);

    SDInstanceSpec broken{6, {1, 2}, {1, 2}, 10, 0.4, 100, true};
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
    broken.promise = false;
    CHECK_NOTHROW(broken.validate());
    SDInstanceSpec outside{3, {4}, {}, 10, 0.4, 100, true};
    CHECK_THROWS_AS(outside.validate(), std::invalid_argument);
}

TEST_CASE("bernoulli and phased generators") {
    const auto b = gen_bernoulli({0.2, 0.7}, 20000, 8);
    CHECK(window_average(b, 0, 1, 20000) == doctest::Approx(0.2).epsilon(0.05));
    CHECK(window_average(b, 1, 1, 20000) == doctest::Approx(0.7).epsilon(0.03));
    CHECK_THROWS_AS(gen_bernoulli({1.5}, 10, 1), std::invalid_argument);

    const auto p = gen_phased_bernoulli(3, 3000, 3, 4);
    const auto again = instantiate(*p.generator());
    for (std::size_t a = 0; a < 3; ++a) CHECK(row_of(p, a) == row_of(again, a));
    CHECK_THROWS_AS(gen_phased_bernoulli(3, 10, 11, 4), std::invalid_argument);
}

TEST_CASE("local sparsity: closed form on a hand instance") {
    // window 2: counts (2,0) -> 1 ; (1,1) -> 2 ; (0,2) -> 1
    const auto inst = BanditInstance::from_rows({{1, 1, 0, 0}, {0, 0, 1, 1}});
    const auto prof = local_sparsity(inst, 2);
    CHECK(prof.phi == 2.0);
    CHECK(prof.worst_window_start == 2);
    CHECK(local_sparsity(inst, 1).phi == 1.0);
}

TEST_CASE("local sparsity matches the brute-force scan") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto inst = gen_polarized({12, 1024, 1 + seed % 3, std::nullopt, std::nullopt}, seed).instance;
        for (Round w : {16, 64, 256}) CHECK(local_sparsity(inst, w).phi == brute_phi(inst, w));
    }
    const auto fractional = BanditInstance::from_rows({{0.5, 0.25, 1, 0}, {0.125, 0.5, 0, 0.75}});
    CHECK(local_sparsity(fractional, 2).phi == doctest::Approx(brute_phi(fractional, 2)));
}

TEST_CASE("local sparsity refuses an all-zero window") {
    const auto inst = BanditInstance::from_rows({{1, 0, 0, 1}, {0, 0, 0, 0}});
    CHECK_THROWS_AS(local_sparsity(inst, 2), PhiUndefined);
    CHECK_THROWS_AS(local_sparsity(inst, 5), std::invalid_argument);
}
