#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "lbai/harness.hpp"
#include "lbai/instance_io.hpp"

using namespace lbai;
using nlohmann::json;

namespace {

ExperimentConfig small_bai(std::size_t trials = 8) {
    return ExperimentConfig::from_json({{"kind", "bai"},
                                        {"instance", {{"generator", "bernoulli"},
                                                      {"params", {{"means", {0.2, 0.5, 0.8}}, {"t", 1024}}},
                                                      {"seed", 3}}},
                                        {"trials", trials},
                                        {"seed", 42}});
}

std::string csv_of(const ExperimentResult& r) {
    std::ostringstream os;
    write_csv(r, os);
    return os.str();
}

}  // namespace

TEST_CASE("kind names round trip") {
    for (const char* name : {"bai", "sparse-bai", "regret", "lemma1", "orthogonality", "lb-error", "lb-claim4",
                             "sd-demo", "sparsity", "sketch-bench"})
        CHECK(to_string(parse_kind(name)) == name);
    CHECK_THROWS_AS(parse_kind("bandit"), std::invalid_argument);
}

TEST_CASE("config validation happens before any trial") {
    auto doc = small_bai().to_json();
    doc["colour"] = "red";
    CHECK_THROWS_AS(ExperimentConfig::from_json(doc), std::invalid_argument);

    auto c = small_bai();
    c.params = {{"scale_lo", 2}, {"typo", 1}};
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);

    c = small_bai();
    c.kind = ExperimentKind::sparse_bai;
    CHECK_THROWS_WITH_AS(run_experiment(c), "params.phi: required for sparse-bai", std::invalid_argument);

    c = small_bai();
    c.params = {{"scale_lo", 1}, {"scale_hi", 11}};
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);

    c = small_bai();
    c.instance = nullptr;
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);

    c = small_bai();
    c.instance["params"]["means"] = {0.2, 1.5};
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);

    auto regret = ExperimentConfig::from_json(
        {{"kind", "regret"},
         {"instance", {{"generator", "phased_bernoulli"}, {"params", {{"k", 4}, {"t", 1000}, {"phases", 2}}}}},
         {"params", {{"blocks", 7}}}});
    CHECK_THROWS_AS(run_experiment(regret), std::invalid_argument);
}

TEST_CASE("zero trials: empty records and a refused summary") {
    const auto r = run_experiment(small_bai(0));
    CHECK(r.records.empty());
    CHECK(r.failures.empty());
    CHECK(r.summary.empty());
    CHECK(r.summary_note == "trials = 0: no records, summary refused");
    CHECK_THROWS_AS(r.metric("error"), std::out_of_range);
    CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("summary statistics") {
    const auto s = summarize({1, 2, 3, 4});
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3)));
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3) / 2));
    CHECK(s.ci_low == doctest::Approx(2.5 - 1.96 * s.se));
    CHECK(s.count == 4);
    const auto one = summarize({7});
    CHECK(one.std == 0.0);
}

TEST_CASE("same config and seed give byte-identical output") {
    const auto c = small_bai();
    const auto a = run_experiment(c), b = run_experiment(c);
    CHECK(csv_of(a) == csv_of(b));
    std::ostringstream ja, jb;
    write_json(c, a, ja);
    write_json(c, b, jb);
    CHECK(ja.str() == jb.str());

    auto other = c;
    other.master_seed = 43;
    CHECK(csv_of(run_experiment(other)) != csv_of(a));
}

TEST_CASE("a trial's stream does not depend on how many trials run") {
    auto few = small_bai(3), many = small_bai(9);
    const auto a = run_experiment(few), b = run_experiment(many);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.records[i].dump() == b.records[i].dump());
    CHECK(trial_seed(few, 2) == trial_seed(many, 2));
}

TEST_CASE("summaries are recomputable from records") {
    const auto r = run_experiment(small_bai(20));
    const auto again = summarize_records(r.kind, r.records);
    REQUIRE(again.size() == r.summary.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].first == r.summary[i].first);
        CHECK(again[i].second.mean == r.summary[i].second.mean);
        CHECK(again[i].second.se == r.summary[i].second.se);
    }
}

TEST_CASE("a constant-arm instance has zero mean error") {
    auto c = small_bai(30);
    c.instance["params"]["means"] = {1.0, 1.0, 1.0};
    CHECK(run_experiment(c).metric("error").mean == 0.0);
}

TEST_CASE("CSV and JSON records round trip") {
    const auto c = small_bai(10);
    const auto r = run_experiment(c);
    std::istringstream in(csv_of(r));
    const auto table = parse_csv(in);
    CHECK(table.header == r.columns);
    REQUIRE(table.rows.size() == r.records.size());
    for (std::size_t i = 0; i < r.records.size(); ++i)
        for (std::size_t j = 0; j < r.columns.size(); ++j) {
            const auto& v = r.records[i].at(r.columns[j]);
            const auto& cell = table.rows[i][j];
            if (v.is_number_float()) {
                const double parsed = std::stod(cell);
                CHECK(parsed == std::stod(format_number(v.get<double>())));
                CHECK(std::abs(parsed - v.get<double>()) <= 1e-11 * std::max(1.0, std::abs(v.get<double>())));
            } else {
                CHECK(cell == v.dump());
            }
        }

    std::ostringstream js;
    write_json(c, r, js);
    const auto doc = nlohmann::ordered_json::parse(js.str());
    REQUIRE(doc.at("records").size() == r.records.size());
    for (std::size_t i = 0; i < r.records.size(); ++i) CHECK(doc.at("records")[i] == r.records[i]);
    CHECK(doc.at("summary").at("requested") == 10);
}

TEST_CASE("failed trials are counted, never dropped") {
    const auto path = std::filesystem::temp_directory_path() / "lbai_zero_window.json";
    save_instance(BanditInstance::from_rows({{0, 0, 0, 0, 1, 1}, {0, 0, 0, 0, 0, 1}}), path);
    auto c = ExperimentConfig::from_json({{"kind", "sparsity"},
                                          {"instance", {{"file", path.string()}}},
                                          {"params", {{"window", 2}}},
                                          {"trials", 5}});
    const auto r = run_experiment(c);
    CHECK(r.records.empty());
    CHECK(r.failures.size() == 5);
    CHECK(r.requested() == 5);
    CHECK(r.summary_note == "every trial failed: summary refused");
    std::filesystem::remove(path);
}

TEST_CASE("claim-4 oracle: exact values and the degenerate copy law") {
    const auto d1 = claim4_oracle(1);
    CHECK(d1.minimum == 0.25);
    CHECK(d1.equal_parents == 0.125);
    CHECK(d1.bound == 0.125);
    for (unsigned d = 1; d <= 64; ++d) {
        const auto v = claim4_oracle(d);
        const double alpha = 0.5 * (1 + std::sqrt(1 - 1.0 / d));
        CHECK(v.minimum >= v.bound);
        CHECK(v.equal_parents == doctest::Approx(1.0 / (8 * d)).epsilon(1e-12));
        CHECK(v.unequal_parents == doctest::Approx(0.5 * (1 - alpha) * (1 - alpha)).epsilon(1e-9));
    }
    const auto sure = claim4_oracle(5, 1.0);
    CHECK(sure.equal_parents == 0.0);
    CHECK(sure.minimum == 0.0);
    CHECK_THROWS_AS(claim4_oracle(0), std::invalid_argument);
}

TEST_CASE("lower-bound experiment: identical arms give no error") {
    const auto r = lb_error_experiment(8, 40, 5, true);
    CHECK(r.metric("error").mean == 0.0);
    CHECK(r.metric("node_error").mean == 0.0);
}

TEST_CASE("set-disjointness demo decides correctly on every hit") {
    SdDemoExperimentParams p;
    p.horizon = 1 << 10;
    p.universe = 6;
    p.alice = {1, 2, 3};
    p.bob = {3, 4};
    const auto yes = sd_demo(p, 2000, 1);
    CHECK(yes.hits > 0);
    CHECK(yes.conditional_accuracy == 1.0);
    p.bob = {4, 5};
    const auto no = sd_demo(p, 2000, 2);
    CHECK(no.hits > 0);
    CHECK(no.conditional_accuracy == 1.0);
    // w = T/2, so t0 = w + 1 and hits need tau in [t0 + 205, t0 + 307]
    CHECK(yes.hit_rate == doctest::Approx(103.0 / 1024).epsilon(0.25));
    p.ratio = 3;
    CHECK_THROWS_AS(sd_demo(p, 10, 1), std::invalid_argument);
}

TEST_CASE("sketch bench and regret experiments run end to end") {
    auto sb = ExperimentConfig::from_json({{"kind", "sketch-bench"}, {"trials", 20}, {"seed", 1}});
    const auto r = run_experiment(sb);
    CHECK(r.records.size() == 20);
    CHECK(r.metric("success").mean >= 0.9);

    auto rg = ExperimentConfig::from_json(
        {{"kind", "regret"},
         {"instance", {{"generator", "phased_bernoulli"}, {"params", {{"k", 4}, {"t", 2000}, {"phases", 2}}}}},
         {"instance_per_trial", true},
         {"params", {{"learner", "pool-hedge"}, {"pool", 2}, {"blocks", 100}}},
         {"trials", 3}});
    const auto g = run_experiment(rg);
    REQUIRE(g.records.size() == 3);
    CHECK(g.records[0].at("exploration_rounds") == 200);
    CHECK(g.records[0].at("s") == 2);
}
