#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lbai/instance.hpp"
#include "lbai/regret.hpp"

namespace lbai {

enum class ExperimentKind {
    bai,
    sparse_bai,
    regret,
    lemma1,
    orthogonality,
    lb_error,
    lb_claim4,
    sd_demo,
    sparsity,
    sketch_bench,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& text);

enum class OutputFormat { csv, json };

// Typed parameter blocks, one per experiment kind. Every field has a default
// except where noted; parse_params rejects keys it does not know.

struct BaiExperimentParams {
    std::optional<unsigned> scale_lo, scale_hi;
    std::optional<double> phi;  // sparse-bai only, required there
    std::optional<double> eps, delta;
    double failure = 0.1;
};

struct RegretExperimentParams {
    std::string learner = "hedge";  // hedge | pool-hedge
    std::optional<std::size_t> blocks;
    double sigma = 10.0;
    std::optional<std::size_t> pool;  // s for pool-hedge
    std::size_t epoch = 1;
    std::optional<double> eta;
    LossMode mode = LossMode::complement;
    std::optional<unsigned> quantize_bits;
};

struct Lemma1ExperimentParams {
    std::size_t length = 1024;
    unsigned lo = 3, hi = 9;
};

struct OrthogonalityExperimentParams {
    unsigned depth = 8;
    std::optional<unsigned> lower, upper;  // both absent: every valid pair
};

struct LbErrorExperimentParams {
    unsigned height = 16;
    bool shared_signs = false;
};

struct Claim4ExperimentParams {
    std::optional<double> copy_probability;  // replaces alpha_d for every d
};

struct SdDemoExperimentParams {
    std::size_t universe = 8;
    std::vector<std::size_t> alice{1, 2, 3};
    std::vector<std::size_t> bob{3, 4, 5};
    Round ratio = 2;  // c; the window is w = T / c
    double band_fraction = 0.4;
    Round horizon = Round{1} << 14;
};

struct SparsityExperimentParams {
    Round window = 256;
    bool naive_check = false;
};

struct SketchBenchExperimentParams {
    std::size_t heavy = 2;
    std::uint64_t heavy_count = 1000;
    std::size_t light = 50;
    std::uint64_t light_count = 10;
    double eps = 0.3;
    double delta = 0.1;
};

using ExperimentParams =
    std::variant<BaiExperimentParams, RegretExperimentParams, Lemma1ExperimentParams, OrthogonalityExperimentParams,
                 LbErrorExperimentParams, Claim4ExperimentParams, SdDemoExperimentParams, SparsityExperimentParams,
                 SketchBenchExperimentParams>;

ExperimentParams parse_params(ExperimentKind kind, const nlohmann::json& params);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::bai;
    nlohmann::json instance;  // {generator, params, seed} or {file}; null when unused
    nlohmann::json params = nlohmann::json::object();
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    std::string output;  // empty: stdout
    OutputFormat format = OutputFormat::csv;
    bool instance_per_trial = false;  // reseed the generator from each trial's stream
    double max_failure_fraction = 0.0;

    /// Throws std::invalid_argument describing the first bad field.
    void validate() const;

    static ExperimentConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

/// Seed of trial i: the first draw of derive(master_seed, kind, i).
std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial);

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation
    double se = 0.0;
    std::size_t count = 0;
    double ci_low = 0.0, ci_high = 0.0;  // mean -/+ 1.96 SE
};

/// Throws std::invalid_argument on an empty sample.
MetricSummary summarize(const std::vector<double>& values);

using TrialRecord = nlohmann::ordered_json;

struct TrialFailure {
    std::size_t trial = 0;
    std::string message;
};

struct ExperimentResult {
    ExperimentKind kind = ExperimentKind::bai;
    std::vector<std::string> columns;
    std::vector<TrialRecord> records;  // successful trials, in trial order
    std::vector<TrialFailure> failures;
    std::vector<std::pair<std::string, MetricSummary>> summary;
    std::string summary_note;  // why the summary is empty, if it is

    std::size_t requested() const { return records.size() + failures.size(); }
    const MetricSummary& metric(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

/// Validates, runs every trial in index order, and summarizes. Trial errors
/// are caught and recorded in `failures`.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Recomputes the summary from the records alone.
std::vector<std::pair<std::string, MetricSummary>> summarize_records(ExperimentKind kind,
                                                                     const std::vector<TrialRecord>& records);

void write_csv(const ExperimentResult& result, std::ostream& out);
void write_json(const ExperimentConfig& config, const ExperimentResult& result, std::ostream& out);
nlohmann::ordered_json summary_json(const ExperimentResult& result);

/// Header plus rows of raw cells; no quoting support beyond what write_csv emits.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(std::istream& in);

/// 12 significant digits, the CSV float format.
std::string format_number(double value);

// ---------------------------------------------------------------------------
// Lower-bound oracles and demonstrations

struct Claim4Value {
    double minimum = 0.0;          // min over the 16 predictors h
    double equal_parents = 0.0;    // contribution of S1 == S2 (predictor independent)
    double unequal_parents = 0.0;  // best predictor's contribution when S1 != S2
    double bound = 0.0;            // 1 / (8 d)
};

/// Exact minimum over every h: {+-1}^2 -> {arm 1, arm 2} of
/// Pr[child signs differ and h picks the smaller child], parents uniform.
Claim4Value claim4_oracle(unsigned depth, std::optional<double> copy_probability = std::nullopt);

/// Full-information error on random sign-tree pairs of height M.
ExperimentResult lb_error_experiment(unsigned height, std::size_t trials, std::uint64_t seed,
                                     bool shared_signs = false);

struct SdDemoSummary {
    double hit_rate = 0.0;
    double hit_se = 0.0;
    double conditional_accuracy = 0.0;  // NaN with no hits
    std::size_t hits = 0;
    double sd_answer_accuracy = 0.0;
    double answer_se = 0.0;
    std::size_t trials = 0;
};

SdDemoSummary sd_demo(const SdDemoExperimentParams& params, std::size_t trials, std::uint64_t seed);
SdDemoSummary sd_demo_summary(const ExperimentResult& result);

/// Builds (or loads) the instance a config describes, with an optional seed override.
BanditInstance build_instance(const nlohmann::json& spec, std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace lbai
