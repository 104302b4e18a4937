// Command-line front end for the lookahead best-arm experiments.
//
// Exit codes: 0 success, 1 invalid input, 2 too many failed trials,
// 3 a `verify` assertion did not hold.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "lbai/generators.hpp"
#include "lbai/harness.hpp"
#include "lbai/instance_io.hpp"

namespace {

using nlohmann::json;
using namespace lbai;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kTrialFailures = 2;
constexpr int kAssertion = 3;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out;
    std::string format;
    std::string config_path;
};

struct ExperimentFlags {
    std::string instance;
    std::string params;
    bool instance_per_trial = false;
};

json parse_json_arg(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string(what) + ": " + e.what());
    }
}

// `{...}` is inline JSON; anything else names a saved instance file.
json instance_arg(const std::string& text) {
    if (!text.empty() && text.front() == '{') return parse_json_arg(text, "--instance");
    return json{{"file", text}};
}

ExperimentConfig assemble(ExperimentKind kind, const Globals& g, const ExperimentFlags& f,
                          std::size_t default_trials, const json& default_params = json::object(),
                          const json& default_instance = nullptr) {
    ExperimentConfig c;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw std::invalid_argument("cannot open config '" + g.config_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw std::invalid_argument("config: " + std::string(e.what()));
        }
        if (!doc.contains("kind")) doc["kind"] = to_string(kind);
        c = ExperimentConfig::from_json(doc);
        if (c.kind != kind)
            throw std::invalid_argument("config kind '" + to_string(c.kind) + "' does not match subcommand '" +
                                        to_string(kind) + "'");
    } else {
        c.kind = kind;
        c.trials = default_trials;
        c.params = default_params;
        c.instance = default_instance;
        c.instance_per_trial = !default_instance.is_null();
    }
    if (!f.instance.empty()) c.instance = instance_arg(f.instance);
    if (!f.params.empty()) c.params = parse_json_arg(f.params, "--params");
    if (f.instance_per_trial) c.instance_per_trial = true;
    if (g.seed) c.master_seed = *g.seed;
    if (g.trials) c.trials = *g.trials;
    if (!g.out.empty()) c.output = g.out;
    if (g.format == "json")
        c.format = OutputFormat::json;
    else if (g.format == "csv")
        c.format = OutputFormat::csv;
    return c;
}

void emit(const ExperimentConfig& c, const ExperimentResult& r) {
    auto write = [&](std::ostream& os) {
        if (c.format == OutputFormat::csv)
            write_csv(r, os);
        else
            write_json(c, r, os);
    };
    if (c.output.empty()) {
        write(std::cout);
    } else {
        std::ofstream os(c.output, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write '" + c.output + "'");
        write(os);
        if (c.format == OutputFormat::csv) {
            std::ofstream side(c.output + ".summary.json", std::ios::binary);
            side << summary_json(r).dump(2) << '\n';
        }
    }
    std::cerr << to_string(r.kind) << ": " << r.records.size() << "/" << r.requested() << " trials ok";
    if (!r.summary_note.empty()) std::cerr << " (" << r.summary_note << ")";
    std::cerr << '\n';
    for (const auto& [name, m] : r.summary)
        std::cerr << "  " << name << ": mean " << format_number(m.mean) << "  se " << format_number(m.se)
                  << "  n " << m.count << '\n';
    for (const auto& f : r.failures) std::cerr << "  trial " << f.trial << " failed: " << f.message << '\n';
}

int status_of(const ExperimentConfig& c, const ExperimentResult& r) {
    if (r.requested() == 0) return kOk;
    const double frac = static_cast<double>(r.failures.size()) / static_cast<double>(r.requested());
    return frac > c.max_failure_fraction ? kTrialFailures : kOk;
}

int run_and_emit(const ExperimentConfig& c) {
    const auto r = run_experiment(c);
    emit(c, r);
    return status_of(c, r);
}

// Each verify target runs its experiment and then checks every record.
int verify(const std::string& target, const Globals& g, const ExperimentFlags& f) {
    ExperimentConfig c;
    std::string column;
    if (target == "lemma1") {
        c = assemble(ExperimentKind::lemma1, g, f, 200, {{"length", 1024}, {"lo", 3}, {"hi", 9}});
        column = "within_bound";
    } else if (target == "orthogonality") {
        c = assemble(ExperimentKind::orthogonality, g, f, 100, {{"depth", 8}});
        column = "abs_diff";
    } else if (target == "claim4") {
        c = assemble(ExperimentKind::lb_claim4, g, f, 64);
        column = "holds";
    } else if (target == "sparsity") {
        c = assemble(ExperimentKind::sparsity, g, f, 3, {{"window", 256}},
                     {{"generator", "polarized"}, {"params", {{"k", 64}, {"t", 65536}, {"r", 2}}}});
        column = "phi";
    } else {
        throw std::invalid_argument("verify: unknown target '" + target + "'");
    }
    const auto r = run_experiment(c);
    emit(c, r);
    if (const int s = status_of(c, r); s != kOk) return s;

    std::size_t bad = 0;
    for (const auto& rec : r.records) {
        bool ok = true;
        if (target == "orthogonality") {
            ok = rec.at("abs_diff").get<double>() <= 1e-10;
        } else if (target == "sparsity") {
            if (!rec.at("bound").is_null()) ok = rec.at("phi").get<double>() <= rec.at("bound").get<double>();
            if (!rec.at("naive_match").is_null()) ok = ok && rec.at("naive_match").get<int>() == 1;
        } else {
            ok = rec.at(column).is_null() || rec.at(column).get<int>() == 1;
        }
        bad += ok ? 0 : 1;
    }
    std::cerr << "verify " << target << ": " << (bad == 0 ? "PASS" : "FAIL") << " (" << bad << " of "
              << r.records.size() << " records violate the check)\n";
    return bad == 0 ? kOk : kAssertion;
}

int generate(const Globals& g, const std::string& spec_text, bool dense) {
    if (spec_text.empty()) throw std::invalid_argument("gen: --instance is required");
    json spec = instance_arg(spec_text);
    if (g.seed && !spec.contains("file")) spec["seed"] = *g.seed;
    BanditInstance inst = build_instance(spec);
    if (dense) {
        std::vector<double> values;
        values.reserve(inst.arms() * static_cast<std::size_t>(inst.horizon()));
        for (std::size_t a = 0; a < inst.arms(); ++a)
            for (Round t = 1; t <= inst.horizon(); ++t) values.push_back(inst.reward(a, t));
        inst = BanditInstance::dense(inst.arms(), inst.horizon(), std::move(values), inst.label());
    }
    const std::string text = instance_to_json(inst).dump(2) + "\n";
    if (g.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(g.out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write '" + g.out + "'");
        os << text;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lookahead best-arm identification experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--trials", g.trials, "Number of trials");
    app.add_option("--out", g.out, "Output file (default: stdout)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--config", g.config_path, "JSON experiment config");

    ExperimentFlags flags;
    auto add_experiment_flags = [&](CLI::App* sub, bool with_instance) {
        if (with_instance) {
            sub->add_option("--instance", flags.instance, "Inline instance JSON or a saved instance file");
            sub->add_flag("--instance-per-trial", flags.instance_per_trial,
                          "Reseed the instance generator from each trial's stream");
        }
        sub->add_option("--params", flags.params, "Algorithm parameters as JSON");
    };

    bool dense = false;
    std::string gen_spec;
    auto* gen = app.add_subcommand("gen", "Generate an instance file");
    gen->add_option("--instance", gen_spec, "Generator JSON {generator, params, seed}")->required();
    gen->add_flag("--dense", dense, "Store every reward instead of the generator spec");

    struct Experiment {
        const char* name;
        ExperimentKind kind;
        const char* help;
        bool with_instance;
        std::size_t default_trials;
    };
    const Experiment experiments[] = {
        {"bai", ExperimentKind::bai, "Dense lookahead best-arm identification", true, 100},
        {"sparse-bai", ExperimentKind::sparse_bai, "Sketch-based lookahead best-arm identification", true, 100},
        {"regret", ExperimentKind::regret, "Block reduction from bandit to expert feedback", true, 10},
        {"sd-demo", ExperimentKind::sd_demo, "Set-Disjointness reduction demonstration", false, 5000},
        {"lb-error", ExperimentKind::lb_error, "Sign-tree lower-bound error experiment", false, 2000},
        {"sketch-bench", ExperimentKind::sketch_bench, "ApproxTop success on synthetic streams", false, 500},
    };
    std::vector<std::pair<CLI::App*, const Experiment*>> subs;
    for (const auto& e : experiments) {
        auto* sub = app.add_subcommand(e.name, e.help);
        add_experiment_flags(sub, e.with_instance);
        subs.emplace_back(sub, &e);
    }

    std::string target;
    auto* ver = app.add_subcommand("verify", "Run an exact check and fail on any violation");
    ver->add_option("target", target, "lemma1 | orthogonality | claim4 | sparsity")
        ->required()
        ->check(CLI::IsMember({"lemma1", "orthogonality", "claim4", "sparsity"}));
    add_experiment_flags(ver, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (gen->parsed()) return generate(g, gen_spec, dense);
        if (ver->parsed()) return verify(target, g, flags);
        for (const auto& [sub, e] : subs)
            if (sub->parsed()) return run_and_emit(assemble(e->kind, g, flags, e->default_trials));
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kTrialFailures;
    }
    return kInvalid;
}
