#include "lbai/generators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace lbai {

// ---------------------------------------------------------------------------
// Sign trees

double copy_probability(unsigned depth) {
    if (depth < 1) throw std::invalid_argument("copy_probability: depth must be >= 1");
    return 0.5 * (1.0 + std::sqrt(1.0 - 1.0 / static_cast<double>(depth)));
}

double sign_tree_value(unsigned depth, int sign, unsigned height) {
    if (depth == 0) return 0.5;
    if (depth == height) return sign > 0 ? 1.0 : 0.0;
    const double r = std::sqrt(static_cast<double>(depth) / static_cast<double>(height));
    return 0.5 * (1.0 + sign * r);
}

unsigned SignTreeAssignment::depth_of(std::size_t node) {
    return static_cast<unsigned>(std::bit_width(node) - 1);
}

SignTreeAssignment::SignTreeAssignment(unsigned height, std::vector<std::int8_t> signs)
    : height_(height), signs_(std::move(signs)) {
    if (height < 1) throw std::invalid_argument("sign tree: depth must be >= 1");
    if (signs_.size() != (std::size_t{1} << (height + 1)))
        throw std::invalid_argument("sign tree: wrong node count");
    if (signs_[1] != 1) throw std::invalid_argument("sign tree: root sign must be +1");
    values_.resize(signs_.size());
    for (std::size_t v = 1; v < signs_.size(); ++v) {
        if (signs_[v] != 1 && signs_[v] != -1) throw std::invalid_argument("sign tree: sign not ±1");
        values_[v] = sign_tree_value(depth_of(v), signs_[v], height_);
    }
}

std::vector<double> SignTreeAssignment::leaf_row() const {
    const std::size_t first = std::size_t{1} << height_;
    return {values_.begin() + static_cast<std::ptrdiff_t>(first), values_.end()};
}

SignTreeAssignment sample_sign_tree(unsigned height, Rng& rng) {
    if (height < 1 || height > 26) throw std::invalid_argument("sample_sign_tree: depth must be in [1, 26]");
    std::vector<std::int8_t> signs(std::size_t{1} << (height + 1));
    signs[1] = 1;
    for (unsigned d = 1; d <= height; ++d) {
        const double alpha = copy_probability(d);
        const std::size_t first = std::size_t{1} << d;
        for (std::size_t v = first; v < 2 * first; ++v) {
            const std::int8_t parent = signs[v / 2];
            signs[v] = rng.bernoulli(alpha) ? parent : static_cast<std::int8_t>(-parent);
        }
    }
    return SignTreeAssignment(height, std::move(signs));
}

BanditInstance sign_tree_pair_to_instance(const SignTreeAssignment& first,
                                          const SignTreeAssignment& second) {
    if (first.height() != second.height())
        throw std::invalid_argument("sign_tree_pair_to_instance: depth mismatch");
    auto row = first.leaf_row();
    const auto other = second.leaf_row();
    const auto horizon = static_cast<Round>(row.size());
    row.insert(row.end(), other.begin(), other.end());
    return BanditInstance::dense(2, horizon, std::move(row),
                                 "sign-tree pair M=" + std::to_string(first.height()));
}

BanditInstance gen_sign_tree_pair(unsigned height, std::uint64_t seed, bool shared_signs) {
    Rng first_stream = Rng::derive(seed, "sign_tree", 1);
    Rng second_stream = shared_signs ? first_stream : Rng::derive(seed, "sign_tree", 2);
    const auto f1 = sample_sign_tree(height, first_stream);
    const auto f2 = sample_sign_tree(height, second_stream);
    GeneratorSpec spec{"sign_tree_pair", {{"depth", height}, {"shared", shared_signs}}, seed};
    return sign_tree_pair_to_instance(f1, f2).with_generator(std::move(spec));
}

// ---------------------------------------------------------------------------
// Polarized

namespace {

/// Each arm has a base value and a sorted list of rounds where it flips.
class ExceptionSource final : public RewardSource {
public:
    ExceptionSource(std::vector<double> base, std::vector<std::vector<Round>> flips)
        : base_(std::move(base)), flips_(std::move(flips)) {}

    double at(std::size_t arm, Round round) const override {
        const auto& f = flips_[arm];
        const bool flipped = std::binary_search(f.begin(), f.end(), round);
        return flipped ? 1.0 - base_[arm] : base_[arm];
    }

private:
    std::vector<double> base_;
    std::vector<std::vector<Round>> flips_;
};

}  // namespace

Round PolarizedParams::resolved_light_cap() const {
    if (light_cap) return *light_cap;
    return static_cast<Round>(std::ceil(4.0 * std::sqrt(std::sqrt(static_cast<double>(horizon)))));
}

Round PolarizedParams::resolved_heavy_zeros() const {
    if (heavy_zeros) return *heavy_zeros;
    return static_cast<Round>(std::floor(std::sqrt(static_cast<double>(horizon)) / 2.0));
}

PolarizedInstance gen_polarized(const PolarizedParams& params, std::uint64_t seed) {
    if (params.arms < 1 || params.horizon < 1)
        throw std::invalid_argument("gen_polarized: K and T must be positive");
    if (params.heavy < 1 || params.heavy > params.arms)
        throw std::invalid_argument("gen_polarized: need 1 <= r <= K");
    const Round light_cap = params.resolved_light_cap();
    const Round heavy_zeros = params.resolved_heavy_zeros();
    if (light_cap < 0 || light_cap > params.horizon)
        throw std::invalid_argument("gen_polarized: light_cap exceeds T");
    if (heavy_zeros < 0 || heavy_zeros > params.horizon)
        throw std::invalid_argument("gen_polarized: heavy_zeros exceeds T");

    Rng pick = Rng::derive(seed, "polarized/heavy");
    std::vector<std::size_t> heavy;
    for (auto a : sample_without_replacement(params.arms, params.heavy, pick))
        heavy.push_back(static_cast<std::size_t>(a));

    std::vector<double> base(params.arms, 0.0);
    std::vector<std::vector<Round>> flips(params.arms);
    for (std::size_t a = 0; a < params.arms; ++a) {
        const bool is_heavy = std::binary_search(heavy.begin(), heavy.end(), a);
        base[a] = is_heavy ? 1.0 : 0.0;
        Rng stream = Rng::derive(seed, "polarized/arm", a);
        const Round count = is_heavy ? heavy_zeros : light_cap;
        for (auto r : sample_without_replacement(static_cast<std::uint64_t>(params.horizon),
                                                 static_cast<std::uint64_t>(count), stream))
            flips[a].push_back(static_cast<Round>(r) + 1);
    }

    GeneratorSpec spec{"polarized",
                       {{"k", params.arms},
                        {"t", params.horizon},
                        {"r", params.heavy},
                        {"light_cap", light_cap},
                        {"heavy_zeros", heavy_zeros}},
                       seed};
    auto source = std::make_shared<ExceptionSource>(std::move(base), std::move(flips));
    auto inst = BanditInstance::generated(params.arms, params.horizon, std::move(source),
                                          "polarized r=" + std::to_string(params.heavy), std::move(spec));
    return {std::move(inst), std::move(heavy)};
}

// ---------------------------------------------------------------------------
// Set disjointness

void SDInstanceSpec::validate() const {
    if (universe < 1) throw std::invalid_argument("sd: universe must be >= 1");
    if (horizon < 1) throw std::invalid_argument("sd: horizon must be >= 1");
    if (pivot < 1 || pivot > horizon) throw std::invalid_argument("sd: pivot must lie in [1, T]");
    if (!(band_fraction > 0.0 && band_fraction < 0.5))
        throw std::invalid_argument("sd: lambda must lie in (0, 1/2)");
    auto check = [&](const std::vector<std::size_t>& set, const char* name) {
        for (auto e : set)
            if (e < 1 || e > universe)
                throw std::invalid_argument(std::string("sd: element of ") + name + " outside [1, n]");
    };
    check(alice, "A");
    check(bob, "B");
    if (promise) {
        std::size_t common = 0;
        for (auto a : alice)
            if (std::find(bob.begin(), bob.end(), a) != bob.end()) ++common;
        if (common > 1) throw std::invalid_argument("sd: promise |A ∩ B| <= 1 violated");
    }
}

Band dummy_band(const SDInstanceSpec& spec, Round window) {
    if (window < 1) throw std::invalid_argument("sd: window must be >= 1");
    constexpr double slack = 1e-9;  // lambda * w is exact up to representation error
    const double half = spec.band_fraction * static_cast<double>(window);
    const auto tau = static_cast<double>(spec.pivot);
    Round first = static_cast<Round>(std::ceil(tau - half - slack));
    Round last = static_cast<Round>(std::ceil(tau + half - slack)) - 1;
    first = std::max<Round>(first, 1);
    last = std::min<Round>(last, spec.horizon);
    return {first, last};
}

namespace {

class DisjointnessSource final : public RewardSource {
public:
    DisjointnessSource(const SDInstanceSpec& spec, Band band)
        : pivot_(spec.pivot), band_(band), in_a_(spec.universe + 1, 0), in_b_(spec.universe + 1, 0) {
        for (auto a : spec.alice) in_a_[a] = 1;
        for (auto b : spec.bob) in_b_[b] = 1;
    }

    double at(std::size_t arm, Round t) const override {
        if (arm == 0) return (t >= band_.first && t <= band_.last) ? 1.0 : 0.0;
        return t < pivot_ ? in_a_[arm] : in_b_[arm];
    }

private:
    Round pivot_;
    Band band_;
    std::vector<std::uint8_t> in_a_, in_b_;
};

}  // namespace

BanditInstance gen_set_disjointness(const SDInstanceSpec& spec, Round window) {
    spec.validate();
    const Band band = dummy_band(spec, window);
    if (band.length() == 0) throw std::invalid_argument("sd: dummy band lies wholly outside [1, T]");
    GeneratorSpec gs{"set_disjointness",
                     {{"n", spec.universe},
                      {"A", spec.alice},
                      {"B", spec.bob},
                      {"tau", spec.pivot},
                      {"lambda", spec.band_fraction},
                      {"t", spec.horizon},
                      {"w", window},
                      {"promise", spec.promise}},
                     0};
    return BanditInstance::generated(spec.universe + 1, spec.horizon,
                                     std::make_shared<DisjointnessSource>(spec, band),
                                     "set-disjointness tau=" + std::to_string(spec.pivot), std::move(gs));
}

// ---------------------------------------------------------------------------
// Bernoulli

namespace {

class BernoulliSource final : public RewardSource {
public:
    BernoulliSource(std::vector<double> means, std::uint64_t seed) : means_(std::move(means)), seed_(seed) {}

    double at(std::size_t arm, Round t) const override {
        std::uint64_t h = Rng::mix(seed_ ^ Rng::mix(arm * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(t)));
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        return u < means_[arm] ? 1.0 : 0.0;
    }

private:
    std::vector<double> means_;
    std::uint64_t seed_;
};

}  // namespace

BanditInstance gen_bernoulli(const std::vector<double>& means, Round horizon, std::uint64_t seed) {
    for (double m : means)
        if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("bernoulli: mean outside [0,1]");
    GeneratorSpec spec{"bernoulli", {{"means", means}, {"t", horizon}}, seed};
    return BanditInstance::generated(means.size(), horizon, std::make_shared<BernoulliSource>(means, seed),
                                     "bernoulli", std::move(spec));
}

namespace {

class PhasedSource final : public RewardSource {
public:
    PhasedSource(std::size_t arms, Round phase_length, std::vector<double> means, std::uint64_t seed)
        : arms_(arms), phase_length_(phase_length), means_(std::move(means)), seed_(seed) {}

    double at(std::size_t arm, Round t) const override {
        const auto phase = static_cast<std::size_t>((t - 1) / phase_length_);
        std::uint64_t h = Rng::mix(seed_ ^ Rng::mix(arm * 0xD1B54A32D192ED03ULL + static_cast<std::uint64_t>(t)));
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        return u < means_[phase * arms_ + arm] ? 1.0 : 0.0;
    }

private:
    std::size_t arms_;
    Round phase_length_;
    std::vector<double> means_;
    std::uint64_t seed_;
};

}  // namespace

BanditInstance gen_phased_bernoulli(std::size_t arms, Round horizon, std::size_t phases, std::uint64_t seed) {
    if (arms < 1 || horizon < 1) throw std::invalid_argument("phased_bernoulli: need K >= 1 and T >= 1");
    if (phases < 1 || static_cast<Round>(phases) > horizon)
        throw std::invalid_argument("phased_bernoulli: need 1 <= phases <= T");
    const Round length = (horizon + static_cast<Round>(phases) - 1) / static_cast<Round>(phases);
    std::vector<double> means(phases * arms);
    for (std::size_t p = 0; p < phases; ++p) {
        Rng rng = Rng::derive(seed, "phased_bernoulli", p);
        for (std::size_t a = 0; a < arms; ++a) means[p * arms + a] = rng.uniform();
    }
    GeneratorSpec spec{"phased_bernoulli", {{"k", arms}, {"t", horizon}, {"phases", phases}}, seed};
    return BanditInstance::generated(arms, horizon, std::make_shared<PhasedSource>(arms, length, std::move(means), seed),
                                     "phased-bernoulli", std::move(spec));
}

// ---------------------------------------------------------------------------

BanditInstance instantiate(const GeneratorSpec& spec) {
    const auto& p = spec.params;
    if (spec.name == "sign_tree_pair")
        return gen_sign_tree_pair(p.at("depth").get<unsigned>(), spec.seed, p.value("shared", false));
    if (spec.name == "polarized") {
        PolarizedParams params;
        params.arms = p.at("k").get<std::size_t>();
        params.horizon = p.at("t").get<Round>();
        params.heavy = p.at("r").get<std::size_t>();
        if (p.contains("light_cap")) params.light_cap = p.at("light_cap").get<Round>();
        if (p.contains("heavy_zeros")) params.heavy_zeros = p.at("heavy_zeros").get<Round>();
        return gen_polarized(params, spec.seed).instance;
    }
    if (spec.name == "set_disjointness") {
        SDInstanceSpec sd;
        sd.universe = p.at("n").get<std::size_t>();
        sd.alice = p.at("A").get<std::vector<std::size_t>>();
        sd.bob = p.at("B").get<std::vector<std::size_t>>();
        sd.pivot = p.at("tau").get<Round>();
        sd.band_fraction = p.value("lambda", 0.4);
        sd.horizon = p.at("t").get<Round>();
        sd.promise = p.value("promise", true);
        return gen_set_disjointness(sd, p.at("w").get<Round>());
    }
    if (spec.name == "bernoulli")
        return gen_bernoulli(p.at("means").get<std::vector<double>>(), p.at("t").get<Round>(), spec.seed);
    if (spec.name == "phased_bernoulli")
        return gen_phased_bernoulli(p.at("k").get<std::size_t>(), p.at("t").get<Round>(),
                                    p.at("phases").get<std::size_t>(), spec.seed);
    throw std::invalid_argument("unknown generator '" + spec.name + "'");
}

}  // namespace lbai
