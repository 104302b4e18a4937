#include "lbai/countsketch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "lbai/rng.hpp"

namespace lbai {

namespace {

std::uint64_t mod_mersenne(unsigned __int128 x) {
    constexpr std::uint64_t p = RowHash::kPrime;
    std::uint64_t r = static_cast<std::uint64_t>(x & p) + static_cast<std::uint64_t>(x >> 61);
    r = (r & p) + (r >> 61);
    return r >= p ? r - p : r;
}

std::uint64_t affine(std::uint64_t a, std::uint64_t b, std::uint64_t x) {
    return mod_mersenne(static_cast<unsigned __int128>(a) * (x % RowHash::kPrime) + b);
}

}  // namespace

std::size_t RowHash::bucket(std::uint64_t item, std::size_t width) const {
    return static_cast<std::size_t>(affine(bucket_a, bucket_b, item) % width);
}

int RowHash::sign(std::uint64_t item) const { return (affine(sign_a, sign_b, item) & 1U) ? 1 : -1; }

SketchParams SketchParams::sized(std::size_t universe, double phi, double eps, double delta,
                                 std::uint64_t stream_length, const SketchConstants& constants) {
    if (universe < 1) throw std::invalid_argument("sketch: universe must be >= 1");
    if (!(phi >= 1.0)) throw std::invalid_argument("sketch: phi must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("sketch: eps must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("sketch: delta must lie in (0,1)");
    if (stream_length < 1) throw std::invalid_argument("sketch: stream length must be >= 1");
    if (!(constants.width_factor > 0.0 && constants.depth_factor > 0.0))
        throw std::invalid_argument("sketch: sizing constants must be positive");

    SketchParams p;
    p.universe = universe;
    p.phi = phi;
    p.eps = eps;
    p.delta = delta;
    p.stream_length = stream_length;
    const double width = std::ceil(constants.width_factor * phi / (eps * eps));
    const double depth = std::ceil(constants.depth_factor * std::log(static_cast<double>(stream_length) / delta));
    if (!(width < 1e12 && depth < 1e6))
        throw std::length_error("sketch: refusing width " + std::to_string(width) + " x depth " +
                                std::to_string(depth));
    p.width = std::max<std::size_t>(2, static_cast<std::size_t>(width));
    p.depth = std::max<std::size_t>(1, static_cast<std::size_t>(depth));
    p.candidate_capacity =
        constants.candidate_capacity.value_or(static_cast<std::size_t>(std::ceil(2.0 * phi)) + 1);
    if (p.candidate_capacity < 1) throw std::invalid_argument("sketch: candidate capacity must be >= 1");
    p.fraction_bits = constants.fraction_bits;
    p.max_bits = constants.max_bits;
    return p;
}

unsigned SketchParams::counter_bits() const { return ceil_log2(stream_length + 1) + fraction_bits + 1; }

nlohmann::json to_json(const SketchParams& p) {
    return {{"k", p.universe},       {"phi", p.phi},     {"eps", p.eps},
            {"delta", p.delta},      {"n_est", p.stream_length},
            {"depth", p.depth},      {"width", p.width}, {"candidate_capacity", p.candidate_capacity},
            {"fraction_bits", p.fraction_bits}};
}

Sketch::Sketch(SketchParams params, std::vector<RowHash> hashes)
    : params_(std::move(params)), hashes_(std::move(hashes)) {
    if (hashes_.size() != params_.depth) throw std::invalid_argument("sketch: one hash pair per row required");
    if (params_.width < 1 || params_.depth < 1) throw std::invalid_argument("sketch: empty table");
    const std::uint64_t bits = bits_used();
    if (bits > params_.max_bits)
        throw std::length_error("sketch: " + std::to_string(params_.depth) + " x " +
                                std::to_string(params_.width) + " table needs " + std::to_string(bits) +
                                " bits, cap is " + std::to_string(params_.max_bits));
    counters_.assign(params_.depth * params_.width, 0);
    candidates_.reserve(params_.candidate_capacity);
    scratch_.resize(params_.depth);
}

namespace {

std::vector<RowHash> draw_hashes(std::size_t depth, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, "countsketch/hashes");
    std::vector<RowHash> rows(depth);
    for (auto& h : rows) {
        h.bucket_a = 1 + rng.below(RowHash::kPrime - 1);
        h.bucket_b = rng.below(RowHash::kPrime);
        h.sign_a = 1 + rng.below(RowHash::kPrime - 1);
        h.sign_b = rng.below(RowHash::kPrime);
    }
    return rows;
}

}  // namespace

Sketch::Sketch(SketchParams params, std::uint64_t seed)
    : Sketch(params, draw_hashes(params.depth, seed)) {}

Sketch new_sketch(std::size_t universe, double phi, double eps, double delta, std::uint64_t stream_length,
                  std::uint64_t seed, const SketchConstants& constants) {
    return Sketch(SketchParams::sized(universe, phi, eps, delta, stream_length, constants), seed);
}

void Sketch::check_item(std::size_t item) const {
    if (item >= params_.universe)
        throw std::out_of_range("sketch: item " + std::to_string(item) + " outside [0, " +
                                std::to_string(params_.universe) + ")");
}

void Sketch::update(std::size_t item, double weight) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("sketch: weight outside [0,1]");
    add(item, weight);
}

void Sketch::add(std::size_t item, double weight) {
    check_item(item);
    if (!std::isfinite(weight)) throw std::invalid_argument("sketch: non-finite weight");
    const auto quantum = static_cast<std::int64_t>(std::llround(std::ldexp(weight, static_cast<int>(params_.fraction_bits))));
    if (quantum == 0) return;
    for (std::size_t r = 0; r < params_.depth; ++r) {
        const auto& h = hashes_[r];
        counters_[r * params_.width + h.bucket(item, params_.width)] += h.sign(item) * quantum;
    }
    ++updates_;
    track(item);
}

double Sketch::estimate_raw(std::size_t item) const {
    for (std::size_t r = 0; r < params_.depth; ++r) {
        const auto& h = hashes_[r];
        scratch_[r] = h.sign(item) * counters_[r * params_.width + h.bucket(item, params_.width)];
    }
    const std::size_t mid = params_.depth / 2;
    std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(mid), scratch_.end());
    const double upper = static_cast<double>(scratch_[mid]);
    if (params_.depth % 2 == 1) return upper;
    const double lower = static_cast<double>(
        *std::max_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(mid)));
    return 0.5 * (lower + upper);
}

double Sketch::estimate(std::size_t item) const {
    check_item(item);
    return std::ldexp(estimate_raw(item), -static_cast<int>(params_.fraction_bits));
}

void Sketch::track(std::size_t item) {
    const double est = estimate(item);
    for (auto& [id, value] : candidates_) {
        if (id == item) {
            value = est;
            return;
        }
    }
    if (candidates_.size() < params_.candidate_capacity) {
        candidates_.emplace_back(item, est);
        return;
    }
    // evict the minimum estimate; among equal minima the highest index goes
    auto victim = candidates_.begin();
    for (auto it = candidates_.begin(); it != candidates_.end(); ++it) {
        if (it->second < victim->second || (it->second == victim->second && it->first > victim->first))
            victim = it;
    }
    if (est > victim->second) *victim = {item, est};
}

std::size_t Sketch::approx_top() const {
    if (updates_ == 0) throw std::logic_error("approx_top: sketch has no observations");
    std::size_t best = candidates_.front().first;
    double best_value = estimate(best);
    for (const auto& [id, _] : candidates_) {
        const double value = estimate(id);
        if (value > best_value || (value == best_value && id < best)) {
            best = id;
            best_value = value;
        }
    }
    return best;
}

std::vector<Descriptor> Sketch::descriptors() const {
    const std::uint64_t n = params_.stream_length;
    return {
        Descriptor::fixed_point("counters", n, params_.fraction_bits, params_.depth * params_.width),
        Descriptor::arm_index("candidate ids", params_.universe, params_.candidate_capacity),
        Descriptor::fixed_point("candidate estimates", n, params_.fraction_bits, params_.candidate_capacity),
        Descriptor::counter("update count", n),
        Descriptor::hash_seed("row hash coefficients", RowHash::kSeedBits, 4 * params_.depth),
    };
}

MemoryReport Sketch::memory() const {
    const auto d = descriptors();
    return account(d);
}

std::uint64_t Sketch::bits_used() const { return memory().total(); }

void Sketch::save_snapshot(const std::filesystem::path& json_path) const {
    auto bin_path = json_path;
    bin_path.replace_extension(".bin");
    nlohmann::json doc = to_json(params_);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& h : hashes_)
        rows.push_back({{"bucket", {h.bucket_a, h.bucket_b}}, {"sign", {h.sign_a, h.sign_b}}});
    doc["hashes"] = std::move(rows);
    doc["total_updates"] = updates_;
    doc["counters_file"] = bin_path.filename().string();
    std::ofstream(json_path) << doc.dump(2) << '\n';

    std::ofstream bin(bin_path, std::ios::binary);
    for (std::int64_t c : counters_) {
        auto u = static_cast<std::uint64_t>(c);
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
        bin.write(bytes, 8);
    }
}

}  // namespace lbai
