#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lbai/meter.hpp"

namespace lbai {

/// Multipliers on the asymptotic sizing rule; all overridable.
struct SketchConstants {
    double width_factor = 8.0;  // c_w: width = ceil(c_w * phi / eps^2)
    double depth_factor = 1.0;  // c_d: depth = ceil(c_d * ln(n / delta))
    unsigned fraction_bits = kDefaultFractionBits;
    std::optional<std::size_t> candidate_capacity;  // default ceil(2 phi) + 1
    std::uint64_t max_bits = std::uint64_t{1} << 32;
};

struct SketchParams {
    std::size_t universe = 1;  // k; items are 0 .. k-1
    double phi = 1.0;
    double eps = 0.5;
    double delta = 0.1;
    std::uint64_t stream_length = 1;  // n_est; also bounds total stream mass
    std::size_t depth = 1;
    std::size_t width = 2;
    std::size_t candidate_capacity = 3;
    unsigned fraction_bits = kDefaultFractionBits;
    std::uint64_t max_bits = std::uint64_t{1} << 32;

    static SketchParams sized(std::size_t universe, double phi, double eps, double delta,
                              std::uint64_t stream_length, const SketchConstants& constants = {});

    /// ceil(log2(n + 1)) + fraction bits + sign bit.
    unsigned counter_bits() const;
};

/// Pairwise-independent bucket and sign hashes for one row, both
/// (a x + b) mod (2^61 - 1).
struct RowHash {
    static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;
    static constexpr unsigned kSeedBits = 61;

    std::uint64_t bucket_a = 1, bucket_b = 0;
    std::uint64_t sign_a = 1, sign_b = 0;

    std::size_t bucket(std::uint64_t item, std::size_t width) const;
    int sign(std::uint64_t item) const;
};

/// Weighted CountSketch with a bounded candidate set for ApproxTop queries.
/// Counters are fixed-point integers, so updates with dyadic weights are exact.
class Sketch {
public:
    Sketch(SketchParams params, std::uint64_t seed);
    Sketch(SketchParams params, std::vector<RowHash> hashes);

    /// Adds `weight` in [0, 1] to `item`. A zero weight changes nothing.
    void update(std::size_t item, double weight = 1.0);
    /// Unrestricted signed update; the sketch is linear in the stream.
    void add(std::size_t item, double weight);

    /// Median over rows of the signed counter reads.
    double estimate(std::size_t item) const;

    /// Candidate with the largest current estimate, lowest index on ties.
    std::size_t approx_top() const;

    const SketchParams& params() const { return params_; }
    const std::vector<RowHash>& hashes() const { return hashes_; }
    std::uint64_t total_updates() const { return updates_; }
    const std::vector<std::pair<std::size_t, double>>& candidates() const { return candidates_; }

    /// Raw fixed-point counter, row-major.
    std::int64_t raw_counter(std::size_t row, std::size_t column) const {
        return counters_.at(row * params_.width + column);
    }
    const std::vector<std::int64_t>& raw_counters() const { return counters_; }

    std::vector<Descriptor> descriptors() const;
    std::uint64_t bits_used() const;
    MemoryReport memory() const;

    /// Params as JSON; counters as little-endian int64 in a sibling .bin file.
    void save_snapshot(const std::filesystem::path& json_path) const;

private:
    void check_item(std::size_t item) const;
    void track(std::size_t item);
    double estimate_raw(std::size_t item) const;

    SketchParams params_;
    std::vector<RowHash> hashes_;
    std::vector<std::int64_t> counters_;
    std::vector<std::pair<std::size_t, double>> candidates_;
    std::uint64_t updates_ = 0;
    mutable std::vector<std::int64_t> scratch_;
};

Sketch new_sketch(std::size_t universe, double phi, double eps, double delta, std::uint64_t stream_length,
                  std::uint64_t seed, const SketchConstants& constants = {});

nlohmann::json to_json(const SketchParams& params);

}  // namespace lbai
