#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lbai {

/// Fractional bits used for every real-valued accumulator.
inline constexpr unsigned kDefaultFractionBits = 16;

/// ceil(log2(n)) for n >= 1; 0 for n <= 1.
unsigned ceil_log2(std::uint64_t n);

enum class StateKind { persistent, scratch, seed };

const char* to_string(StateKind kind);

/// One declared piece of algorithm state. Every item must carry a bound; the
/// policy turns bounds into bit widths.
struct Descriptor {
    enum class Type { counter, fixed_point, arm_index, round_index, hash_seed, word };

    std::string name;
    Type type = Type::word;
    StateKind kind = StateKind::persistent;
    std::optional<std::uint64_t> bound;  // range / magnitude / K / T / width
    unsigned fraction_bits = 0;
    std::uint64_t count = 1;

    /// integer in [0, max_value]
    static Descriptor counter(std::string name, std::optional<std::uint64_t> max_value,
                              std::uint64_t count = 1, StateKind kind = StateKind::persistent);
    /// signed fixed-point real with |x| <= max_magnitude
    static Descriptor fixed_point(std::string name, std::optional<std::uint64_t> max_magnitude,
                                  unsigned fraction_bits = kDefaultFractionBits, std::uint64_t count = 1,
                                  StateKind kind = StateKind::persistent);
    static Descriptor arm_index(std::string name, std::uint64_t arms, std::uint64_t count = 1,
                                StateKind kind = StateKind::persistent);
    static Descriptor round_index(std::string name, std::uint64_t horizon, std::uint64_t count = 1,
                                  StateKind kind = StateKind::persistent);
    static Descriptor hash_seed(std::string name, std::uint64_t width_bits, std::uint64_t count = 1);
    static Descriptor word(std::string name, std::uint64_t bits, std::uint64_t count = 1,
                           StateKind kind = StateKind::persistent);

    /// Bits per item under the policy. Throws on a missing bound.
    std::uint64_t unit_bits() const;
};

struct MemoryComponent {
    std::string name;
    StateKind kind = StateKind::persistent;
    std::uint64_t bits = 0;
};

struct MemoryReport {
    std::uint64_t persistent_bits = 0;
    std::uint64_t scratch_high_water_bits = 0;
    std::uint64_t seed_bits = 0;
    std::vector<MemoryComponent> breakdown;

    std::uint64_t total() const { return persistent_bits + scratch_high_water_bits + seed_bits; }
};

MemoryReport account(std::span<const Descriptor> descriptors);

}  // namespace lbai
