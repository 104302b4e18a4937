#include "lbai/meter.hpp"

#include <bit>
#include <stdexcept>

namespace lbai {

unsigned ceil_log2(std::uint64_t n) {
    if (n <= 1) return 0;
    return static_cast<unsigned>(std::bit_width(n - 1));
}

const char* to_string(StateKind kind) {
    switch (kind) {
        case StateKind::persistent: return "persistent";
        case StateKind::scratch: return "scratch";
        case StateKind::seed: return "seed";
    }
    return "?";
}

Descriptor Descriptor::counter(std::string name, std::optional<std::uint64_t> max_value,
                               std::uint64_t count, StateKind kind) {
    return {std::move(name), Type::counter, kind, max_value, 0, count};
}

Descriptor Descriptor::fixed_point(std::string name, std::optional<std::uint64_t> max_magnitude,
                                   unsigned fraction_bits, std::uint64_t count, StateKind kind) {
    return {std::move(name), Type::fixed_point, kind, max_magnitude, fraction_bits, count};
}

Descriptor Descriptor::arm_index(std::string name, std::uint64_t arms, std::uint64_t count,
                                 StateKind kind) {
    return {std::move(name), Type::arm_index, kind, arms, 0, count};
}

Descriptor Descriptor::round_index(std::string name, std::uint64_t horizon, std::uint64_t count,
                                   StateKind kind) {
    return {std::move(name), Type::round_index, kind, horizon, 0, count};
}

Descriptor Descriptor::hash_seed(std::string name, std::uint64_t width_bits, std::uint64_t count) {
    return {std::move(name), Type::hash_seed, StateKind::seed, width_bits, 0, count};
}

Descriptor Descriptor::word(std::string name, std::uint64_t bits, std::uint64_t count, StateKind kind) {
    return {std::move(name), Type::word, kind, bits, 0, count};
}

std::uint64_t Descriptor::unit_bits() const {
    if (!bound) throw std::invalid_argument("meter: state item '" + name + "' declares no bound");
    const std::uint64_t v = *bound;
    switch (type) {
        case Type::counter:
            return v == UINT64_MAX ? 64 : ceil_log2(v + 1);
        case Type::fixed_point:
            return (v == UINT64_MAX ? 64 : ceil_log2(v + 1)) + fraction_bits + 1;
        case Type::arm_index:
        case Type::round_index:
            if (v == 0) throw std::invalid_argument("meter: '" + name + "' has an empty index range");
            return ceil_log2(v);
        case Type::hash_seed:
        case Type::word:
            return v;
    }
    return 0;
}

MemoryReport account(std::span<const Descriptor> descriptors) {
    MemoryReport report;
    for (const auto& d : descriptors) {
        const std::uint64_t bits = d.unit_bits() * d.count;
        report.breakdown.push_back({d.name, d.kind, bits});
        switch (d.kind) {
            case StateKind::persistent: report.persistent_bits += bits; break;
            case StateKind::scratch: report.scratch_high_water_bits += bits; break;
            case StateKind::seed: report.seed_bits += bits; break;
        }
    }
    return report;
}

}  // namespace lbai
