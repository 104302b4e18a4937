#include "lbai/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace lbai {

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Rng Rng::derive(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    std::uint64_t k = mix(seed ^ fnv1a(label));
    k = mix(k + (index + 1) * 0xD1B54A32D192ED03ULL);
    return Rng(k);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k, Rng& rng) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::uint64_t> out;
    out.reserve(k);
    if (k * 2 >= n) {
        // dense case: partial Fisher-Yates over the full range
        std::vector<std::uint64_t> all(n);
        for (std::uint64_t i = 0; i < n; ++i) all[i] = i;
        for (std::uint64_t i = 0; i < k; ++i) {
            std::uint64_t j = i + rng.below(n - i);
            std::swap(all[i], all[j]);
        }
        out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
        std::unordered_set<std::uint64_t> chosen;
        chosen.reserve(k * 2);
        for (std::uint64_t j = n - k; j < n; ++j) {
            std::uint64_t t = rng.below(j + 1);
            if (!chosen.insert(t).second) {
                chosen.insert(j);
                out.push_back(j);
            } else {
                out.push_back(t);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace lbai
