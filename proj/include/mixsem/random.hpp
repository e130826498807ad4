#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mixsem {

using Rng = std::mt19937_64;

/// Independent generator for the stream identified by (seed, indices...).
/// Results depend only on the identifiers, never on scheduling order.
inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> indices = {}) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * indices.size());
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto i : indices) push(i);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace mixsem
