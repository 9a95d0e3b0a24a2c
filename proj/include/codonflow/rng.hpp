#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace codonflow {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream ids...), e.g. (run seed, iteration, trajectory).
/// Streams depend only on their ids, so results do not depend on scheduling.
inline Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * stream.size());
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto s : stream) push(s);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace codonflow
