// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace mbfuzz {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream seed for (base, tag). Batches derive per-sequence seeds
// this way, so generation is reproducible and order-independent across workers.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return splitmix64(base ^ splitmix64(tag));
}

// mt19937_64 with hand-rolled value mappings. The engine's output is pinned by
// the standard; std::uniform_*_distribution is not, and corpora must replay
// bit-exact regardless of the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return next_unit() < p; }

    // Uniform in [0, bound). Fixed-point multiply; bias is O(bound / 2^64).
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::next_below: zero bound");
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // Uniform in [lo, hi], inclusive.
    std::uint64_t next_between(std::uint64_t lo, std::uint64_t hi) {
        if (hi < lo) throw std::invalid_argument("Rng::next_between: empty range");
        return lo + next_below(hi - lo + 1);
    }

    std::uint8_t next_byte() { return static_cast<std::uint8_t>(next_u64() & 0xff); }

    // Weight-proportional index choice; weights must be positive.
    std::size_t weighted_index(std::span<const int> weights) {
        std::uint64_t total = 0;
        for (int w : weights) {
            if (w <= 0) throw std::invalid_argument("Rng::weighted_index: nonpositive weight");
            total += static_cast<std::uint64_t>(w);
        }
        if (total == 0) throw std::invalid_argument("Rng::weighted_index: no weights");
        std::uint64_t pick = next_below(total);
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += static_cast<std::uint64_t>(weights[i]);
            if (pick < acc) return i;
        }
        return weights.size() - 1;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace mbfuzz
