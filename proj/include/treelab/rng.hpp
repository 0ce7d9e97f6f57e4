#pragma once

#include <cstdint>

namespace treelab {

// splitmix64: tiny, reproducible across platforms. All randomness in the
// library flows through this so that identical seeds give identical output.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform value in [0, n); n must be > 0.
    uint64_t below(uint64_t n) { return next() % n; }
};

// Stateless hash of a (seed, tag) pair, for per-item deterministic choices.
inline uint64_t mix_seed(uint64_t seed, uint64_t tag) {
    SplitMix64 g(seed ^ (tag * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL));
    return g.next();
}

} // namespace treelab
