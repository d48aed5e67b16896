#pragma once

#include <cstdint>

namespace qtraj {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen as the project PRNG because
// it is a fixed, portable counter-based 64-bit generator: all draws are pure
// integer arithmetic, so sequences are identical across platforms and
// compilers. One `uniform()` draw is consumed per trajectory step.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Seed-splitting rule used by the CLI: record i (0-based) of a multi-sample
// run is sampled with the (i+1)-th output of SplitMix64(master_seed).
inline std::uint64_t derived_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 g(master);
    std::uint64_t s = 0;
    for (std::uint64_t i = 0; i <= index; ++i) s = g.next();
    return s;
}

} // namespace qtraj
