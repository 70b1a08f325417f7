#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace viexec {

// 64-bit FNV-1a, used for seed-namespace tags and manifest file hashes.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Counter-based sub-seed derivation: every random stream in the project is
// keyed by (global seed, purpose tag, index). Distinct tags give disjoint
// namespaces, so e.g. training and evaluation MDPs can never share a stream.
//
//   sub = mix64(mix64(seed ^ fnv1a64(tag)) + 0x9E3779B97F4A7C15 * (index + 1))
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    const std::uint64_t base = mix64(seed ^ fnv1a64(tag));
    return mix64(base + 0x9E3779B97F4A7C15ull * (index + 1));
}

// Seeded generator with hand-rolled distributions. The mt19937_64 engine is
// specified bit-for-bit by the standard; the standard library *distributions*
// are not, so the few draws we need are implemented here to keep generated
// datasets identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased uniform integer in [0, n). n must be >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold) return x % n;
        }
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace viexec
