#pragma once

#include <cstdint>
#include <random>

namespace chshsim {

// Stable 64-bit mixer (splitmix64). Used for deriving per-stream and
// per-run seeds so that results do not depend on scheduling or worker
// count.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index));
}

// Thin wrapper around mt19937_64 with the handful of draws the simulator
// needs. Draw semantics are fixed here (not delegated to std::
// distributions) so output is identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [lo, hi], inclusive. Rejection-free modulo is
    // fine here: ranges are tiny relative to 2^64.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return lo + engine_() % (hi - lo + 1);
    }

    bool coin() { return (engine_() & 1ULL) != 0; }

private:
    std::mt19937_64 engine_;
};

}  // namespace chshsim
