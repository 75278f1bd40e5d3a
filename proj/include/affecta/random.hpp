#pragma once

#include <cstdint>
#include <random>

namespace affecta {

/// Seeded random stream. The engine is std::mt19937_64 (fully specified by
/// the standard); the distributions are written out here because the
/// standard library's distributions differ between implementations, which
/// would break record-level reproducibility of simulated logs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [lo, hi]; requires lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    double exponential(double rate);

    /// Standard normal via Box-Muller; the spare deviate is cached.
    double normal();

    /// Derives an independent child seed (splitmix64 of the next output).
    std::uint64_t split();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace affecta
