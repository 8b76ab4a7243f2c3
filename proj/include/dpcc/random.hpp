#pragma once

#include <cstdint>
#include <random>

namespace dpcc {

/// Seeded stream with platform-independent uniform and normal draws.
/// std::*_distribution output is implementation-defined, so conversions are
/// done here on top of the fully specified mt19937_64 engine.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Standard normal (Box-Muller, one draw pair per call).
    double normal();
    /// Exponential with the given mean.
    double exponential(double mean);

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent substream seeds from one run seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace dpcc
