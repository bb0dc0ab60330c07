#pragma once

#include <cstdint>
#include <random>

namespace lfgen {

/// Seeded random stream. A stream is identified by (seed, stream index); the
/// engine state is derived from `seed ^ mix(stream)` through splitmix64, so
/// independent workers use the same base seed with distinct stream indices.
///
/// Output is bit-reproducible across platforms: only the 64-bit engine words
/// are consumed, never the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    bool bernoulli(double prob) { return uniform() < prob; }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t& state);

} // namespace lfgen
