#include "lfgen/rng.hpp"

#include <array>

namespace lfgen {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream)
{
    std::uint64_t s = stream;
    std::uint64_t state = seed ^ splitmix64(s);
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < words.size(); i += 2) {
        const std::uint64_t w = splitmix64(state);
        words[i] = static_cast<std::uint32_t>(w);
        words[i + 1] = static_cast<std::uint32_t>(w >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
}

std::uint64_t Rng::below(std::uint64_t bound)
{
    // rejection on the top of the range keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

} // namespace lfgen
