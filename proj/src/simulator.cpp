#include "lfgen/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfgen/errors.hpp"

namespace lfgen {

CoalescentSampler::CoalescentSampler(const LFParams& params, int cap)
    : law_(TailLaw::coalescent(params)), cap_(cap)
{
    params.require_supercritical();
    if (cap < 1)
        throw Error(ErrorKind::OutOfRange, "sampler cap must be at least 1");
    cdf_.reserve(static_cast<std::size_t>(cap));
    for (int n = 1; n <= cap; ++n)
        cdf_.push_back(law_.cdf(n));
}

int CoalescentSampler::draw_capped(Rng& rng) const
{
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int>(it - cdf_.begin()) + 1;
}

int CoalescentSampler::draw(Rng& rng) const
{
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    int n = static_cast<int>(it - cdf_.begin()) + 1;
    if (n <= cap_)
        return n;
    while (law_.cdf(n) < u)
        ++n;
    return n;
}

DepthSeq simulate_cpp(const LFParams& params, int T, Rng& rng)
{
    if (T < 1)
        throw Error(ErrorKind::OutOfRange, "CPP(T) needs T >= 1");
    const CoalescentSampler sampler(params, T);
    DepthSeq seq;
    seq.height = T;
    for (;;) {
        const int h = sampler.draw_capped(rng);
        if (h > T)
            break;
        seq.depths.push_back(h);
    }
    return seq;
}

int sample_offspring(const LFParams& params, Rng& rng)
{
    const double u = rng.uniform();
    const double q0 = 1.0 - params.r();
    if (u <= q0)
        return 0;
    // Conditional uniform for the geometric part on {1, 2, ...}.
    const double v = (u - q0) / params.r();
    const double k = std::ceil(std::log1p(-v) / std::log1p(-params.p()));
    return std::max(1, static_cast<int>(std::min(k, 1e9)));
}

std::optional<ForwardGenealogy> simulate_forward_bgw(const LFParams& params, int T, Rng& rng)
{
    if (T < 1)
        throw Error(ErrorKind::OutOfRange, "forward simulation needs T >= 1");

    ForwardGenealogy fwd;
    fwd.generations.reserve(static_cast<std::size_t>(T) + 1);
    fwd.generations.push_back({-1});
    std::size_t population = 1;
    for (int g = 1; g <= T; ++g) {
        const auto& prev = fwd.generations.back();
        std::vector<int> next;
        for (std::size_t j = 0; j < prev.size(); ++j) {
            const int kids = sample_offspring(params, rng);
            if (population + next.size() + static_cast<std::size_t>(kids) > kForwardPopulationCap)
                throw Error(ErrorKind::SimulationOverflow, "forward population exceeded the cap");
            next.insert(next.end(), static_cast<std::size_t>(kids), static_cast<int>(j));
        }
        if (next.empty())
            return std::nullopt;
        population += next.size();
        fwd.generations.push_back(std::move(next));
    }
    return fwd;
}

DepthSeq coalescent_depths_of(const ForwardGenealogy& fwd)
{
    const int T = fwd.height();
    if (T < 1 || fwd.generations.back().empty())
        throw Error(ErrorKind::OutOfRange, "genealogy has no survivors at its final generation");
    DepthSeq seq;
    seq.height = T;
    const int n = static_cast<int>(fwd.tip_count());
    seq.depths.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
    for (int i = 1; i < n; ++i) {
        int a = i - 1;
        int b = i;
        int g = T;
        while (a != b) {
            a = fwd.generations[g][a];
            b = fwd.generations[g][b];
            --g;
        }
        seq.depths.push_back(T - g);
    }
    return seq;
}

SampleMask bernoulli_mask(std::size_t n, double y, Rng& rng)
{
    if (!(y > 0.0 && y <= 1.0))
        throw Error(ErrorKind::OutOfRange, "retention probability must be in (0, 1]");
    SampleMask mask(n);
    for (std::size_t i = 0; i < n; ++i)
        mask[i] = rng.bernoulli(y);
    return mask;
}

SampleMask uniform_mask(std::size_t n, std::size_t k, Rng& rng)
{
    if (k == 0)
        throw Error(ErrorKind::OutOfRange, "sample size must be positive");
    if (k > n)
        throw Error(ErrorKind::KTooLarge, "sample size exceeds the tip count");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    SampleMask mask(n, false);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
        mask[idx[i]] = true;
    }
    return mask;
}

DepthSeq subsample_depths(const DepthSeq& seq, const SampleMask& mask)
{
    if (mask.size() != static_cast<std::size_t>(seq.tip_count()))
        throw Error(ErrorKind::OutOfRange, "mask length differs from the tip count");
    DepthSeq out;
    out.height = seq.height;
    bool started = false;
    int run_max = 0;
    for (std::size_t t = 0; t < mask.size(); ++t) {
        if (t > 0)
            run_max = std::max(run_max, seq.depths[t - 1]);
        if (!mask[t])
            continue;
        if (started)
            out.depths.push_back(run_max);
        started = true;
        run_max = 0;
    }
    if (!started)
        throw Error(ErrorKind::EmptyMask, "no tip selected");
    return out;
}

DepthSeq simulate_ksample_mixture(const LFParams& params, int T, int k, Rng& rng)
{
    params.require_supercritical();
    if (T < 1)
        throw Error(ErrorKind::OutOfRange, "need T >= 1");
    if (k < 1)
        throw Error(ErrorKind::OutOfRange, "need k >= 1");
    DepthSeq out;
    out.height = T;
    if (k == 1)
        return out;

    const MuKMeasure mixing(coalescent_tail(params, T), k);
    const double y = mixing.sample(rng);
    std::vector<double> cdf(static_cast<std::size_t>(T));
    for (int j = 1; j < T; ++j)
        cdf[j - 1] = thinned_conditional_cdf(params, y, T, j);
    cdf[T - 1] = 1.0;

    out.depths.reserve(static_cast<std::size_t>(k - 1));
    for (int i = 1; i < k; ++i) {
        const double u = rng.uniform();
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        out.depths.push_back(std::min(T, static_cast<int>(it - cdf.begin()) + 1));
    }
    return out;
}

} // namespace lfgen
