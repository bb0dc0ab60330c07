#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lfgen/lf_model.hpp"
#include "lfgen/rng.hpp"
#include "lfgen/tree.hpp"

namespace lfgen {

/// Inverse-CDF sampler for the coalescent time H: cumulative table up to the
/// cap plus the analytic tail beyond it.
class CoalescentSampler {
public:
    CoalescentSampler(const LFParams& params, int cap);

    /// A draw of H, or cap + 1 when H > cap.
    int draw_capped(Rng& rng) const;
    /// A draw of H with no cap (the table is extended lazily on a copy-free search).
    int draw(Rng& rng) const;

    int cap() const noexcept { return cap_; }

private:
    TailLaw law_;
    int cap_;
    std::vector<double> cdf_;  // cdf_[n - 1] = P(H <= n), n = 1..cap
};

/// CPP(T): i.i.d. draws of H until the first one exceeding T.
DepthSeq simulate_cpp(const LFParams& params, int T, Rng& rng);

/// Planar genealogy of a single-root BGW population grown for T generations.
/// generations[g][i] is the parent index (in generation g - 1) of individual i
/// of generation g; generation 0 is the root. Children of one parent are
/// contiguous and ordered, which is the monotone planar embedding.
struct ForwardGenealogy {
    std::vector<std::vector<int>> generations;

    int height() const noexcept { return static_cast<int>(generations.size()) - 1; }
    std::size_t tip_count() const { return generations.back().size(); }
};

inline constexpr std::size_t kForwardPopulationCap = 10'000'000;

/// nullopt when the population is extinct at generation T. Any valid offspring
/// law is accepted; subcritical ones simply go extinct more often.
/// Throws Error{SimulationOverflow} past kForwardPopulationCap individuals.
std::optional<ForwardGenealogy> simulate_forward_bgw(const LFParams& params, int T, Rng& rng);

/// Offspring count by inversion of the linear-fractional cdf.
int sample_offspring(const LFParams& params, Rng& rng);

/// Generations back to the common ancestor of each consecutive pair of tips.
DepthSeq coalescent_depths_of(const ForwardGenealogy& fwd);

using SampleMask = std::vector<bool>;

SampleMask bernoulli_mask(std::size_t n, double y, Rng& rng);

/// Uniform k-subset by partial Fisher-Yates. Throws Error{KTooLarge} for k > n
/// and Error{OutOfRange} for k == 0.
SampleMask uniform_mask(std::size_t n, std::size_t k, Rng& rng);

/// Depth between consecutive selected tips is the maximum of the original
/// depths after the earlier tip up to and including the later one. The height
/// is kept. Throws Error{EmptyMask} / Error{OutOfRange} on a bad mask.
DepthSeq subsample_depths(const DepthSeq& seq, const SampleMask& mask);

/// Two-stage sampler for the uniform k-sample tree: Y ~ mu_k with
/// delta = P(H > T), then k - 1 i.i.d. depths from P(H_Y <= j | H_Y <= T).
DepthSeq simulate_ksample_mixture(const LFParams& params, int T, int k, Rng& rng);

} // namespace lfgen
