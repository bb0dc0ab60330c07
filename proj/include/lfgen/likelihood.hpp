#pragma once

#include <cstdint>
#include <vector>

#include "lfgen/lf_model.hpp"
#include "lfgen/tree.hpp"

namespace lfgen {

/// Which reading of a contested k-sample formula produced a value.
///  - PaperStated: the formula exactly as printed.
///  - DerivationCorrected: the density with the (m_0 + 1) factor that counts
///    how the m_0 outer unsampled tips split before the first and after the
///    last sampled tip; the closed-form CDF with the exponents (d - 1, m + 1)
///    that the geometric sum in its own derivation produces.
enum class FormulaVariant { PaperStated, DerivationCorrected };

const char* to_string(FormulaVariant variant);

/// log P(tree) = log P(H > T) + sum log P(H = x_i); conditioned on the tip
/// count, sum log [P(H = x_i) / P(H <= T)]. Throws Error{InvalidDepth}.
double full_tree_loglik(const LFParams& params, const DepthSeq& seq, bool conditioned_on_n);

/// The same unconditioned likelihood written directly in p and r:
/// p^T (r-p)^n / ((1-p) r^T - (1-r) p^T) * prod (p^{x-1}/D(x-1) - p^x/D(x)),
/// D(x) = (1-p) r^x - (1-r) p^x. Independent algebraic route, modest T only.
double full_tree_loglik_expanded(const LFParams& params, const DepthSeq& seq);

/// Bernoulli(y) sample tree likelihood: full_tree_loglik with H replaced by H_y.
double bernoulli_loglik(const LFParams& params, double y, const DepthSeq& seq, bool conditioned_on_k);

inline constexpr std::uint64_t kMaxCompositions = 10'000'000;

/// Number of weak compositions of m into `parts` parts, saturating at UINT64_MAX.
std::uint64_t composition_count(int m, int parts);

/// P(T_k = tree, N_T = k + m) by the composition sum over (m_0..m_{k-1}),
/// evaluated in log-sum form. Throws Error{MTooLarge} past kMaxCompositions.
double ksample_lik_direct(const LFParams& params, const DepthSeq& seq, int m, FormulaVariant variant);

/// The printed density summed over all x' <= x componentwise:
/// C(k+m,k)^-1 sum P(H>T) P(H<=T)^{m_0} prod P(H <= x_i)^{m_i + 1}.
/// This is the quantity ksample_cdf_closed is meant to evaluate.
double ksample_cdf_direct(const LFParams& params, const DepthSeq& seq, int m);

struct DistinctDepthSummary {
    int height = 0;
    std::vector<int> y_values;        ///< distinct depths, increasing
    std::vector<int> multiplicities;  ///< r_j: how many x_i equal y_j
    std::vector<double> cdf_values;   ///< p_j = P(H <= y_j)
    double p0 = 0.0;                  ///< P(H <= T)

    int sample_size() const;          ///< k = 1 + sum r_j
};

DistinctDepthSummary summarize_depths(const LFParams& params, const DepthSeq& seq);

/// Whether the closed form cannot be evaluated as written: k = 1, a depth
/// equal to T, or coincident cdf values among the positions x_1..x_{k-1}
/// (a repeated depth).
bool closed_form_degenerate(const DistinctDepthSummary& summary);

struct ClosedCdf {
    double value;
    bool routed;  ///< true when the degenerate input went to the direct sum
};

/// Closed-form P(N_T = m + k, H_{k,i} <= x_i for all i). Degenerate inputs are
/// routed to the direct composition sum and flagged, not raised.
ClosedCdf ksample_cdf_closed(const DistinctDepthSummary& summary, int k, int m, FormulaVariant variant);

/// The closed form evaluated as written even on degenerate input (NaN where it
/// divides by zero). Used by the adjudication report.
double ksample_cdf_closed_formula(const DistinctDepthSummary& summary, int m, FormulaVariant variant);

/// log of the integral over y of mu_k(dy) prod P(H_y = x_i) / P(H_y <= T).
/// Throws Error{QuadratureNonConvergence}.
double ksample_marginal_loglik(const LFParams& params, const DepthSeq& seq, double rel_tol = 1e-9);

} // namespace lfgen
