#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lfgen/likelihood.hpp"
#include "lfgen/lf_model.hpp"
#include "lfgen/tree.hpp"

namespace lfgen {

inline constexpr std::uint64_t kMaxEnumerationStates = 10'000'000;

struct CppOutcome {
    DepthSeq seq;
    double probability;
};

struct CppEnumeration {
    std::vector<CppOutcome> outcomes;
    double residual;  ///< P(N_T > n_max) = P(H <= T)^n_max
};

/// Every CPP(T) outcome with at most n_max tips, each with probability
/// prod P(H = h_i) * P(H > T). Throws Error{StateSpaceTooLarge}.
CppEnumeration enumerate_cpp(const LFParams& params, int T, int n_max);

/// Law of a sampled depth vector (length k - 1).
struct ExactLaw {
    std::map<std::vector<int>, double> probabilities;
    double residual = 0.0;     ///< mass beyond the truncation, exact where known
    std::string conditioning;

    double total() const;
    double at(const std::vector<int>& depths) const;  ///< 0 when absent
};

struct SamplingScheme {
    enum class Kind { Uniform, Bernoulli };
    Kind kind = Kind::Uniform;
    double y = 1.0;

    static SamplingScheme uniform() { return {Kind::Uniform, 1.0}; }
    static SamplingScheme bernoulli(double y) { return {Kind::Bernoulli, y}; }
};

/// Uniform: law of the k-sample tree given N_T >= k. Bernoulli: law of the
/// sampled tree given K = k retained tips. Summed over all CPP(T) outcomes with
/// at most n_max tips by a transfer recursion over tips; the subset weight is
/// C(n,k)^-1 (Uniform) or y^k (1-y)^(n-k) (Bernoulli).
ExactLaw exact_sampled_law(const LFParams& params, int T, int k, SamplingScheme scheme, int n_max);

/// Same law by literal iteration over enumerate_cpp outcomes and all subsets.
/// Exponential; for cross-checking at tiny n_max.
ExactLaw exact_sampled_law_enumerated(const LFParams& params, int T, int k, SamplingScheme scheme, int n_max);

/// Unconditioned joint P(T_k = x, N_T = n) under uniform k-sampling.
std::map<std::vector<int>, double> exact_uniform_joint(const LFParams& params, int T, int k, int n);

/// Smallest n_max >= k with the uniform-law residual below `residual`.
int auto_n_max(const LFParams& params, int T, int k, double residual);

// ---------------------------------------------------------------------------
// Adjudication

inline constexpr double kMatchTolerance = 1e-10;

struct DensityCell {
    LFParams params;
    int T, k, m;
    std::vector<int> depths;
    double exact, paper, corrected;
};

struct CdfCell {
    LFParams params;
    int T, k, m;
    std::vector<int> depths;
    bool degenerate;
    double paper_closed;      ///< closed form as written (NaN on division by zero)
    double corrected_closed;
    double routed_value;      ///< ksample_cdf_closed(DerivationCorrected)
    double direct;            ///< summed printed density
    double exact;             ///< summed exact joint
    std::string note;
};

struct VariantVerdict {
    FormulaVariant variant;
    bool matches;
    double max_discrepancy;
};

struct AdjudicationReport {
    std::string formula_id;
    std::string reference;  ///< what the variants are compared against
    std::vector<DensityCell> density_cells;
    std::vector<CdfCell> cdf_cells;
    std::vector<VariantVerdict> verdicts;

    /// The single variant that matches, or "none" / "both".
    std::string matching_variant() const;
    std::string to_text() const;
    std::string to_json() const;
};

struct AdjudicationGrid {
    std::vector<LFParams> params;
    int max_T = 2;
    int max_k = 3;
    int max_m = 3;
};

AdjudicationGrid default_density_grid();
AdjudicationGrid default_cdf_grid();

/// ksample_lik_direct in both variants against exact_uniform_joint.
AdjudicationReport adjudicate_density(const AdjudicationGrid& grid);

/// Closed-form CDF in both variants against the summed direct density on
/// non-degenerate cells; degenerate cells are listed as routed. Every cell also
/// carries the exact joint CDF.
AdjudicationReport adjudicate_cdf(const AdjudicationGrid& grid);

/// The d = 1, m = 0 cell at a given (params, T, x_1): the printed form gives
/// (1 - p_0)(p_1 + p_0), corrected gives (1 - p_0) p_1.
CdfCell cdf_hand_case(const LFParams& params, int T, int x1);

// ---------------------------------------------------------------------------
// Mixture identity

struct MixtureRow {
    std::vector<int> depths;
    double exact;
    double mixture;
};

struct MixtureReport {
    LFParams params;
    int T, k, n_max;
    double residual;
    double quad_tol;
    std::vector<MixtureRow> rows;
    double max_abs_diff;

    std::string to_text() const;
    std::string to_json() const;
};

/// Exact uniform law against the integral of mu_k(dy) prod P(H_y = x_i | H_y <= T).
/// n_max <= 0 picks the truncation with residual below 1e-13.
MixtureReport verify_mixture_identity(const LFParams& params, int T, int k, int n_max = 0,
                                      double quad_tol = 1e-9);

} // namespace lfgen
