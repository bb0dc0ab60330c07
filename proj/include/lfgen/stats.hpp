#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lfgen {

/// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
/// continued fraction (modified Lentz) otherwise.
double regularized_gamma_p(double a, double x);
/// Q(a, x) = 1 - P(a, x), evaluated without cancellation.
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

struct ChiSquareResult {
    double statistic;
    double p_value;
    int dof;
    int bins;  ///< bins after pooling
};

/// Pearson goodness of fit. Adjacent bins are pooled left to right until each
/// pooled bin expects at least `min_expected` counts; a short remainder joins
/// the last pooled bin. Throws Error{DegenerateBins} when fewer than two bins
/// survive and Error{OutOfRange} when the probabilities do not sum to 1.
ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                               std::span<const double> expected_probs,
                               double min_expected = 5.0);

/// sup |F_n - F| for a sample against a continuous cdf.
double kolmogorov_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Half the L1 distance between two probability vectors of equal length.
double total_variation(std::span<const double> a, std::span<const double> b);

} // namespace lfgen
