#pragma once

#include <functional>

namespace lfgen {

struct QuadratureResult {
    double value;
    double error;   ///< estimated absolute error
    int panels;     ///< panels in the final partition
};

struct QuadratureOptions {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;
    int max_panels = 10'000;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration over [a, b]: the panel
/// with the largest error estimate is bisected until the summed estimate is
/// within max(abs_tol, rel_tol |value|). The rule never samples the endpoints,
/// so integrable endpoint singularities are fine.
/// Throws Error{QuadratureNonConvergence} when max_panels is reached.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

/// Integral over (0, 1).
QuadratureResult quadrature(const std::function<double(double)>& f, double rel_tol = 1e-9);

} // namespace lfgen
