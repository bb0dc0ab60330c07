#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lfgen/lf_model.hpp"
#include "lfgen/tree.hpp"

namespace lfgen {

enum class Scheme { Full, Bernoulli, Uniform };
enum class Conditioning { Unconditioned, OnTipCount };

const char* to_string(Scheme scheme);
const char* to_string(Conditioning conditioning);

/// A dataset of independent trees observed under one sampling scheme.
/// Conditioning applies to Full and Bernoulli; Uniform always uses the
/// mu_k-mixture likelihood of the sampled tree given N_T >= k.
struct ObservationSet {
    Scheme scheme = Scheme::Full;
    double y = 1.0;  ///< Bernoulli retention probability
    Conditioning conditioning = Conditioning::OnTipCount;
    std::vector<DepthSeq> trees;

    /// Throws Error{InvalidDepth} or Error{OutOfRange}.
    void validate() const;
};

double tree_loglik(const LFParams& params, const ObservationSet& obs, const DepthSeq& tree);

/// Sum of per-tree log-likelihoods, evaluated through sufficient statistics so
/// the result does not depend on the order of the trees.
double total_loglik(const LFParams& params, const ObservationSet& obs);

struct FitOptions {
    int grid_resolution = 50;
    int max_iterations = 2000;
    double tolerance = 1e-7;  ///< simplex diameter in the transformed coordinates
    int restarts = 3;
    int threads = 1;
};

struct FitResult {
    double p_hat = 0.0;
    double r_hat = 0.0;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    bool boundary_flag = false;
    double grid_p = 0.0;
    double grid_r = 0.0;
    double grid_loglik = 0.0;
    double gradient_norm = 0.0;  ///< central differences in (logit p, logit s)

    std::string to_json() const;
};

/// Coarse grid over (p, s = (r - p)/(1 - p)) followed by Nelder-Mead in
/// (logit p, logit s). Grid ties go to the smallest p, then the smallest r.
/// Throws Error{NoFeasiblePoint} for an empty dataset or when every grid cell
/// has zero likelihood.
FitResult fit(const ObservationSet& obs, const FitOptions& options = {});

/// Maps (u, v) = (logit p, logit s) to parameters and back.
struct FitCoordinates {
    static double to_p(double u, double v);
    static double to_r(double u, double v);
    static double to_u(double p, double r);
    static double to_v(double p, double r);
};

struct SurfaceRow {
    double p;
    double r;
    std::optional<double> loglik;  ///< empty outside the supercritical region
};

struct SurfaceGrid {
    double p_lo, p_hi;
    double r_lo, r_hi;
    int p_steps, r_steps;
};

std::vector<SurfaceRow> loglik_surface(const ObservationSet& obs, const SurfaceGrid& grid, int threads = 1);

/// `p,r,loglik` header, 17 significant digits, NA for the null marker.
std::string surface_to_csv(const std::vector<SurfaceRow>& rows);

} // namespace lfgen
