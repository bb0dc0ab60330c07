#pragma once

#include <cstdint>

namespace lfgen {

class Rng;

/// Offspring law of a linear-fractional BGW process:
/// P(xi = 0) = 1 - r and P(xi = k) = r p (1 - p)^(k-1) for k >= 1.
class LFParams {
public:
    /// Throws Error{OutOfRange} unless 0 < p < 1 and 0 <= r <= 1, and
    /// Error{DegenerateEqual} when p == r.
    LFParams(double p, double r);

    double p() const noexcept { return p_; }
    double r() const noexcept { return r_; }
    /// Mean offspring number m = r / p.
    double mean() const noexcept { return r_ / p_; }
    bool supercritical() const noexcept { return r_ > p_; }

    /// Throws Error{NotSupercritical} unless r > p.
    void require_supercritical() const;

    friend bool operator==(const LFParams&, const LFParams&) = default;

private:
    double p_;
    double r_;
};

LFParams validate_params(double p, double r);

double offspring_pmf(const LFParams& params, int k);

/// A tail of the form P(X > n) = A / (B m^n - C) with B - C = A, n >= 0.
///
/// Both the coalescent time H and the Bernoulli-thinned time H_y have this
/// shape with the same growth factor m = r/p; they differ only in B and C.
/// All quantities are evaluated without forming m^n, so they stay finite for
/// arbitrarily large n.
class TailLaw {
public:
    /// Law of H: A = r - p, B = 1 - p, C = 1 - r.
    static TailLaw coalescent(const LFParams& params);
    /// Law of H_y: A = r - p, B = y(1 - p), C = y(1 - p) - (r - p). Requires 0 < y <= 1.
    static TailLaw thinned(const LFParams& params, double y);

    double tail(int n) const;      ///< P(X > n), n >= 0
    double cdf(int n) const;       ///< P(X <= n), n >= 0
    double pmf(int n) const;       ///< P(X = n), n >= 1
    double log_tail(int n) const;
    double log_cdf(int n) const;   ///< -inf at n = 0
    double log_pmf(int n) const;

    double growth() const noexcept { return m_; }

private:
    TailLaw(double a, double b, double c, double m);

    double a_, b_, c_, m_, log_m_;
};

double coalescent_tail(const LFParams& params, int n);
double coalescent_pmf(const LFParams& params, int n);
double thinned_tail(const LFParams& params, double y, int n);
double thinned_pmf(const LFParams& params, double y, int n);

/// P(H > n) = (r - p) / ((1 - p) m^n - (1 - r)) for arbitrary reals p, r.
/// No validation: used to probe parameter pairs that are not a valid law.
double coalescent_tail_formula(double p, double r, int n);

/// The pair (p_y, r_y) = (1 - y(1-p), 1 - y(1-p) + r - p) together with
/// whether it is a valid offspring law and whether the coalescent tail at
/// (p_y, r_y) reproduces the thinned tail.
struct ThinnedParams {
    LFParams base;
    double y;
    double p_y;
    double r_y;
    bool valid;                 ///< (p_y, r_y) satisfies the LFParams invariants
    bool consistent;            ///< tails agree within 1e-12 for n in [0, checked_up_to]
    int checked_up_to;
    double max_discrepancy;     ///< max |tail(p_y, r_y; n) - thinned_tail(y; n)|
    int worst_n;
};

ThinnedParams thinned_params(const LFParams& params, double y, int check_up_to = 10);

/// P(H_y <= j | H_y <= T), written as the closed ratio
/// ((m^j - 1)/(m^T - 1)) (r - p + y(1-p)(m^T - 1)) / (r - p + y(1-p)(m^j - 1)).
double thinned_conditional_cdf(const LFParams& params, double y, int T, int j);

/// Mixing law of the Bernoulli retention probability that turns Bernoulli
/// sampling into uniform k-sampling. delta is P(H > T).
class MuKMeasure {
public:
    MuKMeasure(double delta, int k);

    double delta() const noexcept { return delta_; }
    int k() const noexcept { return k_; }

    double density(double y) const;
    /// F(y) = (y / (delta + (1 - delta) y))^k.
    double cdf(double y) const;
    /// Inverse of cdf: V = u^(1/k), Y = delta V / (1 - (1 - delta) V).
    double quantile(double u) const;
    double sample(Rng& rng) const;

private:
    double delta_;
    int k_;
};

double mu_k_density(const MuKMeasure& meas, double y);
double mu_k_sample(const MuKMeasure& meas, Rng& rng);

struct BDRates {
    double lambda;  ///< birth rate
    double mu;      ///< death rate
};

/// Rates of the birth-death process the BGW chain embeds in. Requires r > 0.
BDRates bd_embedding_rates(const LFParams& params);

} // namespace lfgen
