#include "lfgen/lf_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lfgen/errors.hpp"
#include "lfgen/rng.hpp"

namespace lfgen {

namespace {

std::string describe(const char* name, double value)
{
    std::ostringstream os;
    os.precision(17);
    os << name << " = " << value;
    return os.str();
}

void require_nonnegative(int n, const char* what)
{
    if (n < 0)
        throw Error(ErrorKind::OutOfRange, std::string(what) + " must be nonnegative");
}

} // namespace

LFParams::LFParams(double p, double r) : p_(p), r_(r)
{
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorKind::OutOfRange, describe("p", p) + " outside (0, 1)");
    if (!(r >= 0.0 && r <= 1.0))
        throw Error(ErrorKind::OutOfRange, describe("r", r) + " outside [0, 1]");
    if (p == r)
        throw Error(ErrorKind::DegenerateEqual, "p == r makes the coalescent tail degenerate");
}

void LFParams::require_supercritical() const
{
    if (!supercritical())
        throw Error(ErrorKind::NotSupercritical,
                    describe("mean offspring", mean()) + " is not > 1");
}

LFParams validate_params(double p, double r) { return LFParams(p, r); }

double offspring_pmf(const LFParams& params, int k)
{
    require_nonnegative(k, "offspring count");
    if (k == 0)
        return 1.0 - params.r();
    return params.r() * params.p() * std::pow(1.0 - params.p(), k - 1);
}

// ---------------------------------------------------------------------------
// TailLaw
//
// With u_n = m^-n (supercritical) the tail is A u_n / (B - C u_n), the cdf is
// B (1 - u_n) / (B - C u_n) because C + A = B, and the pmf is
// tail(n) B (m - 1) / (B - C u_{n-1}). The subcritical branch uses w_n = m^n.

TailLaw::TailLaw(double a, double b, double c, double m)
    : a_(a), b_(b), c_(c), m_(m), log_m_(std::log(m))
{
}

TailLaw TailLaw::coalescent(const LFParams& params)
{
    const double p = params.p();
    const double r = params.r();
    return TailLaw(r - p, 1.0 - p, 1.0 - r, r / p);
}

TailLaw TailLaw::thinned(const LFParams& params, double y)
{
    if (!(y > 0.0 && y <= 1.0))
        throw Error(ErrorKind::OutOfRange, describe("y", y) + " outside (0, 1]");
    const double p = params.p();
    const double r = params.r();
    const double b = y * (1.0 - p);
    return TailLaw(r - p, b, b - (r - p), r / p);
}

double TailLaw::tail(int n) const
{
    require_nonnegative(n, "n");
    if (n == 0)
        return 1.0;
    if (m_ > 1.0) {
        const double u = std::exp(-n * log_m_);
        return a_ * u / (b_ - c_ * u);
    }
    const double w = std::exp(n * log_m_);
    return a_ / (b_ * w - c_);
}

double TailLaw::cdf(int n) const
{
    require_nonnegative(n, "n");
    if (n == 0)
        return 0.0;
    if (m_ > 1.0) {
        const double u = std::exp(-n * log_m_);
        return b_ * -std::expm1(-n * log_m_) / (b_ - c_ * u);
    }
    const double w = std::exp(n * log_m_);
    return b_ * std::expm1(n * log_m_) / (b_ * w - c_);
}

double TailLaw::pmf(int n) const
{
    if (n < 1)
        throw Error(ErrorKind::OutOfRange, "pmf is supported on n >= 1");
    if (m_ > 1.0) {
        const double u_prev = std::exp(-(n - 1) * log_m_);
        return tail(n) * b_ * (m_ - 1.0) / (b_ - c_ * u_prev);
    }
    const double w_prev = std::exp((n - 1) * log_m_);
    const double w = w_prev * m_;
    return a_ * b_ * (m_ - 1.0) * w_prev / ((b_ * w_prev - c_) * (b_ * w - c_));
}

double TailLaw::log_tail(int n) const
{
    require_nonnegative(n, "n");
    if (n == 0)
        return 0.0;
    if (m_ > 1.0) {
        const double u = std::exp(-n * log_m_);
        return std::log(a_) - n * log_m_ - std::log(b_ - c_ * u);
    }
    return std::log(tail(n));
}

double TailLaw::log_cdf(int n) const
{
    require_nonnegative(n, "n");
    if (n == 0)
        return -INFINITY;
    if (m_ > 1.0) {
        const double u = std::exp(-n * log_m_);
        return std::log(b_) + std::log(-std::expm1(-n * log_m_)) - std::log(b_ - c_ * u);
    }
    return std::log(cdf(n));
}

double TailLaw::log_pmf(int n) const
{
    if (n < 1)
        throw Error(ErrorKind::OutOfRange, "pmf is supported on n >= 1");
    if (m_ > 1.0) {
        const double u_prev = std::exp(-(n - 1) * log_m_);
        return log_tail(n) + std::log(b_ * (m_ - 1.0)) - std::log(b_ - c_ * u_prev);
    }
    return std::log(pmf(n));
}

double coalescent_tail(const LFParams& params, int n)
{
    return TailLaw::coalescent(params).tail(n);
}

double coalescent_pmf(const LFParams& params, int n)
{
    return TailLaw::coalescent(params).pmf(n);
}

double thinned_tail(const LFParams& params, double y, int n)
{
    return TailLaw::thinned(params, y).tail(n);
}

double thinned_pmf(const LFParams& params, double y, int n)
{
    return TailLaw::thinned(params, y).pmf(n);
}

double coalescent_tail_formula(double p, double r, int n)
{
    const double m = r / p;
    return (r - p) / ((1.0 - p) * std::pow(m, n) - (1.0 - r));
}

ThinnedParams thinned_params(const LFParams& params, double y, int check_up_to)
{
    if (!(y > 0.0 && y <= 1.0))
        throw Error(ErrorKind::OutOfRange, describe("y", y) + " outside (0, 1]");
    require_nonnegative(check_up_to, "check range");

    const double p = params.p();
    const double r = params.r();
    ThinnedParams out{params, y, 1.0 - y * (1.0 - p), 1.0 - y * (1.0 - p) + r - p,
                      false, true, check_up_to, 0.0, 0};
    out.valid = out.p_y > 0.0 && out.p_y < 1.0 && out.r_y >= 0.0 && out.r_y <= 1.0
                && out.p_y != out.r_y;

    const TailLaw law = TailLaw::thinned(params, y);
    for (int n = 0; n <= check_up_to; ++n) {
        const double diff = std::abs(coalescent_tail_formula(out.p_y, out.r_y, n) - law.tail(n));
        if (!(diff <= out.max_discrepancy)) {
            out.max_discrepancy = diff;
            out.worst_n = n;
        }
    }
    out.consistent = out.max_discrepancy <= 1e-12;
    return out;
}

double thinned_conditional_cdf(const LFParams& params, double y, int T, int j)
{
    params.require_supercritical();
    if (!(y > 0.0 && y <= 1.0))
        throw Error(ErrorKind::OutOfRange, describe("y", y) + " outside (0, 1]");
    if (T < 1 || j < 1 || j > T)
        throw Error(ErrorKind::OutOfRange, "need 1 <= j <= T");
    if (j == T)
        return 1.0;

    // Both ratios divided through by m^T so nothing overflows.
    const double log_m = std::log(params.mean());
    const double a = params.r() - params.p();
    const double b = y * (1.0 - params.p());
    const double u_T = std::exp(-T * log_m);
    const double one_minus_u_T = -std::expm1(-T * log_m);
    const double scaled_j = u_T * std::expm1(j * log_m); // (m^j - 1) / m^T

    const double growth_ratio = scaled_j / one_minus_u_T;
    const double mixing_ratio = (a * u_T + b * one_minus_u_T) / (a * u_T + b * scaled_j);
    return growth_ratio * mixing_ratio;
}

// ---------------------------------------------------------------------------

MuKMeasure::MuKMeasure(double delta, int k) : delta_(delta), k_(k)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorKind::OutOfRange, describe("delta", delta) + " outside (0, 1)");
    if (k < 1)
        throw Error(ErrorKind::OutOfRange, "k must be positive");
}

double MuKMeasure::density(double y) const
{
    if (!(y >= 0.0 && y <= 1.0))
        return 0.0;
    const double denom = delta_ + (1.0 - delta_) * y;
    return k_ * delta_ * std::pow(y, k_ - 1) / std::pow(denom, k_ + 1);
}

double MuKMeasure::cdf(double y) const
{
    if (y <= 0.0)
        return 0.0;
    if (y >= 1.0)
        return 1.0;
    return std::pow(y / (delta_ + (1.0 - delta_) * y), k_);
}

double MuKMeasure::quantile(double u) const
{
    u = std::clamp(u, 0.0, 1.0);
    const double v = std::pow(u, 1.0 / k_);
    return delta_ * v / (1.0 - (1.0 - delta_) * v);
}

double MuKMeasure::sample(Rng& rng) const { return quantile(rng.uniform()); }

double mu_k_density(const MuKMeasure& meas, double y) { return meas.density(y); }

double mu_k_sample(const MuKMeasure& meas, Rng& rng) { return meas.sample(rng); }

BDRates bd_embedding_rates(const LFParams& params)
{
    const double p = params.p();
    const double r = params.r();
    if (!(r > 0.0))
        throw Error(ErrorKind::OutOfRange, "birth-death rates need r > 0");
    const double factor = (std::log(p) - std::log(r)) / (p - r);
    return BDRates{(1.0 - p) * factor, (1.0 - r) * factor};
}

} // namespace lfgen
