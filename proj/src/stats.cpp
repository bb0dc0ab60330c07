#include "lfgen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lfgen/errors.hpp"

namespace lfgen {

namespace {

constexpr int kMaxIterations = 10'000;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double gamma_series(double a, double x)
{
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIterations; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_continued_fraction(double a, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps)
            break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double regularized_gamma_p(double a, double x)
{
    if (!(a > 0.0) || x < 0.0)
        throw Error(ErrorKind::OutOfRange, "incomplete gamma needs a > 0 and x >= 0");
    if (x == 0.0)
        return 0.0;
    if (x < a + 1.0)
        return gamma_series(a, x);
    return 1.0 - gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x)
{
    if (!(a > 0.0) || x < 0.0)
        throw Error(ErrorKind::OutOfRange, "incomplete gamma needs a > 0 and x >= 0");
    if (x == 0.0)
        return 1.0;
    if (x < a + 1.0)
        return 1.0 - gamma_series(a, x);
    return gamma_continued_fraction(a, x);
}

double chi_square_sf(double statistic, double dof)
{
    return regularized_gamma_q(0.5 * dof, 0.5 * std::max(statistic, 0.0));
}

ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                               std::span<const double> expected_probs, double min_expected)
{
    if (observed.size() != expected_probs.size())
        throw Error(ErrorKind::OutOfRange, "observed and expected lengths differ");
    const double prob_sum = std::accumulate(expected_probs.begin(), expected_probs.end(), 0.0);
    if (std::abs(prob_sum - 1.0) > 1e-9)
        throw Error(ErrorKind::OutOfRange, "expected probabilities must sum to 1");
    const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::int64_t{0}));

    std::vector<double> pooled_obs;
    std::vector<double> pooled_exp;
    double acc_obs = 0.0;
    double acc_exp = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        acc_obs += static_cast<double>(observed[i]);
        acc_exp += n * expected_probs[i];
        if (acc_exp >= min_expected) {
            pooled_obs.push_back(acc_obs);
            pooled_exp.push_back(acc_exp);
            acc_obs = acc_exp = 0.0;
        }
    }
    if (acc_exp > 0.0 || acc_obs > 0.0) {
        if (pooled_exp.empty()) {
            pooled_obs.push_back(acc_obs);
            pooled_exp.push_back(acc_exp);
        } else {
            pooled_obs.back() += acc_obs;
            pooled_exp.back() += acc_exp;
        }
    }
    if (pooled_exp.size() < 2)
        throw Error(ErrorKind::DegenerateBins, "fewer than two bins after pooling");

    double stat = 0.0;
    for (std::size_t i = 0; i < pooled_exp.size(); ++i) {
        const double diff = pooled_obs[i] - pooled_exp[i];
        stat += diff * diff / pooled_exp[i];
    }
    const int dof = static_cast<int>(pooled_exp.size()) - 1;
    return ChiSquareResult{stat, chi_square_sf(stat, dof), dof, static_cast<int>(pooled_exp.size())};
}

double kolmogorov_distance(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        worst = std::max({worst, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return worst;
}

double total_variation(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw Error(ErrorKind::OutOfRange, "probability vectors differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += std::abs(a[i] - b[i]);
    return 0.5 * sum;
}

} // namespace lfgen
