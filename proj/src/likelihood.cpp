#include "lfgen/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lfgen/errors.hpp"
#include "lfgen/quadrature.hpp"

namespace lfgen {

const char* to_string(FormulaVariant variant)
{
    return variant == FormulaVariant::PaperStated ? "paper-stated" : "derivation-corrected";
}

double full_tree_loglik(const LFParams& params, const DepthSeq& seq, bool conditioned_on_n)
{
    seq.validate();
    const TailLaw law = TailLaw::coalescent(params);
    double total = 0.0;
    for (int x : seq.depths)
        total += law.log_pmf(x);
    if (conditioned_on_n)
        total -= static_cast<double>(seq.depths.size()) * law.log_cdf(seq.height);
    else
        total += law.log_tail(seq.height);
    return total;
}

double full_tree_loglik_expanded(const LFParams& params, const DepthSeq& seq)
{
    seq.validate();
    const double p = params.p();
    const double r = params.r();
    auto denom = [&](int x) { return (1.0 - p) * std::pow(r, x) - (1.0 - r) * std::pow(p, x); };
    const int T = seq.height;
    const int n = seq.tip_count();
    double total = T * std::log(p) + n * std::log(r - p) - std::log(denom(T));
    for (int x : seq.depths)
        total += std::log(std::pow(p, x - 1) / denom(x - 1) - std::pow(p, x) / denom(x));
    return total;
}

double bernoulli_loglik(const LFParams& params, double y, const DepthSeq& seq, bool conditioned_on_k)
{
    seq.validate();
    const TailLaw law = TailLaw::thinned(params, y);
    double total = 0.0;
    for (int x : seq.depths)
        total += law.log_pmf(x);
    if (conditioned_on_k)
        total -= static_cast<double>(seq.depths.size()) * law.log_cdf(seq.height);
    else
        total += law.log_tail(seq.height);
    return total;
}

// ---------------------------------------------------------------------------
// Composition sums

std::uint64_t composition_count(int m, int parts)
{
    if (m < 0 || parts < 1)
        return 0;
    // C(m + parts - 1, parts - 1), built so every partial product is an integer.
    const std::uint64_t n = static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(parts) - 1;
    const std::uint64_t k = std::min<std::uint64_t>(static_cast<std::uint64_t>(parts) - 1,
                                                    static_cast<std::uint64_t>(m));
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t factor = n - k + i;
        if (result > std::numeric_limits<std::uint64_t>::max() / factor)
            return std::numeric_limits<std::uint64_t>::max();
        result = result * factor / i;
    }
    return result;
}

namespace {

double log_binomial(int n, int k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Streaming log-sum-exp.
class LogSum {
public:
    void add(double log_term)
    {
        if (log_term == -INFINITY)
            return;
        if (log_term <= max_) {
            sum_ += std::exp(log_term - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            max_ = log_term;
        }
    }
    double value() const { return max_ == -INFINITY ? -INFINITY : max_ + std::log(sum_); }

private:
    double max_ = -INFINITY;
    double sum_ = 0.0;
};

/// Visits every (m_0, ..., m_{parts-1}) summing to m in lexicographic order.
template <class Visit>
void for_each_composition(int m, int parts, Visit&& visit)
{
    std::vector<int> comp(static_cast<std::size_t>(parts), 0);
    comp.back() = m;
    for (;;) {
        visit(comp);
        // Advance: find the rightmost non-last position that can take one
        // more unit from the remainder held in the last slot.
        int i = parts - 2;
        while (i >= 0 && comp.back() == 0) {
            // remainder exhausted: fold position i back into the remainder
            if (comp[i] > 0) {
                comp.back() += comp[i];
                comp[i] = 0;
            }
            --i;
        }
        if (i < 0)
            return;
        ++comp[i];
        --comp.back();
    }
}

void check_composition_budget(int m, int parts)
{
    if (m < 0)
        throw Error(ErrorKind::OutOfRange, "m must be nonnegative");
    if (composition_count(m, parts) > kMaxCompositions)
        throw Error(ErrorKind::MTooLarge, "composition count exceeds the enumeration cap");
}

/// log(a^e - b^e) for 0 <= b < a, from log a and log(b / a).
double log_power_gap(double log_a, double log_ratio, int e)
{
    return e * log_a + std::log(-std::expm1(e * log_ratio));
}

/// (1 - p0) sum_comp p0^{m_0} prod_i px_i^{m_i + 1} / C(k + m, k), k = px.size() + 1.
double cdf_composition_sum(double p0, const std::vector<double>& px, int m)
{
    const int k = static_cast<int>(px.size()) + 1;
    check_composition_budget(m, k);
    const double log_p0 = std::log(p0);
    std::vector<double> log_px(px.size());
    for (std::size_t i = 0; i < px.size(); ++i)
        log_px[i] = std::log(px[i]);
    LogSum sum;
    for_each_composition(m, k, [&](const std::vector<int>& comp) {
        double t = comp[0] * log_p0;
        for (std::size_t i = 0; i < px.size(); ++i)
            t += (comp[i + 1] + 1) * log_px[i];
        sum.add(t);
    });
    return std::exp(std::log1p(-p0) + sum.value() - log_binomial(k + m, k));
}

} // namespace

double ksample_lik_direct(const LFParams& params, const DepthSeq& seq, int m, FormulaVariant variant)
{
    seq.validate();
    const int k = seq.tip_count();
    check_composition_budget(m, k);
    const TailLaw law = TailLaw::coalescent(params);

    // table[i][e] = log(P(H <= x_i)^e - P(H < x_i)^e), e = 1..m+1
    std::vector<std::vector<double>> table(seq.depths.size());
    for (std::size_t i = 0; i < seq.depths.size(); ++i) {
        const int x = seq.depths[i];
        const double log_le = law.log_cdf(x);
        const double log_ratio = law.log_cdf(x - 1) - log_le;
        table[i].resize(static_cast<std::size_t>(m) + 2);
        for (int e = 1; e <= m + 1; ++e)
            table[i][e] = log_power_gap(log_le, log_ratio, e);
    }
    const double log_p0 = law.log_cdf(seq.height);
    const bool corrected = variant == FormulaVariant::DerivationCorrected;

    LogSum sum;
    for_each_composition(m, k, [&](const std::vector<int>& comp) {
        double t = comp[0] * log_p0;
        if (corrected)
            t += std::log(comp[0] + 1.0);
        for (std::size_t i = 0; i < table.size(); ++i)
            t += table[i][comp[i + 1] + 1];
        sum.add(t);
    });
    return std::exp(law.log_tail(seq.height) + sum.value() - log_binomial(k + m, k));
}

double ksample_cdf_direct(const LFParams& params, const DepthSeq& seq, int m)
{
    seq.validate();
    const TailLaw law = TailLaw::coalescent(params);
    std::vector<double> px;
    px.reserve(seq.depths.size());
    for (int x : seq.depths)
        px.push_back(law.cdf(x));
    return cdf_composition_sum(law.cdf(seq.height), px, m);
}

int DistinctDepthSummary::sample_size() const
{
    int k = 1;
    for (int r : multiplicities)
        k += r;
    return k;
}

DistinctDepthSummary summarize_depths(const LFParams& params, const DepthSeq& seq)
{
    seq.validate();
    const TailLaw law = TailLaw::coalescent(params);
    std::map<int, int> counts;
    for (int x : seq.depths)
        ++counts[x];
    DistinctDepthSummary s;
    s.height = seq.height;
    s.p0 = law.cdf(seq.height);
    for (const auto& [y, r] : counts) {
        s.y_values.push_back(y);
        s.multiplicities.push_back(r);
        s.cdf_values.push_back(law.cdf(y));
    }
    return s;
}

bool closed_form_degenerate(const DistinctDepthSummary& summary)
{
    const auto& p = summary.cdf_values;
    if (p.empty())
        return true;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (summary.multiplicities[j] > 1 || p[j] == summary.p0)
            return true;
        for (std::size_t i = 0; i < j; ++i)
            if (p[i] == p[j])
                return true;
    }
    return false;
}

double ksample_cdf_closed_formula(const DistinctDepthSummary& summary, int m, FormulaVariant variant)
{
    const auto& p = summary.cdf_values;
    const int d = static_cast<int>(p.size());
    if (d == 0)
        return std::numeric_limits<double>::quiet_NaN();
    const int k = summary.sample_size();
    const double p0 = summary.p0;

    double prefix = 1.0 - p0;
    for (int j = 0; j < d; ++j)
        prefix *= std::pow(p[j], summary.multiplicities[j]);

    double sum = 0.0;
    for (int j = 0; j < d; ++j) {
        double denom = p[j] - p0;
        for (int i = 0; i < d; ++i)
            if (i != j)
                denom *= p[j] - p[i];
        double numer;
        if (variant == FormulaVariant::PaperStated)
            numer = std::pow(p[j], d - 2) * (std::pow(p[j], m + 2) - std::pow(p0, m + 2));
        else
            numer = std::pow(p[j], d - 1) * (std::pow(p[j], m + 1) - std::pow(p0, m + 1));
        if (denom == 0.0)
            return std::numeric_limits<double>::quiet_NaN();
        sum += numer / denom;
    }
    return prefix * sum * std::exp(-log_binomial(k + m, k));
}

ClosedCdf ksample_cdf_closed(const DistinctDepthSummary& summary, int k, int m, FormulaVariant variant)
{
    if (k != summary.sample_size())
        throw Error(ErrorKind::OutOfRange, "k does not match the depth summary");
    if (m < 0)
        throw Error(ErrorKind::OutOfRange, "m must be nonnegative");
    if (!closed_form_degenerate(summary))
        return ClosedCdf{ksample_cdf_closed_formula(summary, m, variant), false};

    std::vector<double> px;
    for (std::size_t j = 0; j < summary.cdf_values.size(); ++j)
        px.insert(px.end(), static_cast<std::size_t>(summary.multiplicities[j]), summary.cdf_values[j]);
    return ClosedCdf{cdf_composition_sum(summary.p0, px, m), true};
}

double ksample_marginal_loglik(const LFParams& params, const DepthSeq& seq, double rel_tol)
{
    seq.validate();
    params.require_supercritical();
    const int k = seq.tip_count();
    if (k == 1)
        return 0.0;

    std::map<int, int> counts;
    for (int x : seq.depths)
        ++counts[x];
    const MuKMeasure mixing(coalescent_tail(params, seq.height), k);
    const int T = seq.height;

    auto integrand = [&](double y) {
        const TailLaw law = TailLaw::thinned(params, y);
        const double log_norm = law.log_cdf(T);
        double log_prod = 0.0;
        for (const auto& [x, c] : counts)
            log_prod += c * (law.log_pmf(x) - log_norm);
        return mixing.density(y) * std::exp(log_prod);
    };
    return std::log(quadrature(integrand, rel_tol).value);
}

} // namespace lfgen
