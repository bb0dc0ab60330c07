// Independent reference computations for tests. Everything here is written
// from the model definition with plain loops and std::pow, without calling the
// library's numerical code, so agreement is evidence rather than tautology.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

namespace ref {

using Depths = std::vector<int>;

/// P(H > n) = (r - p) / ((1 - p) m^n - (1 - r)).
inline double tail(double p, double r, int n)
{
    const double m = r / p;
    return (r - p) / ((1 - p) * std::pow(m, n) - (1 - r));
}

inline double cdf(double p, double r, int n) { return 1.0 - tail(p, r, n); }
inline double pmf(double p, double r, int n) { return tail(p, r, n - 1) - tail(p, r, n); }

/// P(H_y > n) by the block construction: a gap between retained tips is the
/// maximum of G i.i.d. copies of H, G ~ Geometric(y) on {1, 2, ...}.
inline double thinned_tail_series(double p, double r, double y, int n)
{
    const double f = cdf(p, r, n);
    double s = 0.0;
    for (int g = 1; g < 20000; ++g) {
        const double w = y * std::pow(1 - y, g - 1);
        s += w * (1 - std::pow(f, g));
        if (w < 1e-20)
            break;
    }
    return s;
}

/// P(H_y > n) = (r - p) / (y (1 - p) m^n - (y (1 - p) - (r - p))).
inline double thinned_tail(double p, double r, double y, int n)
{
    const double m = r / p;
    return (r - p) / (y * (1 - p) * std::pow(m, n) - (y * (1 - p) - (r - p)));
}

inline double binom(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    double c = 1.0;
    for (int i = 1; i <= k; ++i)
        c = c * (n - k + i) / i;
    return c;
}

/// Calls visit(depths, prob) for every CPP(T) outcome with exactly n tips.
inline void for_each_cpp(double p, double r, int T, int n, const std::function<void(const Depths&, double)>& visit)
{
    Depths x(static_cast<std::size_t>(n - 1), 1);
    const double delta = tail(p, r, T);
    for (;;) {
        double prob = delta;
        for (int h : x)
            prob *= pmf(p, r, h);
        visit(x, prob);
        int i = n - 2;
        while (i >= 0 && x[i] == T)
            x[i--] = 1;
        if (i < 0)
            return;
        ++x[i];
    }
}

/// Sampled-tree depths for tips `sel` (increasing) by the run-maximum rule.
inline Depths reduce(const Depths& x, const std::vector<int>& sel)
{
    Depths out;
    for (std::size_t j = 1; j < sel.size(); ++j) {
        int m = 0;
        for (int t = sel[j - 1] + 1; t <= sel[j]; ++t)
            m = std::max(m, x[t - 1]);
        out.push_back(m);
    }
    return out;
}

/// Brute-force P(T_k = x, N_T = n) under uniform k-sampling: every outcome,
/// every k-subset as a bitmask, weight C(n,k)^-1.
inline std::map<Depths, double> uniform_joint(double p, double r, int T, int k, int n)
{
    std::map<Depths, double> out;
    if (n < k)
        return out;
    const double w = 1.0 / binom(n, k);
    for_each_cpp(p, r, T, n, [&](const Depths& x, double prob) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            std::vector<int> sel;
            for (int t = 0; t < n; ++t)
                if (mask & (1u << t))
                    sel.push_back(t);
            if (static_cast<int>(sel.size()) == k)
                out[reduce(x, sel)] += prob * w;
        }
    });
    return out;
}

/// Printed k-sample density: C(k+m,k)^-1 sum over compositions (m_0..m_{k-1})
/// of P(H>T) P(H<=T)^{m_0} prod (P(H<=x_i)^{m_i+1} - P(H<x_i)^{m_i+1});
/// with `outer_split` the m_0 term gains the factor (m_0 + 1).
inline double ksample_density(double p, double r, int T, const Depths& x, int m, bool outer_split)
{
    const int k = static_cast<int>(x.size()) + 1;
    std::vector<int> comp(static_cast<std::size_t>(k), 0);
    double sum = 0.0;
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == k - 1) {
            comp[pos] = left;
            double t = std::pow(cdf(p, r, T), comp[0]) * (outer_split ? comp[0] + 1 : 1);
            for (int i = 1; i < k; ++i)
                t *= std::pow(cdf(p, r, x[i - 1]), comp[i] + 1) - std::pow(cdf(p, r, x[i - 1] - 1), comp[i] + 1);
            sum += t;
            return;
        }
        for (int v = 0; v <= left; ++v) {
            comp[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, m);
    return tail(p, r, T) * sum / binom(k + m, k);
}

/// All vectors in {1..T}^len.
inline std::vector<Depths> all_vectors(int T, int len)
{
    std::vector<Depths> out;
    Depths x(static_cast<std::size_t>(len), 1);
    for (;;) {
        out.push_back(x);
        int i = len - 1;
        while (i >= 0 && x[i] == T)
            x[i--] = 1;
        if (i < 0)
            return out;
        ++x[i];
    }
}

/// mu_k cdf (y / (delta + (1 - delta) y))^k.
inline double mu_cdf(double delta, int k, double y) { return std::pow(y / (delta + (1 - delta) * y), k); }

/// Composite Simpson on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels)
{
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i)
        s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

} // namespace ref
