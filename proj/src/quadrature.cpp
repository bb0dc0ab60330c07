#include "lfgen/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "lfgen/errors.hpp"

namespace lfgen {

namespace {

// Kronrod nodes on [0, 1] (symmetric), Kronrod weights, Gauss weights for the
// even-indexed nodes.
constexpr double kNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kKronrod[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGauss[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = kKronrod[7] * fc;
    double gauss = kGauss[3] * fc;
    double abs_sum = std::abs(kronrod);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kNodes[i];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kKronrod[i] * pair;
        abs_sum += kKronrod[i] * std::abs(pair);
        if (i % 2 == 1)
            gauss += kGauss[i / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;

    // QUADPACK-style scaling of the raw Gauss/Kronrod difference.
    const double scale = std::abs(half) * abs_sum;
    double err = std::abs(kronrod - gauss);
    if (err > 0.0 && scale > 0.0)
        err = scale * std::min(1.0, std::pow(200.0 * err / scale, 1.5));
    const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * scale;
    return Panel{a, b, kronrod, std::max(err, roundoff)};
}

} // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options)
{
    std::priority_queue<Panel> panels;
    const Panel first = gauss_kronrod(f, a, b);
    panels.push(first);
    double total = first.value;
    double total_err = first.error;

    auto done = [&] {
        return total_err <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
    };
    while (!done()) {
        if (static_cast<int>(panels.size()) >= options.max_panels)
            throw Error(ErrorKind::QuadratureNonConvergence, "adaptive quadrature hit the panel limit");
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            throw Error(ErrorKind::QuadratureNonConvergence, "panel width reached machine precision");
        const Panel left = gauss_kronrod(f, worst.a, mid);
        const Panel right = gauss_kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }

    // Re-sum from scratch to shed the drift of the incremental updates.
    double value = 0.0;
    double error = 0.0;
    const int count = static_cast<int>(panels.size());
    while (!panels.empty()) {
        value += panels.top().value;
        error += panels.top().error;
        panels.pop();
    }
    return QuadratureResult{value, error, count};
}

QuadratureResult quadrature(const std::function<double(double)>& f, double rel_tol)
{
    QuadratureOptions options;
    options.rel_tol = rel_tol;
    return integrate(f, 0.0, 1.0, options);
}

} // namespace lfgen
