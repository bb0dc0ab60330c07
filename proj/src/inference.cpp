#include "lfgen/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include <json.hpp>

#include "lfgen/errors.hpp"
#include "lfgen/likelihood.hpp"
#include "lfgen/parallel.hpp"

namespace lfgen {

const char* to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::Full: return "full";
    case Scheme::Bernoulli: return "bernoulli";
    case Scheme::Uniform: return "uniform";
    }
    return "?";
}

const char* to_string(Conditioning conditioning)
{
    return conditioning == Conditioning::OnTipCount ? "on-tip-count" : "unconditioned";
}

void ObservationSet::validate() const
{
    if (scheme == Scheme::Bernoulli && !(y > 0.0 && y < 1.0))
        throw Error(ErrorKind::OutOfRange, "Bernoulli retention probability must lie in (0, 1)");
    for (const DepthSeq& t : trees)
        t.validate();
}

double tree_loglik(const LFParams& params, const ObservationSet& obs, const DepthSeq& tree)
{
    const bool cond = obs.conditioning == Conditioning::OnTipCount;
    switch (obs.scheme) {
    case Scheme::Full: return full_tree_loglik(params, tree, cond);
    case Scheme::Bernoulli: return bernoulli_loglik(params, obs.y, tree, cond);
    case Scheme::Uniform: return ksample_marginal_loglik(params, tree);
    }
    return 0.0;
}

namespace {

// Per height: how often each depth occurs and how many trees there are.
struct HeightStats {
    std::map<int, long long> depth_counts;
    long long trees = 0;
    long long depths = 0;
};

double independent_loglik(const TailLaw& law_template, const std::map<int, HeightStats>& stats, bool cond)
{
    double total = 0.0;
    for (const auto& [T, s] : stats) {
        for (const auto& [x, c] : s.depth_counts)
            total += static_cast<double>(c) * law_template.log_pmf(x);
        if (cond)
            total -= static_cast<double>(s.depths) * law_template.log_cdf(T);
        else
            total += static_cast<double>(s.trees) * law_template.log_tail(T);
    }
    return total;
}

} // namespace

double total_loglik(const LFParams& params, const ObservationSet& obs)
{
    obs.validate();
    if (obs.trees.empty())
        return 0.0;
    if (obs.scheme == Scheme::Uniform) {
        std::map<std::pair<int, std::vector<int>>, long long> groups;
        for (const DepthSeq& t : obs.trees) {
            std::vector<int> key = t.depths;
            std::sort(key.begin(), key.end());
            ++groups[{t.height, std::move(key)}];
        }
        double total = 0.0;
        for (const auto& [key, count] : groups)
            total += static_cast<double>(count) * ksample_marginal_loglik(params, DepthSeq{key.first, key.second});
        return total;
    }
    std::map<int, HeightStats> stats;
    for (const DepthSeq& t : obs.trees) {
        HeightStats& s = stats[t.height];
        ++s.trees;
        s.depths += static_cast<long long>(t.depths.size());
        for (int x : t.depths)
            ++s.depth_counts[x];
    }
    const TailLaw law = obs.scheme == Scheme::Full ? TailLaw::coalescent(params) : TailLaw::thinned(params, obs.y);
    return independent_loglik(law, stats, obs.conditioning == Conditioning::OnTipCount);
}

// ---------------------------------------------------------------------------

namespace {

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double logit(double q) { return std::log(q / (1.0 - q)); }

constexpr double kBoundaryMargin = 1e-4;

} // namespace

double FitCoordinates::to_p(double u, double) { return logistic(u); }
double FitCoordinates::to_r(double u, double v)
{
    const double p = logistic(u);
    return p + logistic(v) * (1.0 - p);
}
double FitCoordinates::to_u(double p, double) { return logit(p); }
double FitCoordinates::to_v(double p, double r) { return logit((r - p) / (1.0 - p)); }

namespace {

/// Log-likelihood or -inf where the parameters are rejected.
double safe_loglik(const ObservationSet& obs, double p, double r)
{
    try {
        const double v = total_loglik(LFParams(p, r), obs);
        return std::isnan(v) ? -INFINITY : v;
    } catch (const Error&) {
        return -INFINITY;
    }
}

using Point = std::array<double, 2>;

struct Simplex {
    std::array<Point, 3> x;
    std::array<double, 3> f;  // minimized: negative log-likelihood

    void sort()
    {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return f[a] < f[b]; });
        const auto xs = x;
        const auto fs = f;
        for (int i = 0; i < 3; ++i) {
            x[i] = xs[idx[i]];
            f[i] = fs[idx[i]];
        }
    }

    double diameter() const
    {
        double d = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                d = std::max(d, std::hypot(x[i][0] - x[j][0], x[i][1] - x[j][1]));
        return d;
    }
};

Point lerp(const Point& a, const Point& b, double t)
{
    return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
}

/// Nelder-Mead with the usual coefficients (1, 2, 1/2, 1/2).
/// Returns whether the diameter criterion was met before the budget ran out.
template <class F>
bool nelder_mead(F&& f, Point start, double step, double tol, int budget, int& iterations, Point& best,
                 double& best_f)
{
    Simplex s;
    s.x = {start, Point{start[0] + step, start[1]}, Point{start[0], start[1] + step}};
    s.f[0] = best_f;
    s.f[1] = f(s.x[1]);
    s.f[2] = f(s.x[2]);
    bool converged = false;
    while (iterations < budget) {
        s.sort();
        if (s.diameter() < tol) {
            converged = true;
            break;
        }
        ++iterations;
        const Point centroid = lerp(s.x[0], s.x[1], 0.5);
        const Point xr = lerp(centroid, s.x[2], -1.0);
        const double fr = f(xr);
        if (fr < s.f[0]) {
            const Point xe = lerp(centroid, s.x[2], -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s.x[2] = xe;
                s.f[2] = fe;
            } else {
                s.x[2] = xr;
                s.f[2] = fr;
            }
            continue;
        }
        if (fr < s.f[1]) {
            s.x[2] = xr;
            s.f[2] = fr;
            continue;
        }
        const bool outside = fr < s.f[2];
        const Point xc = outside ? lerp(centroid, xr, 0.5) : lerp(centroid, s.x[2], 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : s.f[2])) {
            s.x[2] = xc;
            s.f[2] = fc;
            continue;
        }
        for (int i = 1; i < 3; ++i) {
            s.x[i] = lerp(s.x[0], s.x[i], 0.5);
            s.f[i] = f(s.x[i]);
        }
    }
    s.sort();
    best = s.x[0];
    best_f = s.f[0];
    return converged;
}

constexpr double kDiffStep = 1e-5;

template <class F>
Point central_gradient(F&& f, const Point& x)
{
    const double h = kDiffStep;
    return {(f({x[0] + h, x[1]}) - f({x[0] - h, x[1]})) / (2 * h),
            (f({x[0], x[1] + h}) - f({x[0], x[1] - h})) / (2 * h)};
}

// The simplex stalls once vertex values differ by less than the rounding of
// the objective, which for large datasets still leaves a visible gradient.
// Newton steps on a central-difference Hessian finish the job; a step is kept
// only if it shrinks the gradient without raising the objective beyond its
// rounding level.
template <class F>
void newton_polish(F&& f, Point& x, double& fx, Point& grad)
{
    const double h = 1e-4;
    for (int step = 0; step < 3; ++step) {
        const double f0 = f(x);
        const double huu = (f({x[0] + h, x[1]}) - 2 * f0 + f({x[0] - h, x[1]})) / (h * h);
        const double hvv = (f({x[0], x[1] + h}) - 2 * f0 + f({x[0], x[1] - h})) / (h * h);
        const double huv = (f({x[0] + h, x[1] + h}) - f({x[0] + h, x[1] - h}) - f({x[0] - h, x[1] + h}) +
                            f({x[0] - h, x[1] - h})) / (4 * h * h);
        const double det = huu * hvv - huv * huv;
        if (!(huu > 0.0 && det > 0.0))
            return;
        const Point next{x[0] - (hvv * grad[0] - huv * grad[1]) / det,
                         x[1] - (huu * grad[1] - huv * grad[0]) / det};
        const double f_next = f(next);
        const Point g_next = central_gradient(f, next);
        const double slack = 8 * std::numeric_limits<double>::epsilon() * std::abs(fx);
        if (!(f_next <= fx + slack) || std::hypot(g_next[0], g_next[1]) >= std::hypot(grad[0], grad[1]))
            return;
        x = next;
        fx = f_next;
        grad = g_next;
    }
}

} // namespace

FitResult fit(const ObservationSet& obs, const FitOptions& options)
{
    if (obs.trees.empty())
        throw Error(ErrorKind::NoFeasiblePoint, "no trees to fit");
    obs.validate();
    const int n = std::max(1, options.grid_resolution);

    std::vector<double> grid(static_cast<std::size_t>(n) * n);
    parallel_for(n * n, options.threads, [&](int cell) {
        const double p = (cell / n + 0.5) / n;
        const double s = (cell % n + 0.5) / n;
        grid[cell] = safe_loglik(obs, p, p + s * (1.0 - p));
    });
    int best_cell = -1;
    for (int cell = 0; cell < n * n; ++cell)
        if (grid[cell] > -INFINITY && (best_cell < 0 || grid[cell] > grid[best_cell]))
            best_cell = cell;
    if (best_cell < 0)
        throw Error(ErrorKind::NoFeasiblePoint, "log-likelihood is -inf on every grid cell");

    FitResult res;
    const double p_seed = (best_cell / n + 0.5) / n;
    const double s_seed = (best_cell % n + 0.5) / n;
    res.grid_p = p_seed;
    res.grid_r = p_seed + s_seed * (1.0 - p_seed);
    res.grid_loglik = grid[best_cell];

    auto objective = [&](const Point& x) {
        return -safe_loglik(obs, FitCoordinates::to_p(x[0], x[1]), FitCoordinates::to_r(x[0], x[1]));
    };
    Point best{logit(p_seed), logit(s_seed)};
    double best_f = -res.grid_loglik;
    bool converged = false;
    for (int round = 0; round <= options.restarts && res.iterations < options.max_iterations; ++round) {
        const double before = best_f;
        converged = nelder_mead(objective, best, 0.1, options.tolerance, options.max_iterations, res.iterations,
                                best, best_f);
        if (!converged || (round > 0 && before - best_f <= 1e-12 * std::max(1.0, std::abs(best_f))))
            break;
    }

    Point grad = central_gradient(objective, best);
    if (converged)
        newton_polish(objective, best, best_f, grad);

    res.p_hat = FitCoordinates::to_p(best[0], best[1]);
    res.r_hat = FitCoordinates::to_r(best[0], best[1]);
    res.loglik = -best_f;
    res.converged = converged;
    const double s_hat = (res.r_hat - res.p_hat) / (1.0 - res.p_hat);
    res.boundary_flag = res.p_hat < kBoundaryMargin || res.p_hat > 1.0 - kBoundaryMargin ||
                        s_hat < kBoundaryMargin || s_hat > 1.0 - kBoundaryMargin;
    res.gradient_norm = std::hypot(grad[0], grad[1]);
    return res;
}

std::string FitResult::to_json() const
{
    nlohmann::ordered_json j;
    j["format"] = "lfgen-fit";
    j["version"] = 1;
    j["p_hat"] = p_hat;
    j["r_hat"] = r_hat;
    j["loglik_at_optimum"] = loglik;
    j["converged"] = converged;
    j["iterations"] = iterations;
    j["boundary_flag"] = boundary_flag;
    j["grid_seed"] = {{"p", grid_p}, {"r", grid_r}, {"loglik", grid_loglik}};
    j["gradient_norm"] = gradient_norm;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

std::vector<SurfaceRow> loglik_surface(const ObservationSet& obs, const SurfaceGrid& grid, int threads)
{
    obs.validate();
    if (grid.p_steps < 1 || grid.r_steps < 1)
        throw Error(ErrorKind::OutOfRange, "surface needs at least one step per axis");
    auto axis = [](double lo, double hi, int steps, int i) {
        return steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
    };
    std::vector<SurfaceRow> rows(static_cast<std::size_t>(grid.p_steps) * grid.r_steps);
    parallel_for(static_cast<int>(rows.size()), threads, [&](int idx) {
        const double p = axis(grid.p_lo, grid.p_hi, grid.p_steps, idx / grid.r_steps);
        const double r = axis(grid.r_lo, grid.r_hi, grid.r_steps, idx % grid.r_steps);
        SurfaceRow row{p, r, std::nullopt};
        if (p > 0.0 && p < 1.0 && r > p && r <= 1.0) {
            const double v = safe_loglik(obs, p, r);
            if (v > -INFINITY)
                row.loglik = v;
        }
        rows[idx] = row;
    });
    return rows;
}

std::string surface_to_csv(const std::vector<SurfaceRow>& rows)
{
    std::string out = "p,r,loglik\n";
    char buf[96];
    for (const auto& row : rows) {
        if (row.loglik)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row.p, row.r, *row.loglik);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,NA\n", row.p, row.r);
        out += buf;
    }
    return out;
}

} // namespace lfgen
