// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Expected values come from the brute-force formulas in tests/support.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../support/reference.hpp"
#include "lfgen/cli.hpp"
#include "lfgen/inference.hpp"
#include "lfgen/lf_model.hpp"
#include "lfgen/likelihood.hpp"
#include "lfgen/oracle.hpp"
#include "lfgen/quadrature.hpp"
#include "lfgen/simulator.hpp"
#include "lfgen/stats.hpp"
#include "lfgen/tree.hpp"
#include "lfgen/validate.hpp"

using namespace lfgen;

namespace {

constexpr double kP = 0.5;
constexpr double kR = 0.8;
const LFParams kFig{kP, kR};

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, a, b, c, d);
    return buf;
}

struct Outcome {
    bool pass;
    std::string summary;
    std::vector<std::string> details;
};

int failures = 0;

void report(int id, const Outcome& o)
{
    std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.summary.c_str());
    for (const auto& d : o.details)
        std::printf("       %s\n", d.c_str());
    std::fflush(stdout);
    if (!o.pass)
        ++failures;
}

// ---------------------------------------------------------------------------

Outcome criterion1()
{
    const int T = 6;
    const int trees = 100'000;
    const int tip_bins = 150;
    Stopwatch sw;
    std::vector<std::int64_t> depth_counts(T, 0);
    std::vector<std::int64_t> tip_counts(tip_bins + 1, 0);
    int survivors = 0;
    for (std::uint64_t i = 0; survivors < trees; ++i) {
        Rng rng(20240601, i);
        const auto fwd = simulate_forward_bgw(kFig, T, rng);
        if (!fwd)
            continue;
        ++survivors;
        const DepthSeq seq = coalescent_depths_of(*fwd);
        for (int d : seq.depths)
            ++depth_counts[static_cast<std::size_t>(d - 1)];
        ++tip_counts[static_cast<std::size_t>(std::min(seq.tip_count(), tip_bins + 1) - 1)];
    }
    const double secs = sw.seconds();

    std::vector<double> depth_probs;
    for (int n = 1; n <= T; ++n)
        depth_probs.push_back(ref::pmf(kP, kR, n) / ref::cdf(kP, kR, T));
    const double delta = ref::tail(kP, kR, T);
    std::vector<double> tip_probs;
    double rest = 1.0;
    for (int n = 1; n <= tip_bins; ++n) {
        tip_probs.push_back(delta * std::pow(1 - delta, n - 1));
        rest -= tip_probs.back();
    }
    tip_probs.push_back(rest);

    const ChiSquareResult d = chi_square_gof(depth_counts, depth_probs);
    const ChiSquareResult t = chi_square_gof(tip_counts, tip_probs);
    const bool pass = d.p_value > 0.001 && t.p_value > 0.001 && secs < 60.0;
    return {pass, fmt("forward BGW vs coalescent law at T=6, 1e5 survivors: depth p=%.4g, tip-count p=%.4g, %.1f s",
                      d.p_value, t.p_value, secs),
            {fmt("depth chi2=%.3f dof=%g; tip-count chi2=%.3f dof=%g", d.statistic, d.dof, t.statistic, t.dof)}};
}

Outcome criterion2()
{
    double series_err = 0.0;
    double closed_err = 0.0;
    for (double y : {0.05, 0.1, 0.3, 0.5, 0.9})
        for (int n = 0; n <= 20; ++n) {
            const double lib = thinned_tail(kFig, y, n);
            series_err = std::max(series_err, std::abs(lib - ref::thinned_tail_series(kP, kR, y, n)));
            closed_err = std::max(closed_err, std::abs(lib - ref::thinned_tail(kP, kR, y, n)));
        }

    const int T = 10;
    const int reps = 100'000;
    std::vector<std::string> details;
    double mc_err = 0.0;
    for (double y : {0.1, 0.5}) {
        std::vector<std::int64_t> counts(T + 1, 0);
        std::int64_t total = 0;
        for (int i = 0; i < reps; ++i) {
            Rng rng(77, static_cast<std::uint64_t>(i));
            const DepthSeq x = simulate_cpp(kFig, T, rng);
            const SampleMask mask = bernoulli_mask(static_cast<std::size_t>(x.tip_count()), y, rng);
            std::vector<int> sel;
            for (std::size_t t = 0; t < mask.size(); ++t)
                if (mask[t])
                    sel.push_back(static_cast<int>(t));
            for (int d : ref::reduce(x.depths, sel)) {
                ++counts[static_cast<std::size_t>(d)];
                ++total;
            }
        }
        // P(H_y > n | H_y <= T) against the empirical tail of sampled depths
        const double tT = ref::thinned_tail(kP, kR, y, T);
        double worst = 0.0;
        std::int64_t above = total;
        for (int n = 0; n <= T; ++n) {
            above -= counts[static_cast<std::size_t>(n)];
            const double expect = (ref::thinned_tail(kP, kR, y, n) - tT) / (1 - tT);
            worst = std::max(worst, std::abs(static_cast<double>(above) / total - expect));
        }
        mc_err = std::max(mc_err, worst);
        details.push_back(fmt("y=%.1f: %.0f sampled depths, max |empirical - thinned| conditional tail = %.5f", y,
                              static_cast<double>(total), worst));
    }
    const bool pass = series_err < 1e-10 && closed_err < 1e-12 && mc_err < 0.005;
    details.insert(details.begin(), fmt("closed form vs transcribed formula: %.3g", closed_err));
    return {pass,
            fmt("thinned tail: series max error %.3g (n <= 20); run-maximum Monte Carlo max error %.5f at T=10",
                series_err, mc_err),
            details};
}

Outcome criterion3()
{
    const ThinnedParams tp = thinned_params(kFig, 0.5);
    const double printed = coalescent_tail_formula(tp.p_y, tp.r_y, 1);
    const double thinned = thinned_tail(kFig, 0.5, 1);
    const bool reproduced = std::abs(tp.p_y - 0.75) < 1e-15 && std::abs(tp.r_y - 1.05) < 1e-15 &&
                            std::abs(printed - ref::tail(0.75, 1.05, 1)) < 1e-15 && std::abs(printed - 0.75) < 1e-12 &&
                            std::abs(thinned - 2.0 / 3) < 1e-12 && !tp.valid && !tp.consistent;
    const SuiteReport eq4 = run_suite("eq4", ValidateConfig{kFig, 5, 1000, 1});
    const bool in_report = eq4.text.find("0.75") != std::string::npos;
    return {reproduced && in_report,
            "erratum documented: tail at (p_y, r_y) = (0.75, 1.05) is " + fmt("%.6g", printed) +
                " at n=1, thinned tail at (0.5, 0.8), y=0.5 is " + fmt("%.6g", thinned) +
                "; r_y > 1 so (p_y, r_y) is not an offspring law",
            {std::string("validate eq4 report carries the discrepancy: ") + (in_report ? "yes" : "no")}};
}

Outcome criterion4()
{
    bool endpoints = true;
    double quad_err = 0.0;
    double ks_worst = 0.0;
    double density_err = 0.0;
    for (double delta : {0.1, 0.5, 0.9})
        for (int k = 1; k <= 8; ++k) {
            const MuKMeasure mu(delta, k);
            endpoints = endpoints && mu.cdf(0.0) == 0.0 && mu.cdf(1.0) == 1.0;
            const double integral = quadrature([&](double y) { return mu_k_density(mu, y); }, 1e-12).value;
            quad_err = std::max(quad_err, std::abs(integral - 1.0));
            for (double y : {0.1, 0.4, 0.8}) {
                const double h = 1e-5;
                const double fd = (ref::mu_cdf(delta, k, y + h) - ref::mu_cdf(delta, k, y - h)) / (2 * h);
                density_err = std::max(density_err, std::abs(mu.density(y) - fd) / fd);
            }
            std::vector<double> draws;
            draws.reserve(100'000);
            Rng rng(4, static_cast<std::uint64_t>(k * 10 + static_cast<int>(delta * 10)));
            for (int i = 0; i < 100'000; ++i)
                draws.push_back(mu_k_sample(mu, rng));
            ks_worst = std::max(ks_worst,
                                kolmogorov_distance(std::move(draws), [&](double y) { return ref::mu_cdf(delta, k, y); }));
        }
    const bool pass = endpoints && quad_err < 1e-8 && ks_worst < 0.01 && density_err < 1e-6;
    return {pass,
            fmt("mu_k: endpoints exact=%g, max |integral - 1| = %.3g, max Kolmogorov distance %.4f (1e5 draws)",
                endpoints ? 1.0 : 0.0, quad_err, ks_worst),
            {fmt("density vs differentiated cdf: max relative error %.3g", density_err)}};
}

Outcome criterion5()
{
    Stopwatch sw;
    double worst = 0.0;
    double worst_residual = 0.0;
    std::vector<std::string> details;
    for (const auto& [p, r] : {std::pair{0.5, 0.8}, {0.3, 0.6}})
        for (int T : {2, 3})
            for (int k : {2, 3}) {
                const MixtureReport rep = verify_mixture_identity(LFParams(p, r), T, k, 0, 1e-9);
                worst = std::max(worst, rep.max_abs_diff);
                worst_residual = std::max(worst_residual, rep.residual);
                details.push_back(fmt("(%.1f, %.1f) T=%g k=%g", p, r, T, k) +
                                  fmt(": %g depth vectors, n_max=%g, max diff %.3g", static_cast<double>(rep.rows.size()),
                                      rep.n_max, rep.max_abs_diff));
            }

    // independent Simpson evaluation of the mixture side at T=2, k=2
    double simpson_err = 0.0;
    for (const auto& [p, r] : {std::pair{0.5, 0.8}, {0.3, 0.6}}) {
        const MixtureReport rep = verify_mixture_identity(LFParams(p, r), 2, 2);
        const double delta = ref::tail(p, r, 2);
        for (const auto& row : rep.rows) {
            const int x = row.depths.at(0);
            const auto integrand = [&](double y) {
                const double dens = 2 * y * delta / std::pow(delta + (1 - delta) * y, 3);
                const auto cdf = [&](int n) { return 1 - ref::thinned_tail(p, r, y, n); };
                return dens * (cdf(x) - cdf(x - 1)) / cdf(2);
            };
            // the integrand is O(y) near 0, so starting at 1e-9 drops under 1e-17 of mass
            const double diff = std::abs(ref::simpson(integrand, 1e-9, 1.0, 20000) - row.exact);
            simpson_err = std::isfinite(diff) ? std::max(simpson_err, diff) : INFINITY;
        }
    }
    details.push_back(fmt("exact law vs Simpson-integrated mixture (T=2, k=2): %.3g", simpson_err));
    const double secs = sw.seconds();
    const bool pass = worst < 1e-6 && worst_residual < 1e-12 && simpson_err < 1e-8 && secs < 120.0;
    return {pass, fmt("mixture identity on 8 cells: max abs diff %.3g, max residual %.3g, %.2f s", worst,
                      worst_residual, secs),
            details};
}

Outcome criterion6()
{
    const AdjudicationReport rep = adjudicate_density(default_density_grid());
    double oracle_err = 0.0;
    double formula_err = 0.0;
    bool headline = false;
    for (const auto& c : rep.density_cells) {
        const double p = c.params.p();
        const double r = c.params.r();
        const auto brute = ref::uniform_joint(p, r, c.T, c.k, c.k + c.m);
        const auto it = brute.find(c.depths);
        const double exact = it == brute.end() ? 0.0 : it->second;
        oracle_err = std::max(oracle_err, std::abs(exact - c.exact));
        formula_err = std::max(formula_err,
                               std::abs(c.paper - ref::ksample_density(p, r, c.T, c.depths, c.m, false)));
        formula_err = std::max(formula_err,
                               std::abs(c.corrected - ref::ksample_density(p, r, c.T, c.depths, c.m, true)));
        if (c.params == kFig && c.T == 1 && c.k == 1 && c.m == 1)
            headline = std::abs(exact - 0.25) < 1e-14 && std::abs(c.paper - 0.125) < 1e-14;
    }
    int matching = 0;
    std::vector<std::string> details;
    for (const auto& v : rep.verdicts) {
        matching += v.matches ? 1 : 0;
        details.push_back(std::string(to_string(v.variant)) + (v.matches ? " matches" : " does not match") +
                          fmt(", max discrepancy %.3g", v.max_discrepancy));
    }
    details.push_back(fmt("cells %g; library oracle vs bitmask brute force %.3g; formulas vs transcription %.3g",
                          static_cast<double>(rep.density_cells.size()), oracle_err, formula_err));
    const bool pass = matching == 1 && headline && oracle_err < 1e-15 && formula_err < 1e-14 &&
                      rep.to_text().find(rep.matching_variant()) != std::string::npos;
    return {pass,
            "density adjudication: matching variant = " + rep.matching_variant() +
                (headline ? "; T=1, k=1, m=1 cell shows exact 0.25 vs paper-stated 0.125" : "; headline cell wrong"),
            details};
}

Outcome criterion7()
{
    const AdjudicationReport rep = adjudicate_cdf(default_cdf_grid());
    double closed_err = 0.0;
    double direct_err = 0.0;
    int nondegenerate = 0;
    for (const auto& c : rep.cdf_cells) {
        double summed = 0.0;
        for (const auto& z : ref::all_vectors(c.T, c.k - 1)) {
            bool below = true;
            for (std::size_t i = 0; i < z.size(); ++i)
                below = below && z[i] <= c.depths[i];
            if (below)
                summed += ref::ksample_density(c.params.p(), c.params.r(), c.T, z, c.m, false);
        }
        direct_err = std::max(direct_err, std::abs(summed - c.direct));
        if (c.degenerate)
            continue;
        ++nondegenerate;
        closed_err = std::max(closed_err, std::abs(c.corrected_closed - c.direct));
    }
    const CdfCell hand = cdf_hand_case(kFig, 2, 1);
    const double p0 = ref::cdf(kP, kR, 2);
    const double p1 = ref::cdf(kP, kR, 1);
    const bool hand_ok = std::abs(hand.corrected_closed - p1 * (1 - p0)) < 1e-15 &&
                         std::abs(hand.paper_closed - (1 - p0) * (p1 + p0)) < 1e-15 &&
                         std::abs(hand.direct - p1 * (1 - p0)) < 1e-15;
    const SuiteReport suite = run_suite("cdf", ValidateConfig{});
    const bool in_report = suite.text.find("hand case d=1, m=0") != std::string::npos;
    const bool pass = closed_err < 1e-12 && direct_err < 1e-14 && hand_ok && in_report && nondegenerate > 0;
    return {pass,
            fmt("closed-form cdf (corrected) vs summed direct: max %.3g over %g non-degenerate cells", closed_err,
                nondegenerate) +
                "; hand case p_1(1-p_0)=" + fmt("%.6g", p1 * (1 - p0)) + " vs (1-p_0)(p_1+p_0)=" +
                fmt("%.6g", (1 - p0) * (p1 + p0)),
            {fmt("direct sum vs transcription %.3g; hand case in validate report: ", direct_err) +
             (in_report ? "yes" : "no")}};
}

Outcome criterion8()
{
    const int T = 2;
    const int draws = 100'000;
    const ExactLaw law = exact_sampled_law(kFig, T, 2, SamplingScheme::uniform(), auto_n_max(kFig, T, 2, 1e-13));
    std::vector<double> emp(T, 0.0);
    for (int i = 0; i < draws; ++i) {
        Rng rng(88, static_cast<std::uint64_t>(i));
        emp[static_cast<std::size_t>(simulate_ksample_mixture(kFig, T, 2, rng).depths.at(0) - 1)] += 1.0 / draws;
    }
    std::vector<double> exact;
    for (int x = 1; x <= T; ++x)
        exact.push_back(law.at({x}));
    const double tvd = total_variation(emp, exact);
    return {tvd < 0.01, fmt("two-stage sampler vs exact uniform 2-sample law at T=2: TVD %.5f (1e5 draws)", tvd),
            {fmt("exact P(x_1=1)=%.6f, empirical %.6f", exact[0], emp[0])}};
}

Outcome criterion9()
{
    Stopwatch sw;
    ObservationSet obs;
    obs.scheme = Scheme::Full;
    obs.conditioning = Conditioning::OnTipCount;
    for (int i = 0; i < 500; ++i) {
        Rng rng(42, static_cast<std::uint64_t>(i));
        obs.trees.push_back(simulate_cpp(kFig, 10, rng));
    }
    const FitResult f = fit(obs);
    const double secs = sw.seconds();

    // the reported optimum is the likelihood at the estimates, recomputed by hand
    double recomputed = 0.0;
    for (const auto& t : obs.trees)
        for (int x : t.depths)
            recomputed += std::log(ref::pmf(f.p_hat, f.r_hat, x) / ref::cdf(f.p_hat, f.r_hat, t.height));
    const bool pass = std::abs(f.p_hat - kP) <= 0.05 && std::abs(f.r_hat - kR) <= 0.05 && f.loglik >= f.grid_loglik &&
                      std::abs(recomputed - f.loglik) < 1e-8 * std::abs(f.loglik) && secs < 60.0;
    return {pass, fmt("MLE on 500 trees (T=10, seed 42): p_hat=%.4f, r_hat=%.4f, refined %.4f >= grid %.4f", f.p_hat,
                      f.r_hat, f.loglik, f.grid_loglik) +
                      fmt(", %.1f s", secs),
            {fmt("gradient norm %.3g, iterations %g, converged %g", f.gradient_norm, f.iterations,
                 f.converged ? 1.0 : 0.0),
             fmt("hand-recomputed log-likelihood %.6f", recomputed)}};
}

std::string run_cli(const std::vector<std::string>& args, int& code)
{
    std::ostringstream out;
    std::ostringstream err;
    code = cli::dispatch(args, out, err);
    return out.str();
}

Outcome criterion10()
{
    int exhaustive = 0;
    int exhaustive_bad = 0;
    for (int T = 1; T <= 4; ++T)
        for (int n = 1; n <= 5; ++n)
            for (const auto& x : ref::all_vectors(T, n - 1)) {
                ++exhaustive;
                const DepthSeq seq{T, x};
                const Tree t = depths_to_tree(seq);
                const std::string nwk = write_newick(t);
                const Tree back = parse_newick(nwk);
                if (!(tree_to_depths(t) == seq && structurally_equal(back, t) && tree_to_depths(back) == seq &&
                      write_newick(back) == nwk))
                    ++exhaustive_bad;
            }

    int random_bad = 0;
    Rng rng(1010);
    for (int i = 0; i < 10'000; ++i) {
        const int T = 1 + static_cast<int>(rng.below(20));
        const int n = 1 + static_cast<int>(rng.below(60));
        DepthSeq seq{T, {}};
        for (int j = 1; j < n; ++j)
            seq.depths.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T))));
        const Tree t = depths_to_tree(seq);
        const std::string nwk = write_newick(t);
        const Tree back = parse_newick(nwk);
        if (!(tree_to_depths(back) == seq && structurally_equal(back, t) && write_newick(back) == nwk))
            ++random_bad;
    }

    const std::vector<std::vector<std::string>> commands{
        {"simulate", "--p", "0.5", "--r", "0.8", "--T", "10", "--reps", "50", "--seed", "7"},
        {"simulate", "--p", "0.5", "--r", "0.8", "--T", "5", "--reps", "20", "--seed", "7", "--method", "forward"},
        {"emit-dist", "--p", "0.5", "--r", "0.8", "--y", "0.1", "--n-max", "30"},
        {"validate", "--suite", "eq4", "--reps", "2000", "--seed", "3"},
    };
    int cli_bad = 0;
    for (const auto& args : commands) {
        int c1 = 0;
        int c2 = 0;
        auto threaded = args;
        threaded.insert(threaded.end(), {"--threads", "4"});
        int c3 = 0;
        const std::string a = run_cli(args, c1);
        const std::string b = run_cli(args, c2);
        const std::string c = run_cli(threaded, c3);
        if (c1 != 0 || c2 != 0 || c3 != 0 || a != b || a != c || a.empty())
            ++cli_bad;
    }
    const bool pass = exhaustive_bad == 0 && random_bad == 0 && cli_bad == 0;
    return {pass,
            fmt("round trips: %g exhaustive (T<=4, n<=5) with %g failures, 1e4 random with %g failures; ",
                exhaustive, exhaustive_bad, random_bad) +
                fmt("CLI determinism: %g of %g commands byte-identical across runs and thread counts",
                    static_cast<double>(commands.size()) - cli_bad, static_cast<double>(commands.size())),
            {}};
}

} // namespace

int main()
{
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9, criterion10};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what(), {}};
        }
        report(static_cast<int>(i) + 1, o);
    }
    std::printf("%s: %d of %zu criteria passed\n", failures ? "FAILED" : "OK",
                static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures ? 1 : 0;
}
