#include "lfgen/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "lfgen/errors.hpp"
#include "lfgen/simulator.hpp"

namespace lfgen {

namespace {

using Depths = std::vector<int>;
using Json = nlohmann::ordered_json;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string depths_str(const Depths& x)
{
    std::string s = "[";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(x[i]);
    }
    return s + "]";
}

double log_choose(int n, int k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void check_args(int T, int k, int n_max)
{
    if (T < 1)
        throw Error(ErrorKind::OutOfRange, "T must be at least 1");
    if (k < 1)
        throw Error(ErrorKind::OutOfRange, "k must be at least 1");
    if (n_max < k)
        throw Error(ErrorKind::OutOfRange, "n_max must be at least k");
}

/// All vectors in {1..T}^len, lexicographic.
std::vector<Depths> all_depth_vectors(int T, int len)
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

// Transfer recursion over tips. State after i tips: depths of the sampled tree
// so far, number of selected tips, and the running maximum since the last
// selected tip. `finalize(n, depths, mass)` receives the mass of every path
// that stops at n tips with exactly k selected, subset weights included.
template <class Finalize>
void transfer(const LFParams& params, int T, int k, SamplingScheme scheme, int n_last, Finalize&& finalize)
{
    using Key = std::tuple<Depths, int, int>;
    const TailLaw law = TailLaw::coalescent(params);
    std::vector<double> pmf(static_cast<std::size_t>(T) + 1, 0.0);
    for (int h = 1; h <= T; ++h)
        pmf[h] = law.pmf(h);
    const double p0 = law.cdf(T);
    const double delta = law.tail(T);
    const bool bern = scheme.kind == SamplingScheme::Kind::Bernoulli;
    const double w_select = bern ? scheme.y : 1.0;
    const double w_skip = bern ? 1.0 - scheme.y : 1.0;

    std::map<Key, double> states;
    states[{Depths{}, 0, 0}] += w_skip;
    states[{Depths{}, 1, 0}] += w_select;

    auto emit = [&](int n) {
        for (const auto& [key, mass] : states)
            if (std::get<1>(key) == k)
                finalize(n, std::get<0>(key), mass * delta);
    };
    emit(1);
    for (int n = 2; n <= n_last; ++n) {
        std::map<Key, double> next;
        for (const auto& [key, mass] : states) {
            const auto& [x, j, b] = key;
            if (j == 0) {
                next[{x, 0, 0}] += mass * p0 * w_skip;
                next[{x, 1, 0}] += mass * p0 * w_select;
            } else if (j == k) {
                if (w_skip > 0.0)
                    next[{x, k, 0}] += mass * p0 * w_skip;
            } else {
                for (int h = 1; h <= T; ++h) {
                    const int nb = std::max(b, h);
                    if (w_skip > 0.0)
                        next[{x, j, nb}] += mass * pmf[h] * w_skip;
                    Depths grown = x;
                    grown.push_back(nb);
                    next[{std::move(grown), j + 1, 0}] += mass * pmf[h] * w_select;
                }
            }
        }
        states = std::move(next);
        emit(n);
    }
}

/// Mass of P(K = k, N_T > n_max) / P(K = k) for Bernoulli(y) retention.
double bernoulli_residual(double p0, double y, int k, int n_max)
{
    const double q = p0 * (1.0 - y);
    if (q == 0.0)
        return 0.0;
    // term(n) = C(n,k) q^(n-k) (1-q)^(k+1)
    int n = n_max + 1;
    double term = std::exp(log_choose(n, k) + (n - k) * std::log(q) + (k + 1) * std::log1p(-q));
    double sum = 0.0;
    while (term > 0.0) {
        sum += term;
        if (term < sum * 1e-18)
            break;
        term *= q * (n + 1.0) / (n + 1.0 - k);
        ++n;
    }
    return sum;
}

void condition_law(ExactLaw& law, const LFParams& params, int T, int k, SamplingScheme scheme, int n_max)
{
    const TailLaw h = TailLaw::coalescent(params);
    const double p0 = h.cdf(T);
    double norm;
    if (scheme.kind == SamplingScheme::Kind::Uniform) {
        norm = std::pow(p0, k - 1);
        law.residual = std::pow(p0, n_max - k + 1);
        law.conditioning = "uniform k-sample given N_T >= " + std::to_string(k);
    } else {
        const double y = scheme.y;
        norm = h.tail(T) * std::pow(p0, k - 1) * std::pow(y, k) / std::pow(1.0 - p0 * (1.0 - y), k + 1);
        law.residual = bernoulli_residual(p0, y, k, n_max);
        law.conditioning = "Bernoulli(" + num(y) + ") sample given K = " + std::to_string(k);
    }
    for (auto& [x, v] : law.probabilities)
        v /= norm;
}

void check_scheme(SamplingScheme scheme)
{
    if (scheme.kind == SamplingScheme::Kind::Bernoulli && !(scheme.y > 0.0 && scheme.y <= 1.0))
        throw Error(ErrorKind::OutOfRange, "Bernoulli retention probability must lie in (0, 1]");
}

} // namespace

// ---------------------------------------------------------------------------

CppEnumeration enumerate_cpp(const LFParams& params, int T, int n_max)
{
    if (T < 1 || n_max < 1)
        throw Error(ErrorKind::OutOfRange, "T and n_max must be at least 1");
    std::uint64_t states = 0;
    std::uint64_t layer = 1;
    for (int n = 1; n <= n_max; ++n) {
        states += layer;
        if (states > kMaxEnumerationStates)
            throw Error(ErrorKind::StateSpaceTooLarge, "CPP enumeration exceeds the state cap");
        if (n < n_max && layer > kMaxEnumerationStates / static_cast<std::uint64_t>(T))
            throw Error(ErrorKind::StateSpaceTooLarge, "CPP enumeration exceeds the state cap");
        layer *= static_cast<std::uint64_t>(T);
    }

    const TailLaw law = TailLaw::coalescent(params);
    const double delta = law.tail(T);
    CppEnumeration out;
    out.outcomes.reserve(states);
    for (int n = 1; n <= n_max; ++n) {
        for (const Depths& x : all_depth_vectors(T, n - 1)) {
            double prob = delta;
            for (int h : x)
                prob *= law.pmf(h);
            out.outcomes.push_back(CppOutcome{DepthSeq{T, x}, prob});
        }
    }
    out.residual = std::pow(law.cdf(T), n_max);
    return out;
}

double ExactLaw::total() const
{
    double s = 0.0;
    for (const auto& [x, v] : probabilities)
        s += v;
    return s;
}

double ExactLaw::at(const std::vector<int>& depths) const
{
    const auto it = probabilities.find(depths);
    return it == probabilities.end() ? 0.0 : it->second;
}

ExactLaw exact_sampled_law(const LFParams& params, int T, int k, SamplingScheme scheme, int n_max)
{
    check_args(T, k, n_max);
    check_scheme(scheme);
    ExactLaw law;
    const bool uniform = scheme.kind == SamplingScheme::Kind::Uniform;
    transfer(params, T, k, scheme, n_max, [&](int n, const Depths& x, double mass) {
        law.probabilities[x] += uniform ? mass * std::exp(-log_choose(n, k)) : mass;
    });
    condition_law(law, params, T, k, scheme, n_max);
    return law;
}

ExactLaw exact_sampled_law_enumerated(const LFParams& params, int T, int k, SamplingScheme scheme, int n_max)
{
    check_args(T, k, n_max);
    check_scheme(scheme);
    const CppEnumeration cpp = enumerate_cpp(params, T, n_max);
    const bool uniform = scheme.kind == SamplingScheme::Kind::Uniform;
    ExactLaw law;
    for (const CppOutcome& o : cpp.outcomes) {
        const int n = o.seq.tip_count();
        if (n < k)
            continue;
        const double weight = uniform ? std::exp(-log_choose(n, k))
                                      : std::pow(scheme.y, k) * std::pow(1.0 - scheme.y, n - k);
        // k-subsets of n tips as sorted index vectors
        std::vector<int> idx(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i)
            idx[i] = i;
        for (;;) {
            SampleMask mask(static_cast<std::size_t>(n), false);
            for (int i : idx)
                mask[i] = true;
            law.probabilities[subsample_depths(o.seq, mask).depths] += o.probability * weight;
            int i = k - 1;
            while (i >= 0 && idx[i] == n - k + i)
                --i;
            if (i < 0)
                break;
            ++idx[i];
            for (int j = i + 1; j < k; ++j)
                idx[j] = idx[j - 1] + 1;
        }
    }
    condition_law(law, params, T, k, scheme, n_max);
    return law;
}

std::map<std::vector<int>, double> exact_uniform_joint(const LFParams& params, int T, int k, int n)
{
    check_args(T, k, std::max(n, k));
    std::map<Depths, double> joint;
    if (n < k)
        return joint;
    transfer(params, T, k, SamplingScheme::uniform(), n, [&](int tips, const Depths& x, double mass) {
        if (tips == n)
            joint[x] += mass * std::exp(-log_choose(n, k));
    });
    return joint;
}

int auto_n_max(const LFParams& params, int T, int k, double residual)
{
    const double log_p0 = TailLaw::coalescent(params).log_cdf(T);
    const int extra = static_cast<int>(std::ceil(std::log(residual) / log_p0));
    return std::max(k, k - 1 + std::max(extra, 1));
}

// ---------------------------------------------------------------------------
// Adjudication

AdjudicationGrid default_density_grid()
{
    return AdjudicationGrid{{LFParams(0.5, 0.8), LFParams(0.3, 0.6), LFParams(0.2, 0.9)}, 2, 3, 3};
}

AdjudicationGrid default_cdf_grid()
{
    return AdjudicationGrid{{LFParams(0.5, 0.8), LFParams(0.3, 0.6), LFParams(0.2, 0.9)}, 3, 3, 4};
}

std::string AdjudicationReport::matching_variant() const
{
    int count = 0;
    std::string name = "none";
    for (const auto& v : verdicts) {
        if (v.matches) {
            ++count;
            name = to_string(v.variant);
        }
    }
    return count > 1 ? "both" : name;
}

namespace {

VariantVerdict verdict_of(FormulaVariant variant, double worst)
{
    return VariantVerdict{variant, worst < kMatchTolerance, worst};
}

CdfCell make_cdf_cell(const LFParams& params, int T, int k, int m, const Depths& x,
                      const std::map<Depths, double>& joint)
{
    const DepthSeq seq{T, x};
    const DistinctDepthSummary summary = summarize_depths(params, seq);
    CdfCell cell{params, T, k, m, x, closed_form_degenerate(summary),
                 ksample_cdf_closed_formula(summary, m, FormulaVariant::PaperStated),
                 ksample_cdf_closed_formula(summary, m, FormulaVariant::DerivationCorrected),
                 ksample_cdf_closed(summary, k, m, FormulaVariant::DerivationCorrected).value,
                 ksample_cdf_direct(params, seq, m), 0.0, ""};
    for (const auto& [xp, v] : joint) {
        bool below = true;
        for (std::size_t i = 0; i < xp.size(); ++i)
            below = below && xp[i] <= x[i];
        if (below)
            cell.exact += v;
    }
    if (cell.degenerate) {
        cell.note = "routed-to-direct";
        const bool repeated = std::any_of(summary.multiplicities.begin(), summary.multiplicities.end(),
                                          [](int r) { return r > 1; });
        auto off = [&](double v) { return !(std::abs(v - cell.direct) < kMatchTolerance); };
        if (repeated && off(cell.paper_closed) && off(cell.corrected_closed))
            cell.note += "; both-fail (multiplicity collapse)";
    }
    return cell;
}

} // namespace

AdjudicationReport adjudicate_density(const AdjudicationGrid& grid)
{
    AdjudicationReport rep;
    rep.formula_id = "k-sample density";
    rep.reference = "exact joint P(T_k = x, N_T = k + m) by enumeration";
    double worst_paper = 0.0;
    double worst_corrected = 0.0;
    for (const LFParams& params : grid.params) {
        for (int T = 1; T <= grid.max_T; ++T) {
            for (int k = 1; k <= grid.max_k; ++k) {
                for (int m = 0; m <= grid.max_m; ++m) {
                    const auto joint = exact_uniform_joint(params, T, k, k + m);
                    for (const Depths& x : all_depth_vectors(T, k - 1)) {
                        const DepthSeq seq{T, x};
                        DensityCell cell{params, T, k, m, x, 0.0,
                                         ksample_lik_direct(params, seq, m, FormulaVariant::PaperStated),
                                         ksample_lik_direct(params, seq, m, FormulaVariant::DerivationCorrected)};
                        const auto it = joint.find(x);
                        cell.exact = it == joint.end() ? 0.0 : it->second;
                        worst_paper = std::max(worst_paper, std::abs(cell.paper - cell.exact));
                        worst_corrected = std::max(worst_corrected, std::abs(cell.corrected - cell.exact));
                        rep.density_cells.push_back(std::move(cell));
                    }
                }
            }
        }
    }
    rep.verdicts = {verdict_of(FormulaVariant::PaperStated, worst_paper),
                    verdict_of(FormulaVariant::DerivationCorrected, worst_corrected)};
    return rep;
}

AdjudicationReport adjudicate_cdf(const AdjudicationGrid& grid)
{
    AdjudicationReport rep;
    rep.formula_id = "k-sample joint CDF (closed form)";
    rep.reference = "summed printed density over x' <= x";
    double worst_paper = 0.0;
    double worst_corrected = 0.0;
    for (const LFParams& params : grid.params) {
        for (int T = 1; T <= grid.max_T; ++T) {
            for (int k = 1; k <= grid.max_k; ++k) {
                for (int m = 0; m <= grid.max_m; ++m) {
                    const auto joint = exact_uniform_joint(params, T, k, k + m);
                    for (const Depths& x : all_depth_vectors(T, k - 1)) {
                        CdfCell cell = make_cdf_cell(params, T, k, m, x, joint);
                        if (!cell.degenerate) {
                            worst_paper = std::max(worst_paper, std::abs(cell.paper_closed - cell.direct));
                            worst_corrected = std::max(worst_corrected, std::abs(cell.corrected_closed - cell.direct));
                        }
                        rep.cdf_cells.push_back(std::move(cell));
                    }
                }
            }
        }
    }
    rep.verdicts = {verdict_of(FormulaVariant::PaperStated, worst_paper),
                    verdict_of(FormulaVariant::DerivationCorrected, worst_corrected)};
    return rep;
}

CdfCell cdf_hand_case(const LFParams& params, int T, int x1)
{
    if (x1 < 1 || x1 >= T)
        throw Error(ErrorKind::OutOfRange, "the hand case needs 1 <= x_1 < T");
    return make_cdf_cell(params, T, 2, 0, Depths{x1}, exact_uniform_joint(params, T, 2, 2));
}

std::string AdjudicationReport::to_text() const
{
    std::ostringstream os;
    os << "== adjudication: " << formula_id << " ==\n";
    os << "reference: " << reference << "\n";
    if (!density_cells.empty()) {
        os << "p r T k m x | exact paper-stated derivation-corrected\n";
        for (const auto& c : density_cells)
            os << num(c.params.p()) << ' ' << num(c.params.r()) << ' ' << c.T << ' ' << c.k << ' ' << c.m << ' '
               << depths_str(c.depths) << " | " << num(c.exact) << ' ' << num(c.paper) << ' '
               << num(c.corrected) << "\n";
    }
    if (!cdf_cells.empty()) {
        os << "p r T k m x | paper-closed corrected-closed direct-sum exact routed-value | note\n";
        for (const auto& c : cdf_cells)
            os << num(c.params.p()) << ' ' << num(c.params.r()) << ' ' << c.T << ' ' << c.k << ' ' << c.m << ' '
               << depths_str(c.depths) << " | " << num(c.paper_closed) << ' ' << num(c.corrected_closed) << ' '
               << num(c.direct) << ' ' << num(c.exact) << ' ' << num(c.routed_value) << " | "
               << (c.note.empty() ? "-" : c.note) << "\n";
    }
    for (const auto& v : verdicts)
        os << "verdict " << to_string(v.variant) << ": " << (v.matches ? "matches" : "does not match")
           << " (max discrepancy " << num(v.max_discrepancy) << ")\n";
    os << "matching variant: " << matching_variant() << "\n";
    return os.str();
}

std::string AdjudicationReport::to_json() const
{
    Json j;
    j["formula"] = formula_id;
    j["reference"] = reference;
    Json cells = Json::array();
    for (const auto& c : density_cells)
        cells.push_back({{"p", c.params.p()}, {"r", c.params.r()}, {"T", c.T}, {"k", c.k}, {"m", c.m},
                         {"x", c.depths}, {"exact", c.exact}, {"paper_stated", c.paper},
                         {"derivation_corrected", c.corrected}});
    for (const auto& c : cdf_cells)
        cells.push_back({{"p", c.params.p()}, {"r", c.params.r()}, {"T", c.T}, {"k", c.k}, {"m", c.m},
                         {"x", c.depths}, {"degenerate", c.degenerate}, {"paper_stated", c.paper_closed},
                         {"derivation_corrected", c.corrected_closed}, {"routed_value", c.routed_value},
                         {"direct_sum", c.direct}, {"exact", c.exact}, {"note", c.note}});
    j["cells"] = std::move(cells);
    Json verdict = Json::array();
    for (const auto& v : verdicts)
        verdict.push_back({{"variant", to_string(v.variant)},
                           {"verdict", v.matches ? "matches" : "does not match"},
                           {"max_discrepancy", v.max_discrepancy}});
    j["verdicts"] = std::move(verdict);
    j["matching_variant"] = matching_variant();
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Mixture identity

MixtureReport verify_mixture_identity(const LFParams& params, int T, int k, int n_max, double quad_tol)
{
    params.require_supercritical();
    if (n_max <= 0)
        n_max = auto_n_max(params, T, k, 1e-13);
    const ExactLaw law = exact_sampled_law(params, T, k, SamplingScheme::uniform(), n_max);
    MixtureReport rep{params, T, k, n_max, law.residual, quad_tol, {}, 0.0};
    for (const Depths& x : all_depth_vectors(T, k - 1)) {
        const double mix = std::exp(ksample_marginal_loglik(params, DepthSeq{T, x}, quad_tol));
        const double exact = law.at(x);
        rep.rows.push_back(MixtureRow{x, exact, mix});
        rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(exact - mix));
    }
    return rep;
}

std::string MixtureReport::to_text() const
{
    std::ostringstream os;
    os << "== mixture identity: p=" << num(params.p()) << " r=" << num(params.r()) << " T=" << T << " k=" << k
       << " ==\n";
    os << "n_max " << n_max << ", residual " << num(residual) << ", quadrature tol " << num(quad_tol) << "\n";
    os << "x | exact mixture diff\n";
    for (const auto& row : rows)
        os << depths_str(row.depths) << " | " << num(row.exact) << ' ' << num(row.mixture) << ' '
           << num(row.exact - row.mixture) << "\n";
    os << "max abs diff " << num(max_abs_diff) << "\n";
    return os.str();
}

std::string MixtureReport::to_json() const
{
    Json j;
    j["p"] = params.p();
    j["r"] = params.r();
    j["T"] = T;
    j["k"] = k;
    j["n_max"] = n_max;
    j["residual"] = residual;
    j["quad_tol"] = quad_tol;
    Json rs = Json::array();
    for (const auto& row : rows)
        rs.push_back({{"x", row.depths}, {"exact", row.exact}, {"mixture", row.mixture}});
    j["rows"] = std::move(rs);
    j["max_abs_diff"] = max_abs_diff;
    return j.dump(2);
}

} // namespace lfgen
