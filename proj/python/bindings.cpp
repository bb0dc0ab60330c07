#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lfgen/errors.hpp"
#include "lfgen/inference.hpp"
#include "lfgen/likelihood.hpp"
#include "lfgen/lf_model.hpp"
#include "lfgen/oracle.hpp"
#include "lfgen/rng.hpp"
#include "lfgen/simulator.hpp"
#include "lfgen/tree.hpp"
#include "lfgen/validate.hpp"

namespace py = pybind11;
using namespace lfgen;

namespace {

FormulaVariant variant_of(const std::string& name)
{
    if (name == "paper-stated")
        return FormulaVariant::PaperStated;
    if (name == "derivation-corrected")
        return FormulaVariant::DerivationCorrected;
    throw Error(ErrorKind::OutOfRange, "variant must be 'paper-stated' or 'derivation-corrected'");
}

ObservationSet make_obs(const std::vector<DepthSeq>& trees, const std::string& scheme, double y,
                        const std::string& conditioning)
{
    ObservationSet obs;
    if (scheme == "full")
        obs.scheme = Scheme::Full;
    else if (scheme == "bernoulli")
        obs.scheme = Scheme::Bernoulli;
    else if (scheme == "uniform")
        obs.scheme = Scheme::Uniform;
    else
        throw Error(ErrorKind::OutOfRange, "scheme must be 'full', 'bernoulli' or 'uniform'");
    obs.y = y;
    if (conditioning == "on-tip-count")
        obs.conditioning = Conditioning::OnTipCount;
    else if (conditioning == "unconditioned")
        obs.conditioning = Conditioning::Unconditioned;
    else
        throw Error(ErrorKind::OutOfRange, "conditioning must be 'on-tip-count' or 'unconditioned'");
    obs.trees = trees;
    return obs;
}

py::dict law_to_dict(const ExactLaw& law)
{
    py::dict probs;
    for (const auto& [x, v] : law.probabilities)
        probs[py::tuple(py::cast(x))] = v;
    py::dict out;
    out["probabilities"] = probs;
    out["residual"] = law.residual;
    out["conditioning"] = law.conditioning;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Linear-fractional BGW genealogies: laws, simulation, likelihoods, exact oracle, fitting";

    static py::exception<Error> error_type(m, "LfgenError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error_type, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    py::class_<LFParams>(m, "LFParams")
        .def(py::init<double, double>(), py::arg("p"), py::arg("r"))
        .def_property_readonly("p", &LFParams::p)
        .def_property_readonly("r", &LFParams::r)
        .def_property_readonly("mean", &LFParams::mean)
        .def_property_readonly("supercritical", &LFParams::supercritical)
        .def("__repr__", [](const LFParams& s) {
            return "LFParams(p=" + std::to_string(s.p()) + ", r=" + std::to_string(s.r()) + ")";
        });

    py::class_<DepthSeq>(m, "DepthSeq")
        .def(py::init([](int T, std::vector<int> depths) {
                 DepthSeq s{T, std::move(depths)};
                 s.validate();
                 return s;
             }),
             py::arg("T"), py::arg("depths"))
        .def_readonly("T", &DepthSeq::height)
        .def_readonly("depths", &DepthSeq::depths)
        .def_property_readonly("tip_count", &DepthSeq::tip_count)
        .def("__eq__", [](const DepthSeq& a, const DepthSeq& b) { return a == b; })
        .def("__repr__", [](const DepthSeq& s) {
            std::string out = "DepthSeq(T=" + std::to_string(s.height) + ", depths=[";
            for (std::size_t i = 0; i < s.depths.size(); ++i)
                out += (i ? ", " : "") + std::to_string(s.depths[i]);
            return out + "])";
        });

    m.def("coalescent_tail", &coalescent_tail, py::arg("params"), py::arg("n"));
    m.def("coalescent_pmf", &coalescent_pmf, py::arg("params"), py::arg("n"));
    m.def("thinned_tail", &thinned_tail, py::arg("params"), py::arg("y"), py::arg("n"));
    m.def("thinned_pmf", &thinned_pmf, py::arg("params"), py::arg("y"), py::arg("n"));
    m.def("thinned_conditional_cdf", &thinned_conditional_cdf, py::arg("params"), py::arg("y"), py::arg("T"),
          py::arg("j"));

    py::class_<MuKMeasure>(m, "MuK")
        .def(py::init<double, int>(), py::arg("delta"), py::arg("k"))
        .def("density", &MuKMeasure::density)
        .def("cdf", &MuKMeasure::cdf)
        .def("quantile", &MuKMeasure::quantile);

    m.def(
        "simulate_cpp",
        [](const LFParams& params, int T, std::uint64_t seed, std::uint64_t stream) {
            Rng rng(seed, stream);
            return simulate_cpp(params, T, rng);
        },
        py::arg("params"), py::arg("T"), py::arg("seed"), py::arg("stream") = 0);
    m.def(
        "sample_bernoulli",
        [](const DepthSeq& seq, double y, std::uint64_t seed, std::uint64_t stream) -> std::optional<DepthSeq> {
            Rng rng(seed, stream);
            const SampleMask mask = bernoulli_mask(static_cast<std::size_t>(seq.tip_count()), y, rng);
            if (std::none_of(mask.begin(), mask.end(), [](bool v) { return v; }))
                return std::nullopt;
            return subsample_depths(seq, mask);
        },
        py::arg("seq"), py::arg("y"), py::arg("seed"), py::arg("stream") = 0);
    m.def(
        "sample_uniform",
        [](const DepthSeq& seq, int k, std::uint64_t seed, std::uint64_t stream) {
            Rng rng(seed, stream);
            return subsample_depths(
                seq, uniform_mask(static_cast<std::size_t>(seq.tip_count()), static_cast<std::size_t>(k), rng));
        },
        py::arg("seq"), py::arg("k"), py::arg("seed"), py::arg("stream") = 0);
    m.def("subsample_depths", &subsample_depths, py::arg("seq"), py::arg("mask"));

    m.def(
        "parse_newick", [](const std::string& text) { return tree_to_depths(parse_newick(text)); },
        py::arg("text"));
    m.def(
        "write_newick", [](const DepthSeq& seq) { return write_newick(depths_to_tree(seq)); }, py::arg("seq"));

    m.def("full_tree_loglik", &full_tree_loglik, py::arg("params"), py::arg("seq"),
          py::arg("conditioned_on_n") = false);
    m.def("bernoulli_loglik", &bernoulli_loglik, py::arg("params"), py::arg("y"), py::arg("seq"),
          py::arg("conditioned_on_k") = false);
    m.def("ksample_marginal_loglik", &ksample_marginal_loglik, py::arg("params"), py::arg("seq"),
          py::arg("rel_tol") = 1e-9);
    m.def(
        "ksample_lik_direct",
        [](const LFParams& params, const DepthSeq& seq, int m_extra, const std::string& variant) {
            return ksample_lik_direct(params, seq, m_extra, variant_of(variant));
        },
        py::arg("params"), py::arg("seq"), py::arg("m"), py::arg("variant") = "derivation-corrected");

    m.def(
        "exact_sampled_law",
        [](const LFParams& params, int T, int k, const std::string& scheme, double y, int n_max) {
            SamplingScheme s;
            if (scheme == "uniform")
                s = SamplingScheme::uniform();
            else if (scheme == "bernoulli")
                s = SamplingScheme::bernoulli(y);
            else
                throw Error(ErrorKind::OutOfRange, "scheme must be 'uniform' or 'bernoulli'");
            return law_to_dict(exact_sampled_law(params, T, k, s, n_max));
        },
        py::arg("params"), py::arg("T"), py::arg("k"), py::arg("scheme") = "uniform", py::arg("y") = 1.0,
        py::arg("n_max") = 200);

    m.def(
        "total_loglik",
        [](const LFParams& params, const std::vector<DepthSeq>& trees, const std::string& scheme, double y,
           const std::string& conditioning) {
            return total_loglik(params, make_obs(trees, scheme, y, conditioning));
        },
        py::arg("params"), py::arg("trees"), py::arg("scheme") = "full", py::arg("y") = 1.0,
        py::arg("conditioning") = "on-tip-count");

    m.def(
        "fit",
        [](const std::vector<DepthSeq>& trees, const std::string& scheme, double y, const std::string& conditioning,
           int grid_resolution, int max_iterations, double tolerance) {
            FitOptions opts;
            opts.grid_resolution = grid_resolution;
            opts.max_iterations = max_iterations;
            opts.tolerance = tolerance;
            const FitResult r = fit(make_obs(trees, scheme, y, conditioning), opts);
            py::dict out;
            out["p_hat"] = r.p_hat;
            out["r_hat"] = r.r_hat;
            out["loglik"] = r.loglik;
            out["converged"] = r.converged;
            out["iterations"] = r.iterations;
            out["boundary_flag"] = r.boundary_flag;
            out["grid_loglik"] = r.grid_loglik;
            out["gradient_norm"] = r.gradient_norm;
            return out;
        },
        py::arg("trees"), py::arg("scheme") = "full", py::arg("y") = 1.0, py::arg("conditioning") = "on-tip-count",
        py::arg("grid_resolution") = 50, py::arg("max_iterations") = 2000, py::arg("tolerance") = 1e-7);

    m.def(
        "run_suite",
        [](const std::string& name, const LFParams& params, std::uint64_t seed, int reps) {
            ValidateConfig cfg;
            cfg.params = params;
            cfg.seed = seed;
            cfg.reps = reps;
            const SuiteReport rep = run_suite(name, cfg);
            return py::make_tuple(rep.ok(), rep.text);
        },
        py::arg("name"), py::arg("params"), py::arg("seed") = 1, py::arg("reps") = 10000);
}
