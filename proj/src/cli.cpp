#include "lfgen/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lfgen/errors.hpp"
#include "lfgen/inference.hpp"
#include "lfgen/likelihood.hpp"
#include "lfgen/parallel.hpp"
#include "lfgen/rng.hpp"
#include "lfgen/simulator.hpp"
#include "lfgen/tree_io.hpp"
#include "lfgen/validate.hpp"

namespace lfgen::cli {

namespace {

struct UsageError : std::runtime_error {
    UsageError(const std::string& what, std::string remedy)
        : std::runtime_error(what), remedy(std::move(remedy))
    {
    }
    std::string remedy;
};

struct Options {
    double p = 0.5;
    double r = 0.8;
    int T = 0;
    double y = 0.0;
    int reps = 1;
    std::optional<std::uint64_t> seed;
    std::string in;
    std::string out;
    std::string format;  // input format override
    std::string to = "jsonl";
    std::string method = "cpp";
    std::string scheme = "full";
    std::string conditioning = "on-tip-count";
    std::string suite = "all";
    std::string json_out;
    std::string p_range = "0.02:0.98";
    std::string r_range = "0.02:1";
    int steps = 25;
    int grid = 50;
    int max_iter = 2000;
    double tol = 1e-7;
    int n_max = 20;
    int threads = 1;
};

std::string read_input(const std::string& path)
{
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorKind::FormatError, "cannot open input file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void emit(const Options& o, const std::string& content, std::ostream& out)
{
    if (o.out.empty() || o.out == "-")
        out << content;
    else
        write_file_atomic(o.out, content);
}

std::uint64_t resolve_seed(const Options& o, std::ostream& err)
{
    if (o.seed)
        return *o.seed;
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "lfgen: no --seed given; using --seed " << seed << "\n";
    return seed;
}

std::optional<TreeFormat> input_format(const Options& o)
{
    if (o.format.empty())
        return std::nullopt;
    if (o.format == "jsonl")
        return TreeFormat::JsonLines;
    if (o.format == "newick")
        return TreeFormat::Newick;
    throw UsageError("unknown --format '" + o.format + "'", "use --format jsonl or --format newick");
}

std::string write_records(const Options& o, const std::vector<TreeRecord>& records)
{
    if (o.to == "jsonl")
        return write_jsonl(records);
    if (o.to == "newick")
        return write_newick_lines(records);
    throw UsageError("unknown --to '" + o.to + "'", "use --to jsonl or --to newick");
}

/// Parameter flags that do not form a law are a usage error, not a computation error.
LFParams params_of(const Options& o, bool supercritical = false)
{
    try {
        LFParams params(o.p, o.r);
        if (supercritical)
            params.require_supercritical();
        return params;
    } catch (const Error& e) {
        throw UsageError(e.what(), "pass --p in (0, 1) and --r in [0, 1] with r > p, e.g. --p 0.5 --r 0.8");
    }
}

/// "bernoulli:y", "uniform:k" or "uniform", "full".
struct SchemeArg {
    std::string kind;
    double value = 0.0;
};

SchemeArg parse_scheme(const std::string& text)
{
    const auto colon = text.find(':');
    SchemeArg s{text.substr(0, colon), 0.0};
    if (s.kind != "full" && s.kind != "bernoulli" && s.kind != "uniform")
        throw UsageError("unknown scheme '" + text + "'", "use full, bernoulli:<y> or uniform[:<k>]");
    if (colon != std::string::npos) {
        try {
            std::size_t used = 0;
            s.value = std::stod(text.substr(colon + 1), &used);
            if (used != text.size() - colon - 1)
                throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw UsageError("malformed scheme '" + text + "'", "write e.g. bernoulli:0.1 or uniform:5");
        }
    }
    return s;
}

ObservationSet observations(const Options& o)
{
    ObservationSet obs;
    const SchemeArg s = parse_scheme(o.scheme);
    if (s.kind == "full") {
        obs.scheme = Scheme::Full;
    } else if (s.kind == "bernoulli") {
        obs.scheme = Scheme::Bernoulli;
        obs.y = s.value;
    } else {
        obs.scheme = Scheme::Uniform;
    }
    if (o.conditioning == "on-tip-count")
        obs.conditioning = Conditioning::OnTipCount;
    else if (o.conditioning == "unconditioned")
        obs.conditioning = Conditioning::Unconditioned;
    else
        throw UsageError("unknown --conditioning '" + o.conditioning + "'", "use on-tip-count or unconditioned");
    for (const TreeRecord& rec : read_trees(read_input(o.in), input_format(o)))
        obs.trees.push_back(rec.seq);
    obs.validate();
    return obs;
}

std::pair<double, double> parse_range(const std::string& text, const char* flag)
{
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos)
            throw std::invalid_argument("no colon");
        return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw UsageError(std::string("malformed ") + flag + " '" + text + "'", std::string("write ") + flag + " lo:hi");
    }
}

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------

int run_simulate(const Options& o, std::ostream& out, std::ostream& err)
{
    if (o.T < 1)
        throw UsageError("--T must be at least 1", "pass --T <height>, e.g. --T 6");
    if (o.reps < 1)
        throw UsageError("--reps must be at least 1", "pass --reps <count>");
    if (o.method != "cpp" && o.method != "forward")
        throw UsageError("unknown --method '" + o.method + "'", "use --method cpp or --method forward");
    const LFParams params = params_of(o, true);
    const std::uint64_t seed = resolve_seed(o, err);
    std::vector<TreeRecord> records(static_cast<std::size_t>(o.reps));
    parallel_for(o.reps, o.threads, [&](int i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        DepthSeq seq;
        if (o.method == "cpp") {
            seq = simulate_cpp(params, o.T, rng);
        } else {
            std::optional<ForwardGenealogy> fwd;
            while (!(fwd = simulate_forward_bgw(params, o.T, rng)))
                ;
            seq = coalescent_depths_of(*fwd);
        }
        records[i] = TreeRecord{std::move(seq), i};
    });
    emit(o, write_records(o, records), out);
    return kOk;
}

int run_sample(const Options& o, std::ostream& out, std::ostream& err)
{
    const SchemeArg s = parse_scheme(o.scheme);
    if (s.kind == "full")
        throw UsageError("sample needs a sampling scheme", "pass --scheme bernoulli:<y> or --scheme uniform:<k>");
    if (s.kind == "bernoulli" && !(s.value > 0.0 && s.value <= 1.0))
        throw UsageError("Bernoulli retention must lie in (0, 1]", "write e.g. --scheme bernoulli:0.1");
    if (s.kind == "uniform" && !(s.value >= 1.0 && s.value == std::floor(s.value)))
        throw UsageError("uniform sample size must be a positive integer", "write e.g. --scheme uniform:5");
    const std::vector<TreeRecord> input = read_trees(read_input(o.in), input_format(o));
    const std::uint64_t seed = resolve_seed(o, err);
    std::vector<std::optional<TreeRecord>> sampled(input.size());
    parallel_for(static_cast<int>(input.size()), o.threads, [&](int i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        const DepthSeq& seq = input[i].seq;
        const std::size_t n = static_cast<std::size_t>(seq.tip_count());
        SampleMask mask;
        if (s.kind == "bernoulli") {
            mask = bernoulli_mask(n, s.value, rng);
            if (std::none_of(mask.begin(), mask.end(), [](bool v) { return v; }))
                return;
        } else {
            const auto k = static_cast<std::size_t>(s.value);
            if (k > n)
                return;
            mask = uniform_mask(n, k, rng);
        }
        sampled[i] = TreeRecord{subsample_depths(seq, mask), input[i].source.value_or(i)};
    });
    std::vector<TreeRecord> records;
    for (auto& rec : sampled)
        if (rec)
            records.push_back(std::move(*rec));
    if (records.size() < input.size())
        err << "lfgen: " << input.size() - records.size() << " of " << input.size()
            << " trees had no sampled tree and were dropped\n";
    emit(o, write_records(o, records), out);
    return kOk;
}

int run_likelihood(const Options& o, std::ostream& out, std::ostream&)
{
    const LFParams params = params_of(o);
    const ObservationSet obs = observations(o);
    std::string csv = "index,T,tips,loglik\n";
    for (std::size_t i = 0; i < obs.trees.size(); ++i) {
        const DepthSeq& t = obs.trees[i];
        csv += std::to_string(i) + "," + std::to_string(t.height) + "," + std::to_string(t.tip_count()) + "," +
               fmt17(tree_loglik(params, obs, t)) + "\n";
    }
    emit(o, csv, out);
    return kOk;
}

int run_fit(const Options& o, std::ostream& out, std::ostream&)
{
    const ObservationSet obs = observations(o);
    FitOptions fo;
    fo.grid_resolution = o.grid;
    fo.max_iterations = o.max_iter;
    fo.tolerance = o.tol;
    fo.threads = o.threads;
    emit(o, fit(obs, fo).to_json() + "\n", out);
    return kOk;
}

int run_surface(const Options& o, std::ostream& out, std::ostream&)
{
    if (o.steps < 1)
        throw UsageError("--steps must be positive", "pass --steps <n>");
    const auto [p_lo, p_hi] = parse_range(o.p_range, "--p-range");
    const auto [r_lo, r_hi] = parse_range(o.r_range, "--r-range");
    const ObservationSet obs = observations(o);
    const SurfaceGrid grid{p_lo, p_hi, r_lo, r_hi, o.steps, o.steps};
    emit(o, surface_to_csv(loglik_surface(obs, grid, o.threads)), out);
    return kOk;
}

int run_validate(const Options& o, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> suites;
    if (o.suite == "all") {
        suites = suite_names();
    } else {
        const auto& names = suite_names();
        if (std::find(names.begin(), names.end(), o.suite) == names.end())
            throw UsageError("unknown --suite '" + o.suite + "'", "use eq3, eq4, muk, mixture, density, cdf or all");
        suites = {o.suite};
    }
    ValidateConfig cfg;
    cfg.params = params_of(o);
    cfg.params.require_supercritical();
    cfg.reps = o.reps > 1 ? o.reps : cfg.reps;
    cfg.threads = o.threads;
    cfg.seed = resolve_seed(o, err);

    std::string text;
    nlohmann::ordered_json json = nlohmann::ordered_json::array();
    bool ok = true;
    for (const std::string& name : suites) {
        const SuiteReport rep = run_suite(name, cfg);
        text += rep.text + "suite " + name + ": " + (rep.ok() ? "ok" : "FAILED") + "\n\n";
        json.push_back(nlohmann::ordered_json::parse(rep.json));
        ok = ok && rep.ok();
    }
    text += std::string("validation: ") + (ok ? "ok" : "FAILED") + "\n";
    emit(o, text, out);
    if (!o.json_out.empty()) {
        nlohmann::ordered_json doc;
        doc["format"] = "lfgen-validation";
        doc["version"] = 1;
        doc["seed"] = cfg.seed;
        doc["suites"] = std::move(json);
        write_file_atomic(o.json_out, doc.dump(2) + "\n");
    }
    return ok ? kOk : kComputationError;
}

int run_emit_dist(const Options& o, std::ostream& out, std::ostream&)
{
    if (o.n_max < 1)
        throw UsageError("--n-max must be at least 1", "pass --n-max <n>");
    const LFParams params = params_of(o);
    const TailLaw law = o.y > 0.0 ? TailLaw::thinned(params, o.y) : TailLaw::coalescent(params);
    std::string csv = "n,pmf,tail\n";
    for (int n = 1; n <= o.n_max; ++n)
        csv += std::to_string(n) + "," + fmt17(law.pmf(n)) + "," + fmt17(law.tail(n)) + "\n";
    emit(o, csv, out);
    return kOk;
}

int run_convert(const Options& o, std::ostream& out, std::ostream&)
{
    emit(o, write_records(o, read_trees(read_input(o.in), input_format(o))), out);
    return kOk;
}

} // namespace

void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw Error(ErrorKind::FormatError, "cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f)
            throw Error(ErrorKind::FormatError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::FormatError, "cannot move output into place at " + path);
    }
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Linear-fractional BGW genealogies: simulate, sample, evaluate, fit, validate"};
    app.name("lfgen");
    app.require_subcommand(1);

    auto model = [&](CLI::App* sub, bool required) {
        auto* p = sub->add_option("--p", o.p, "geometric parameter p of the offspring law")->check(CLI::Range(0.0, 1.0));
        auto* r = sub->add_option("--r", o.r, "probability r of at least one offspring")->check(CLI::Range(0.0, 1.0));
        if (required) {
            p->required();
            r->required();
        }
    };
    auto trees_in = [&](CLI::App* sub) {
        sub->add_option("--in", o.in, "input trees (JSON-lines or Newick; '-' for stdin)")->required();
        sub->add_option("--format", o.format, "input format override: jsonl | newick");
    };
    auto obs_flags = [&](CLI::App* sub) {
        sub->add_option("--scheme", o.scheme, "full | bernoulli:<y> | uniform")->capture_default_str();
        sub->add_option("--conditioning", o.conditioning, "on-tip-count | unconditioned")->capture_default_str();
    };
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "output path (stdout when absent)");
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    };

    auto* simulate = app.add_subcommand("simulate", "simulate CPP(T) trees");
    model(simulate, true);
    simulate->add_option("--T", o.T, "tree height")->required();
    simulate->add_option("--reps", o.reps, "number of trees");
    simulate->add_option("--seed", o.seed, "64-bit seed");
    simulate->add_option("--method", o.method, "cpp | forward");
    simulate->add_option("--to", o.to, "output format: jsonl | newick");
    common(simulate);

    auto* sample = app.add_subcommand("sample", "sample tips from trees");
    trees_in(sample);
    sample->add_option("--scheme", o.scheme, "bernoulli:<y> | uniform:<k>")->required();
    sample->add_option("--seed", o.seed, "64-bit seed");
    sample->add_option("--to", o.to, "output format: jsonl | newick");
    common(sample);

    auto* likelihood = app.add_subcommand("likelihood", "per-tree log-likelihoods as CSV");
    model(likelihood, true);
    trees_in(likelihood);
    obs_flags(likelihood);
    common(likelihood);

    auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood fit of (p, r)");
    trees_in(fit_cmd);
    obs_flags(fit_cmd);
    fit_cmd->add_option("--grid", o.grid, "coarse grid resolution per axis");
    fit_cmd->add_option("--max-iter", o.max_iter, "simplex iteration budget");
    fit_cmd->add_option("--tol", o.tol, "simplex diameter tolerance");
    common(fit_cmd);

    auto* surface = app.add_subcommand("surface", "log-likelihood surface as CSV");
    trees_in(surface);
    obs_flags(surface);
    surface->add_option("--p-range", o.p_range, "p range lo:hi");
    surface->add_option("--r-range", o.r_range, "r range lo:hi");
    surface->add_option("--steps", o.steps, "grid points per axis");
    common(surface);

    auto* validate = app.add_subcommand("validate", "run validation and adjudication suites");
    model(validate, false);
    validate->add_option("--suite", o.suite, "eq3 | eq4 | muk | mixture | density | cdf | all");
    validate->add_option("--reps", o.reps, "Monte-Carlo size for randomized suites");
    validate->add_option("--seed", o.seed, "64-bit seed");
    validate->add_option("--json", o.json_out, "also write a JSON report to this path");
    common(validate);

    auto* emit_dist = app.add_subcommand("emit-dist", "tabulate the law of H or H_y as CSV");
    model(emit_dist, true);
    emit_dist->add_option("--y", o.y, "Bernoulli retention probability (omit for H)")->check(CLI::Range(0.0, 1.0));
    emit_dist->add_option("--n-max", o.n_max, "largest n to tabulate");
    common(emit_dist);

    auto* convert = app.add_subcommand("convert", "convert between Newick and JSON-lines");
    trees_in(convert);
    convert->add_option("--to", o.to, "output format: jsonl | newick");
    common(convert);

    std::vector<const char*> argv{"lfgen"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        const std::string where = subs.empty() ? "lfgen" : "lfgen " + subs.front()->get_name();
        err << "lfgen: usage error: " << e.what() << "\n  remedy: run '" << where << " --help'\n";
        return kUsageError;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        if (sub == "simulate")
            return run_simulate(o, out, err);
        if (sub == "sample")
            return run_sample(o, out, err);
        if (sub == "likelihood")
            return run_likelihood(o, out, err);
        if (sub == "fit")
            return run_fit(o, out, err);
        if (sub == "surface")
            return run_surface(o, out, err);
        if (sub == "validate")
            return run_validate(o, out, err);
        if (sub == "emit-dist")
            return run_emit_dist(o, out, err);
        return run_convert(o, out, err);
    } catch (const UsageError& e) {
        err << "lfgen " << sub << ": usage error: " << e.what() << "\n  remedy: " << e.remedy << "\n";
        return kUsageError;
    } catch (const Error& e) {
        err << "lfgen " << sub << ": error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return kComputationError;
    } catch (const std::exception& e) {
        err << "lfgen " << sub << ": error: " << e.what() << "\n";
        return kComputationError;
    }
}

int dispatch(int argc, const char* const* argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

} // namespace lfgen::cli
