#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfgen/lf_model.hpp"

namespace lfgen {

struct ValidateConfig {
    LFParams params{0.5, 0.8};
    std::uint64_t seed = 1;
    int reps = 10'000;  ///< Monte-Carlo size for the randomized suites
    int threads = 1;
};

struct Check {
    std::string name;
    bool passed;
    /// A documented disagreement with a printed formula: reported, never fatal.
    bool erratum = false;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<Check> checks;
    std::string text;  ///< full human-readable report
    std::string json;  ///< machine-readable companion

    /// All non-erratum checks passed.
    bool ok() const;
};

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"eq3", "eq4", "muk", "mixture", "density", "cdf"};
    return names;
}

/// Runs one suite by name. Throws Error{OutOfRange} for an unknown name.
SuiteReport run_suite(const std::string& name, const ValidateConfig& config);

/// P(H_y > n) as the geometric-block series sum_g y (1-y)^(g-1) (1 - P(H <= n)^g),
/// truncated once the remaining block mass is below 1e-18.
double thinned_tail_series(const LFParams& params, double y, int n);

} // namespace lfgen
