#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lfgen/errors.hpp"
#include "lfgen/inference.hpp"
#include "lfgen/likelihood.hpp"
#include "lfgen/simulator.hpp"

using namespace lfgen;

namespace {

const LFParams kFig{0.5, 0.8};

std::vector<DepthSeq> simulate_set(int count, int T, std::uint64_t seed)
{
    std::vector<DepthSeq> out;
    for (int i = 0; i < count; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        out.push_back(simulate_cpp(kFig, T, rng));
    }
    return out;
}

ObservationSet full_obs(std::vector<DepthSeq> trees, Conditioning c = Conditioning::OnTipCount)
{
    ObservationSet obs;
    obs.conditioning = c;
    obs.trees = std::move(trees);
    return obs;
}

} // namespace

TEST_CASE("total likelihood")
{
    CHECK(total_loglik(kFig, full_obs({})) == 0.0);
    const DepthSeq t{5, {1, 4, 2}};
    for (auto c : {Conditioning::OnTipCount, Conditioning::Unconditioned})
        CHECK(total_loglik(kFig, full_obs({t}, c)) ==
              doctest::Approx(full_tree_loglik(kFig, t, c == Conditioning::OnTipCount)).epsilon(1e-14));

    const auto trees = simulate_set(40, 4, 3);
    for (Scheme s : {Scheme::Full, Scheme::Bernoulli, Scheme::Uniform}) {
        ObservationSet obs = full_obs(trees, Conditioning::Unconditioned);
        obs.scheme = s;
        obs.y = s == Scheme::Bernoulli ? 0.4 : 1.0;
        double sum = 0.0;
        for (const auto& tree : trees)
            sum += tree_loglik(kFig, obs, tree);
        CHECK(total_loglik(kFig, obs) == doctest::Approx(sum).epsilon(1e-11));
    }

    ObservationSet bad = full_obs(trees);
    bad.scheme = Scheme::Bernoulli;
    bad.y = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("truth beats a distant alternative")
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const ObservationSet obs = full_obs(simulate_set(200, 8, seed));
        CHECK(total_loglik(kFig, obs) > total_loglik(LFParams(0.4, 0.9), obs));
    }
}

TEST_CASE("fit coordinates round trip")
{
    for (double p : {0.1, 0.5, 0.9})
        for (double r : {p + 0.01, (p + 1) / 2, 0.999}) {
            const double u = FitCoordinates::to_u(p, r);
            const double v = FitCoordinates::to_v(p, r);
            CHECK(FitCoordinates::to_p(u, v) == doctest::Approx(p).epsilon(1e-13));
            CHECK(FitCoordinates::to_r(u, v) == doctest::Approx(r).epsilon(1e-13));
        }
}

TEST_CASE("fit recovers the generating law")
{
    const ObservationSet obs = full_obs(simulate_set(150, 10, 11));
    FitOptions opts;
    opts.grid_resolution = 20;
    const FitResult r = fit(obs, opts);
    CHECK(r.converged);
    CHECK(std::abs(r.p_hat - 0.5) < 0.1);
    CHECK(std::abs(r.r_hat - 0.8) < 0.1);
    CHECK(r.loglik >= r.grid_loglik);
    CHECK(r.gradient_norm < 1e-3);
    CHECK_FALSE(r.boundary_flag);
    CHECK(r.loglik == doctest::Approx(total_loglik(LFParams(r.p_hat, r.r_hat), obs)).epsilon(1e-12));
    CHECK(r.to_json().find("\"lfgen-fit\"") != std::string::npos);

    // order of trees does not matter
    ObservationSet shuffled = obs;
    std::reverse(shuffled.trees.begin(), shuffled.trees.end());
    std::rotate(shuffled.trees.begin(), shuffled.trees.begin() + 37, shuffled.trees.end());
    const FitResult s = fit(shuffled, opts);
    CHECK(s.p_hat == r.p_hat);
    CHECK(s.r_hat == r.r_hat);
    CHECK(s.loglik == r.loglik);

    FitOptions threaded = opts;
    threaded.threads = 4;
    const FitResult t = fit(obs, threaded);
    CHECK(t.p_hat == r.p_hat);
    CHECK(t.r_hat == r.r_hat);
}

TEST_CASE("fit on an empty dataset")
{
    try {
        fit(full_obs({}));
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoFeasiblePoint);
    }
}

TEST_CASE("likelihood surface")
{
    const ObservationSet obs = full_obs(simulate_set(200, 10, 5));
    const auto rows = loglik_surface(obs, SurfaceGrid{0.45, 0.55, 0.75, 0.85, 3, 3});
    REQUIRE(rows.size() == 9);
    FitOptions opts;
    opts.grid_resolution = 20;
    const FitResult f = fit(obs, opts);
    const auto best = std::max_element(rows.begin(), rows.end(),
                                       [](const SurfaceRow& a, const SurfaceRow& b) { return *a.loglik < *b.loglik; });
    const auto nearest = std::min_element(rows.begin(), rows.end(), [&](const SurfaceRow& a, const SurfaceRow& b) {
        return std::hypot(a.p - f.p_hat, a.r - f.r_hat) < std::hypot(b.p - f.p_hat, b.r - f.r_hat);
    });
    CHECK(best == nearest);

    const auto mixed = loglik_surface(obs, SurfaceGrid{0.4, 0.8, 0.4, 0.8, 2, 2});
    REQUIRE(mixed.size() == 4);
    int nulls = 0;
    for (const auto& row : mixed) {
        if (row.r <= row.p) {
            CHECK_FALSE(row.loglik.has_value());
            ++nulls;
        }
    }
    CHECK(nulls == 3);
    const std::string csv = surface_to_csv(mixed);
    CHECK(csv.rfind("p,r,loglik\n", 0) == 0);
    CHECK(csv.find("NA") != std::string::npos);
    CHECK_THROWS_AS(loglik_surface(obs, SurfaceGrid{0.4, 0.5, 0.7, 0.8, 0, 2}), Error);
}
