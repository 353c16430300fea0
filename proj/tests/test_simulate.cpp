#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>

#include "edpa/simulate.hpp"

using namespace edpa;
using Catch::Approx;

TEST_CASE("equidistant state is a drift fixed point") {
    for (int N : {3, 4}) {
        ModelParams mp{ProcessParams{N, 1.0, 4.0}};
        auto init = equidistant_init(mp.process);
        std::vector<double> drift;
        model_drift(Model::elliptic, mp, 0.3, init.points, init.delta, drift);
        double norm = 0.0;
        for (double d : drift) norm += d * d;
        CHECK(std::sqrt(norm) < 1e-12);
        model_drift(Model::trig, mp, 0.3, init.points, init.delta, drift);
        norm = 0.0;
        for (double d : drift) norm += d * d;
        CHECK(std::sqrt(norm) < 1e-12);
    }
}

TEST_CASE("ordering and center preserved along a path") {
    ModelParams mp{ProcessParams{3, 1.0, 4.0}};
    auto init = equidistant_init(mp.process);
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.seed = 99;
    PathState st;
    st.x = init.points;
    st.delta = init.delta;
    auto rng = detail::path_rng(cfg.seed, 0);
    const double L = mp.process.L();
    for (int i = 0; i < 1000; ++i) {
        step(Model::elliptic, st, cfg, mp, rng);
        REQUIRE(!st.failed);
        REQUIRE(st.x[0] < st.x[1]);
        REQUIRE(st.x[1] < st.x[2]);
        REQUIRE(st.x[2] < st.x[0] + L);
        double c = st.delta + st.x[0] + st.x[1] + st.x[2];
        REQUIRE(c > 0.0);
        REQUIRE(c < L);
    }
    CHECK(st.t == Approx(0.1).epsilon(1e-9));
}

TEST_CASE("center increment matches the summed SDE") {
    // sum of per-particle drifts = N A(center): pairwise terms cancel exactly
    ModelParams mp{ProcessParams{3, 1.0, 4.0}};
    std::vector<double> x{0.4, 2.1, 4.8};
    Configuration cfg(x, mp.process);
    std::vector<double> drift;
    model_drift(Model::elliptic, mp, 0.7, x, cfg.delta, drift);
    double sum_drift = drift[0] + drift[1] + drift[2];
    DriftParams dp(3, mp.process.L(), mp.process.t_star - 0.7);
    double center = cfg.delta + x[0] + x[1] + x[2];
    CHECK(std::abs(sum_drift - 3.0 * drift_A(dp, center)) < 1e-12);
}

TEST_CASE("ensemble determinism and thread independence") {
    ModelParams mp{ProcessParams{3, 1.0, 4.0}};
    auto init = equidistant_init(mp.process);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.paths = 200;
    cfg.seed = 7;
    setenv("EDPA_THREADS", "1", 1);
    auto a = run_ensemble(Model::elliptic, init, cfg, mp, 0.2, 16);
    setenv("EDPA_THREADS", "8", 1);
    auto b = run_ensemble(Model::elliptic, init, cfg, mp, 0.2, 16);
    unsetenv("EDPA_THREADS");
    REQUIRE(a.counts.size() == b.counts.size());
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
        CHECK(a.counts[i] == b.counts[i]);
        CHECK(a.density[i] == b.density[i]);
    }
    auto c = run_ensemble(Model::elliptic, init, cfg, mp, 0.2, 16);
    for (std::size_t i = 0; i < a.counts.size(); ++i) CHECK(a.counts[i] == c.counts[i]);
}

TEST_CASE("weak self-consistency under dt halving") {
    ModelParams mp{ProcessParams{3, 1.0, 4.0}};
    auto init = equidistant_init(mp.process);
    SimConfig cfg;
    cfg.paths = 3000;
    cfg.seed = 21;
    cfg.dt = 1e-3;
    auto coarse = run_ensemble(Model::elliptic, init, cfg, mp, 0.5, 16);
    cfg.dt = 1e-4;
    cfg.seed = 22;
    auto fine = run_ensemble(Model::elliptic, init, cfg, mp, 0.5, 16);
    for (int b = 0; b < 16; ++b) {
        double se = std::hypot(coarse.stderr_density[b], fine.stderr_density[b]);
        CHECK(std::abs(coarse.density[b] - fine.density[b]) < 4.0 * se + 1e-12);
    }
}

TEST_CASE("dmr estimator basics") {
    ProcessParams par{3, 1.0, 4.0};
    SimConfig cfg;
    cfg.paths = 4000;
    cfg.seed = 31;
    // F == 1: the determinantal martingale has expectation 1
    auto one = dmr_estimate(DmrObservable::one, 0.4, cfg, par);
    CHECK(std::abs(one.estimate - 1.0) < 4.0 * one.stderr_estimate);
    // the weight itself is a martingale: different horizons stay near 1
    for (double T : {0.1 * par.t_star, 0.2 * par.t_star, 0.4 * par.t_star}) {
        auto est = dmr_estimate(DmrObservable::one, T, cfg, par);
        CHECK(std::abs(est.estimate - 1.0) < 4.0 * est.stderr_estimate);
    }
}

TEST_CASE("dmr with N=2 winding signs") {
    // N even exercises the plain wrapped propagator path end to end
    ProcessParams par{2, 1.0, 4.0};
    SimConfig cfg;
    cfg.paths = 4000;
    cfg.seed = 37;
    auto one = dmr_estimate(DmrObservable::one, 0.5, cfg, par);
    CHECK(std::abs(one.estimate - 1.0) < 4.0 * one.stderr_estimate);
}

TEST_CASE("dmr pattern observable against direct simulation") {
    // two independent estimators of the same relabeling-invariant indicator
    ProcessParams par{3, 1.0, 4.0};
    const double L = par.L(), T = 0.4;
    SimConfig cfg;
    cfg.paths = 6000;
    cfg.seed = 41;
    auto dmr = dmr_estimate(DmrObservable::pattern, T, cfg, par);
    ModelParams mp{par};
    auto init = equidistant_init(par);
    const int paths = 6000;
    std::vector<double> vals(paths);
    detail::parallel_for((std::size_t)paths, [&](std::size_t p) {
        auto rng = detail::path_rng(42, p);
        PathState st;
        st.x = init.points;
        st.delta = init.delta;
        SimConfig c;
        c.dt = 1e-3;
        long nsteps = (long)std::llround(T / c.dt);
        for (long i = 0; i < nsteps && !st.failed; ++i) step(Model::elliptic, st, c, mp, rng);
        std::vector<double> w(st.x.size());
        for (std::size_t j = 0; j < w.size(); ++j) {
            w[j] = std::fmod(st.x[j], L);
            if (w[j] < 0.0) w[j] += L;
        }
        vals[p] = dmr_observable(DmrObservable::pattern, w, L);
    });
    double mean = 0.0, var = 0.0;
    for (double v : vals) mean += v;
    mean /= paths;
    for (double v : vals) var += (v - mean) * (v - mean);
    double se = std::sqrt(var / paths / paths);
    double joint = std::hypot(se, dmr.stderr_estimate);
    CHECK(std::abs(dmr.estimate - mean) < 4.0 * joint);
}

TEST_CASE("cot model long-run profile follows the ground state") {
    // stationary density of the h-transformed absorbing BM is proportional
    // to sin^2(x/2r); statistical and flagged experimental
    double r = 1.0, L = 2.0 * pi;
    SimConfig cfg;
    cfg.dt = 1e-3;
    const int paths = 4000, bins = 16;
    std::vector<int> hit(paths);
    detail::parallel_for((std::size_t)paths, [&](std::size_t p) {
        auto rng = detail::path_rng(51, p);
        auto path = simulate_single(SingleModel::cot, r, 0.0, 2.0, cfg, 8.0, rng);
        hit[p] = std::min((int)(path.back() / L * bins), bins - 1);
    });
    std::vector<double> count(bins, 0.0);
    for (int b : hit) count[b] += 1.0;
    double wbin = L / bins;
    for (int b = 0; b < bins; ++b) {
        double xm = (b + 0.5) * wbin;
        double target = std::sin(xm / (2.0 * r));
        double mu = target * target / (pi * r) * wbin * paths;  // normalized sin^2 profile
        double se = std::sqrt(std::max(mu, 1.0));
        CHECK(std::abs(count[b] - mu) < 4.0 * se);
    }
}

TEST_CASE("single-particle models") {
    SimConfig cfg;
    cfg.dt = 1e-3;
    auto rng = detail::path_rng(5, 0);
    // bes3 stays positive over a long run
    auto path = simulate_single(SingleModel::bes3, 1.0, 0.0, 1.0, cfg, 100.0, rng);
    CHECK(path.back() > 0.0);
    // ebes stays inside the arc
    auto rng2 = detail::path_rng(6, 0);
    auto p2 = simulate_single(SingleModel::ebes, 1.0, 4.0, 2.0, cfg, 3.0, rng2);
    CHECK(p2.back() > 0.0);
    CHECK(p2.back() < 2.0 * pi);
    CHECK_THROWS_AS(simulate_single(SingleModel::ebes, 1.0, 4.0, -1.0, cfg, 1.0, rng),
                    domain_error);
}

TEST_CASE("validation") {
    SimConfig bad;
    bad.dt = -1.0;
    CHECK_THROWS_AS(bad.validate(), domain_error);
    ModelParams mp{ProcessParams{3, 1.0, 4.0}};
    auto init = equidistant_init(mp.process);
    SimConfig cfg;
    CHECK_THROWS_AS(run_ensemble(Model::elliptic, init, cfg, mp, 5.0), domain_error);
}
