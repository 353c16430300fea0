#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "common.hpp"
#include "drift.hpp"
#include "martingale.hpp"
#include "process.hpp"

namespace edpa {

struct SimConfig {
    double dt = 1e-3;
    double guard_frac = 0.05;
    int max_halvings = 20;
    std::uint64_t seed = 1;
    int paths = 1;

    void validate() const {
        if (!(dt > 0.0)) throw domain_error("SimConfig: dt must be positive");
        if (!(guard_frac > 0.0 && guard_frac < 0.5))
            throw domain_error("SimConfig: guard_frac must lie in (0, 0.5)");
        if (paths < 1) throw domain_error("SimConfig: paths must be >= 1");
    }
};

enum class Model { elliptic, trig, hyper, dyson };

struct PathState {
    std::vector<double> x;  // unwrapped, ordered
    double delta = 0.0;
    double t = 0.0;
    long halvings = 0;   // cumulative, diagnostic
    bool failed = false;
    double fail_time = 0.0;
    double fail_gap = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(path + 0x51ed2701a4c3e6f7ull)));
}

inline int worker_count() {
    if (const char* env = std::getenv("EDPA_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : (int)hw;
}

// Fan out [0, n) deterministically; results must be written per index.
template <typename F>
inline void parallel_for(std::size_t n, F&& body) {
    int workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

struct ModelParams {
    ProcessParams process;
    double hyper_a = 1.0;  // hyperbolic scale parameter
};

// Full drift vector of the chosen particle system at state x, time t.
inline void model_drift(Model model, const ModelParams& mp, double t,
                        const std::vector<double>& x, double delta, std::vector<double>& out) {
    const int N = (int)x.size();
    const auto& par = mp.process;
    out.assign(N, 0.0);
    double center = delta;
    for (double v : x) center += v;
    switch (model) {
        case Model::elliptic: {
            DriftParams dp(N, par.L(), par.t_star - t);
            double cdrift = drift_A(dp, center);
            for (int j = 0; j < N; ++j) {
                double s = 0.0;
                for (int k = 0; k < N; ++k)
                    if (k != j) s += drift_A(dp, x[j] - x[k]);
                out[j] = s + cdrift;
            }
            break;
        }
        case Model::trig: {
            double cdrift = drift_trig(par.r, center);
            for (int j = 0; j < N; ++j) {
                double s = 0.0;
                for (int k = 0; k < N; ++k)
                    if (k != j) s += drift_trig(par.r, x[j] - x[k]);
                out[j] = s + cdrift;
            }
            break;
        }
        case Model::hyper: {
            double cdrift = drift_hyper(N, mp.hyper_a, center);
            for (int j = 0; j < N; ++j) {
                double s = 0.0;
                for (int k = 0; k < N; ++k)
                    if (k != j) s += drift_hyper(N, mp.hyper_a, x[j] - x[k]);
                out[j] = s + cdrift;
            }
            break;
        }
        case Model::dyson: {
            for (int j = 0; j < N; ++j) {
                double s = 0.0;
                for (int k = 0; k < N; ++k)
                    if (k != j) s += drift_rational(x[j] - x[k]);
                out[j] = s;
            }
            break;
        }
    }
}

namespace detail {

inline bool proposal_ok(Model model, const ModelParams& mp, const SimConfig& cfg,
                        const std::vector<double>& x, double delta, double* min_gap_out) {
    const int N = (int)x.size();
    const double L = mp.process.L();
    double min_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j + 1 < N; ++j) min_gap = std::min(min_gap, x[j + 1] - x[j]);
    bool circle = (model == Model::elliptic || model == Model::trig);
    if (circle && N > 1) min_gap = std::min(min_gap, x[0] + L - x[N - 1]);
    if (min_gap_out) *min_gap_out = min_gap;
    double guard = circle ? cfg.guard_frac * L / N
                          : cfg.guard_frac * (N > 1 ? (x[N - 1] - x[0]) / N : 1.0);
    if (!(min_gap > guard)) return false;
    if (circle) {
        double c = delta;
        for (double v : x) c += v;
        if (!(c > 0.0 && c < L)) return false;
    } else if (model == Model::hyper) {
        double c = delta;
        for (double v : x) c += v;
        if (!(c > 0.0)) return false;
    }
    return true;
}

}  // namespace detail

// One Euler-Maruyama step of size cfg.dt with fresh-noise halving on
// constraint violations.
inline void step(Model model, PathState& st, const SimConfig& cfg, const ModelParams& mp,
                 std::mt19937_64& rng) {
    if (model == Model::elliptic && !(st.t + cfg.dt < mp.process.t_star))
        throw domain_error("step: elliptic model needs t + dt < t_star");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int N = (int)st.x.size();
    std::vector<double> drift, prop(N), noise(N);
    double remaining = cfg.dt;
    double h = cfg.dt;
    while (remaining > 1e-18 * cfg.dt) {
        h = std::min(h, remaining);
        model_drift(model, mp, st.t, st.x, st.delta, drift);
        int tries = 0;
        for (;;) {
            double sh = std::sqrt(h);
            for (int j = 0; j < N; ++j) noise[j] = sh * gauss(rng);
            for (int j = 0; j < N; ++j) prop[j] = st.x[j] + drift[j] * h + noise[j];
            double gap = 0.0;
            if (detail::proposal_ok(model, mp, cfg, prop, st.delta, &gap)) break;
            st.halvings++;
            if (++tries > cfg.max_halvings) {
                st.failed = true;
                st.fail_time = st.t;
                st.fail_gap = gap;
                return;
            }
            h *= 0.5;
        }
        st.x = prop;
        st.t += h;
        remaining -= h;
        h = std::min(h * 2.0, cfg.dt);
    }
}

struct EnsembleStats {
    std::vector<double> bin_left, bin_right;
    std::vector<long> counts;
    std::vector<double> density, stderr_density;
    int paths = 0;
    long failures = 0;
};

// Independent paths, per-path RNG streams, deterministic merge in path order.
inline EnsembleStats run_ensemble(Model model, const Configuration& init, const SimConfig& cfg,
                                  const ModelParams& mp, double t_end, int bins = 32) {
    cfg.validate();
    if (model == Model::elliptic && !(t_end < mp.process.t_star))
        throw domain_error("run_ensemble: t_end must be below t_star");
    const double L = mp.process.L();
    const int N = mp.process.N;
    std::vector<std::vector<int>> hits(cfg.paths);
    std::vector<char> failed(cfg.paths, 0);
    detail::parallel_for((std::size_t)cfg.paths, [&](std::size_t p) {
        auto rng = detail::path_rng(cfg.seed, p);
        PathState st;
        st.x = init.points;
        st.delta = init.delta;
        long nsteps = (long)std::ceil(t_end / cfg.dt - 1e-12);
        for (long i = 0; i < nsteps && !st.failed; ++i) {
            SimConfig c = cfg;
            c.dt = std::min(cfg.dt, t_end - st.t);
            if (c.dt <= 0.0) break;
            step(model, st, c, mp, rng);
        }
        if (st.failed) {
            failed[p] = 1;
            return;
        }
        auto& h = hits[p];
        h.reserve(N);
        for (double v : st.x) {
            double w = std::fmod(v, L);
            if (w < 0.0) w += L;
            int b = std::min((int)(w / L * bins), bins - 1);
            h.push_back(b);
        }
    });
    EnsembleStats out;
    out.paths = cfg.paths;
    out.bin_left.resize(bins);
    out.bin_right.resize(bins);
    out.counts.assign(bins, 0);
    std::vector<double> sum(bins, 0.0), sumsq(bins, 0.0);
    for (int b = 0; b < bins; ++b) {
        out.bin_left[b] = L * b / bins;
        out.bin_right[b] = L * (b + 1) / bins;
    }
    std::vector<int> cb(bins);
    for (int p = 0; p < cfg.paths; ++p) {
        if (failed[p]) {
            out.failures++;
            continue;
        }
        std::fill(cb.begin(), cb.end(), 0);
        for (int b : hits[p]) cb[b]++;
        for (int b = 0; b < bins; ++b) {
            out.counts[b] += cb[b];
            sum[b] += cb[b];
            sumsq[b] += (double)cb[b] * cb[b];
        }
    }
    long good = cfg.paths - out.failures;
    if (out.failures > 0 && out.failures * 1000 > cfg.paths)
        throw accuracy_error("run_ensemble: more than 0.1% of paths failed", (double)out.failures);
    double w = L / bins;
    out.density.resize(bins);
    out.stderr_density.resize(bins);
    for (int b = 0; b < bins; ++b) {
        double mean = sum[b] / good;
        double var = std::max(0.0, sumsq[b] / good - mean * mean);
        out.density[b] = mean / w;
        out.stderr_density[b] = std::sqrt(var / good) / w;
    }
    return out;
}

struct DmrResult {
    double estimate = 0.0;
    double stderr_estimate = 0.0;
    int paths = 0;
    bool variance_warning = false;
};

enum class DmrObservable { one, bump, pattern };

// Built-in symmetric periodic observables of the wrapped configuration.
inline double dmr_observable(DmrObservable obs, const std::vector<double>& wrapped, double L) {
    switch (obs) {
        case DmrObservable::one:
            return 1.0;
        case DmrObservable::bump: {
            // sum of a smooth bump centred at L/2
            double s = 0.0;
            for (double v : wrapped) {
                double u = (v - 0.5 * L) / (0.15 * L);
                s += std::exp(-u * u);
            }
            return s;
        }
        case DmrObservable::pattern: {
            // indicator: all particles inside one half-circle
            std::vector<double> srt = wrapped;
            std::sort(srt.begin(), srt.end());
            int n = (int)srt.size();
            double max_gap = srt.front() + L - srt.back();
            for (int j = 0; j + 1 < n; ++j) max_gap = std::max(max_gap, srt[j + 1] - srt[j]);
            return max_gap >= 0.5 * L ? 1.0 : 0.0;
        }
    }
    return 0.0;
}

// DMR estimator: independent wrapped Brownian particles weighted by the
// determinantal martingale (winding signs carry the N-odd signed kernel).
inline DmrResult dmr_estimate(const std::function<double(const std::vector<double>&)>& F,
                              double T, const SimConfig& cfg, const ProcessParams& par,
                              SeriesBudget budget = {}) {
    cfg.validate();
    if (!(T > 0.0 && T < par.t_star)) throw domain_error("dmr_estimate: need 0 < T < t_star");
    const int N = par.N;
    const double L = par.L();
    InitialMeasure eta = equidistant_measure(par);
    std::vector<double> fw(cfg.paths, 0.0);
    detail::parallel_for((std::size_t)cfg.paths, [&](std::size_t p) {
        auto rng = detail::path_rng(cfg.seed, p);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> wpos(N);
        double sign = 1.0;
        for (int j = 0; j < N; ++j) {
            double unwrapped = eta.atoms[j] + std::sqrt(T) * gauss(rng);
            double wrapped = std::fmod(unwrapped, L);
            if (wrapped < 0.0) wrapped += L;
            long winding = std::lround((unwrapped - wrapped) / L);
            if (N % 2 == 1 && (winding % 2 != 0)) sign = -sign;
            wpos[j] = wrapped;
        }
        double D = det_martingale(eta, T, wpos, par, budget);
        fw[p] = F(wpos) * sign * D;
    });
    DmrResult out;
    out.paths = cfg.paths;
    double s = 0.0, s2 = 0.0;
    for (double v : fw) {
        s += v;
        s2 += v * v;
    }
    out.estimate = s / cfg.paths;
    double var = std::max(0.0, s2 / cfg.paths - out.estimate * out.estimate);
    out.stderr_estimate = std::sqrt(var / cfg.paths);
    out.variance_warning = out.stderr_estimate > std::abs(out.estimate) && std::abs(out.estimate) > 1e-12;
    return out;
}

inline DmrResult dmr_estimate(DmrObservable obs, double T, const SimConfig& cfg,
                              const ProcessParams& par, SeriesBudget budget = {}) {
    const double L = par.L();
    return dmr_estimate([obs, L](const std::vector<double>& w) { return dmr_observable(obs, w, L); },
                        T, cfg, par, budget);
}

enum class SingleModel { ebes, cot, bes3 };

// One-particle Euler-Maruyama with the same halving guard.
inline std::vector<double> simulate_single(SingleModel model, double r, double t_star, double x0,
                                           const SimConfig& cfg, double t_end,
                                           std::mt19937_64& rng, int record_every = 0) {
    const double L = 2.0 * pi * r;
    if ((model == SingleModel::ebes || model == SingleModel::cot) && !(x0 > 0.0 && x0 < L))
        throw domain_error("simulate_single: x0 must lie in (0, 2 pi r)");
    if (model == SingleModel::bes3 && !(x0 > 0.0))
        throw domain_error("simulate_single: x0 must be positive");
    if (model == SingleModel::ebes && !(t_end < t_star))
        throw domain_error("simulate_single: t_end must be below t_star");
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto drift = [&](double t, double x) {
        switch (model) {
            case SingleModel::ebes: {
                DriftParams dp(1, L, t_star - t);
                return drift_A(dp, x);
            }
            case SingleModel::cot:
                return drift_trig(r, x);
            default:
                return drift_rational(x);
        }
    };
    auto ok = [&](double x) {
        if (model == SingleModel::bes3) return x > 0.0;
        double guard = cfg.guard_frac * L * 1e-6;
        return x > guard && x < L - guard;
    };
    std::vector<double> path;
    double x = x0, t = 0.0;
    long nsteps = (long)std::ceil(t_end / cfg.dt - 1e-12);
    for (long i = 0; i < nsteps; ++i) {
        double remaining = std::min(cfg.dt, t_end - t);
        double h = remaining;
        while (remaining > 1e-18 * cfg.dt) {
            h = std::min(h, remaining);
            double d = drift(t, x);
            int tries = 0;
            double prop;
            for (;;) {
                prop = x + d * h + std::sqrt(h) * gauss(rng);
                if (ok(prop)) break;
                if (++tries > cfg.max_halvings)
                    throw accuracy_error("simulate_single: halvings exhausted", h);
                h *= 0.5;
            }
            x = prop;
            t += h;
            remaining -= h;
            h = std::min(h * 2.0, cfg.dt);
        }
        if (record_every > 0 && (i % record_every == 0)) path.push_back(x);
    }
    path.push_back(x);
    return path;
}

}  // namespace edpa
