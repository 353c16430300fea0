#pragma once

#include <functional>
#include <vector>

#include "common.hpp"
#include "linalg.hpp"
#include "process.hpp"
#include "quadrature.hpp"
#include "theta.hpp"

namespace edpa {

// Atoms of the initial configuration xi = sum delta_{u_j}.
struct InitialMeasure {
    std::vector<double> atoms;
    double delta;

    InitialMeasure(std::vector<double> u, const ProcessParams& par)
        : atoms(std::move(u)) {
        const double L = par.L();
        if ((int)atoms.size() != par.N) throw domain_error("InitialMeasure: wrong atom count");
        for (std::size_t j = 0; j + 1 < atoms.size(); ++j)
            if (!(atoms[j] < atoms[j + 1]))
                throw domain_error("InitialMeasure: atoms must be strictly increasing");
        if (!(atoms.front() >= 0.0 && atoms.back() < L))
            throw domain_error("InitialMeasure: atoms must lie in [0, 2 pi r)");
        double s = 0.0;
        for (double v : atoms) s += v;
        Configuration cfg(atoms, par);
        if (cfg.boundary) throw domain_error("InitialMeasure: no valid center index");
        delta = cfg.delta;
    }

    bool is_equidistant(const ProcessParams& par) const {
        const double L = par.L();
        for (int j = 0; j < par.N; ++j)
            if (std::abs(atoms[j] - L * j / par.N) > 1e-12 * L) return false;
        return true;
    }

    double center() const {
        double s = delta;
        for (double v : atoms) s += v;
        return s;
    }
};

inline InitialMeasure equidistant_measure(const ProcessParams& par) {
    return InitialMeasure(equidistant_init(par).points, par);
}

struct KernelQuery {
    double s, x, t, y;
};

struct SeriesBudget {
    int n_max = 24;
    int l_max = 512;
    int k_max = 16;
    int gh_nodes = 64;
    double cut = 1e-18;
};

// ---------------------------------------------------------------------------
// Phi: the entire cardinal functions of the determinantal martingale.
// ---------------------------------------------------------------------------

inline cplx phi(const InitialMeasure& xi, int k, cplx z, const ProcessParams& par) {
    if (k < 1 || k > par.N) throw domain_error("phi: atom index out of range");
    const double L = par.L();
    ModularNome nome = ModularNome::from_tau(par.N * par.t_star / (2.0 * pi * par.r * par.r));
    double ub = xi.center();
    cplx out = theta1((ub + z - xi.atoms[k - 1]) / L, nome) /
               theta1(cplx{ub / L, 0.0}, nome);
    for (int l = 1; l <= par.N; ++l) {
        if (l == k) continue;
        out *= theta1((z - xi.atoms[l - 1]) / L, nome) /
               theta1(cplx{(xi.atoms[k - 1] - xi.atoms[l - 1]) / L, 0.0}, nome);
    }
    return out;
}

// Closed form for the equidistant measure; falls back to the product near the
// removable 0/0 points on the atom lattice.
inline cplx phi_equidistant_closed(int k, cplx z, const ProcessParams& par) {
    const double L = par.L();
    const int N = par.N;
    double tau_im = N * par.t_star / (2.0 * pi * par.r * par.r);
    ModularNome nome = ModularNome::from_tau(tau_im);
    ModularNome nomeN = ModularNome::from_tau(N * tau_im);
    cplx w = z / L - (k - 1.0) / N;
    cplx wfrac = w - std::round(w.real());
    if (std::abs(wfrac) < 1e-6) {
        InitialMeasure eta = equidistant_measure(par);
        return phi(eta, k, z, par);
    }
    return pi / (N * theta1_dv0(nomeN)) * theta1((double)N * w, nomeN) *
           theta1(w + 0.5, nome) * theta1_dv0(nome) /
           (pi * theta1(w, nome) * theta1(cplx{0.5, 0.0}, nome));
}

// ---------------------------------------------------------------------------
// mart_M: Gaussian average of Phi along the imaginary direction.
// ---------------------------------------------------------------------------

enum class MartMethod { quadrature, series };

namespace detail {

inline cplx mart_m_quadrature(const InitialMeasure& xi, int k, double t, double x,
                              const ProcessParams& par, const SeriesBudget& budget) {
    if (t == 0.0) return phi(xi, k, cplx{x, 0.0}, par);
    int nodes = budget.gh_nodes;
    cplx prev{0.0, 0.0};
    bool have_prev = false;
    for (; nodes <= 1024; nodes *= 2) {
        const auto& rule = gauss_hermite(nodes);
        cplx acc{0.0, 0.0};
        double sc = std::sqrt(2.0 * t);
        for (std::size_t i = 0; i < rule.x.size(); ++i)
            acc += rule.w[i] * phi(xi, k, cplx{x, sc * rule.x[i]}, par);
        acc /= std::sqrt(pi);
        if (have_prev && std::abs(acc - prev) <= 1e-9 * std::max(1.0, std::abs(acc))) return acc;
        prev = acc;
        have_prev = true;
    }
    return prev;
}

// Explicit series for the equidistant measure. The third (l) series is
// asymptotic for t > 0: truncate at the smallest term.
inline double mart_m_series(int k, double t, double x, const ProcessParams& par,
                            const SeriesBudget& budget) {
    const int N = par.N;
    const double r = par.r, ts = par.t_star;
    const double r2 = r * r;
    ModularNome nomeN2 = ModularNome::from_tau(N * (double)N * ts / (2.0 * pi * r2));
    double pref = 2.0 * pi / (N * theta1_dv0(nomeN2));
    double A = x / (2.0 * r) - (k - 1.0) * pi / N;
    const double lcut = std::log(budget.cut);
    double tot = 0.0;
    for (int n = 1; n <= budget.n_max; ++n) {
        double lg = -(n - 0.5) * (n - 0.5) * N * N * (ts - t) / (2.0 * r2);
        if (lg < lcut) break;
        double c = std::exp(lg);
        tot += (n % 2 == 1 ? c : -c) * std::cos((2.0 * n - 1.0) * N * A);
    }
    for (int n = 1; n <= budget.n_max; ++n) {
        double lgn = -(n - 0.5) * (n - 0.5) * N * N * ts / (2.0 * r2);
        double bound = ((2.0 * n - 1.0) * N - 2.0) / 2.0;
        if (bound < 0.0) continue;
        if (lgn + bound * bound * t / (2.0 * r2) < lcut) break;
        double cn = (n % 2 == 1 ? 1.0 : -1.0) * std::exp(lgn);
        double msum = 0.0;
        if (N % 2 == 0) {  // sigma_{N-1} integer (N-1 odd)
            msum += 1.0;
            for (long m = 1; m <= (long)std::floor(bound + 1e-12); ++m)
                msum += 2.0 * std::exp(m * m * t / (2.0 * r2)) * std::cos(2.0 * m * A);
        } else {  // half-integers
            for (double s = 0.5; s <= bound + 1e-12; s += 1.0)
                msum += 2.0 * std::exp(s * s * t / (2.0 * r2)) * std::cos(2.0 * s * A);
        }
        tot += cn * msum;
    }
    const double lbeta = -N * ts / r2;
    for (int half = 0; half < 2; ++half) {
        for (int nn = 1; nn <= budget.n_max; ++nn) {
            int n = half == 0 ? nn : 1 - nn;  // 1,2,3,... then 0,-1,-2,...
            double lgn = -(n - 0.5) * (n - 0.5) * N * N * (ts - t) / (2.0 * r2);
            double fn = (((n - 1) % 2) == 0) ? 1.0 : -1.0;
            double prev_mag = std::numeric_limits<double>::infinity();
            bool any = false;
            for (int l = 1; l <= budget.l_max; ++l) {
                double lgl = lgn + l * lbeta + l * (l + (2.0 * n - 1.0) * N) * t / (2.0 * r2);
                if (lgl > prev_mag) break;  // asymptotic tail onset
                prev_mag = lgl;
                if (lgl < lcut) { any = any || l > 1; break; }
                double coef = std::exp(lgl) / (1.0 + std::exp(l * lbeta));
                tot += 2.0 * fn * coef * std::cos(((2.0 * n - 1.0) * N + 2.0 * l) * A);
                any = true;
            }
            if (!any && nn > 2) break;
        }
    }
    return pref * tot;
}

}  // namespace detail

inline cplx mart_M(const InitialMeasure& xi, int k, double t, double x, const ProcessParams& par,
                   MartMethod method = MartMethod::series, SeriesBudget budget = {}) {
    if (!(t >= 0.0)) throw domain_error("mart_M: t must be nonnegative");
    if (t > par.t_star * (1.0 - 1e-6))
        throw domain_error("mart_M: t too close to t_star (series horizon)");
    if (method == MartMethod::series) {
        if (!xi.is_equidistant(par))
            throw domain_error("mart_M: series form requires the equidistant measure");
        if (t == 0.0) return phi(xi, k, cplx{x, 0.0}, par);
        return cplx{detail::mart_m_series(k, t, x, par, budget), 0.0};
    }
    return detail::mart_m_quadrature(xi, k, t, x, par, budget);
}

// det over j,k of mart_M(xi, k, t, w_j).
inline double det_martingale(const InitialMeasure& xi, double t, std::span<const double> w,
                             const ProcessParams& par, SeriesBudget budget = {}) {
    const int N = par.N;
    if ((int)w.size() != N) throw domain_error("det_martingale: wrong position count");
    bool eq = xi.is_equidistant(par);
    CMatrix m(N);
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
            m(j, k) = mart_M(xi, k + 1, t, w[j], par,
                             eq ? MartMethod::series : MartMethod::quadrature, budget);
    return as_real(det_lu(m, false).det, 1e-8);
}

// ---------------------------------------------------------------------------
// Correlation kernels.
// ---------------------------------------------------------------------------

enum class KernelForm { martingale_sum, series };

namespace detail {

// Explicit series (the resummed form of the finite-N kernel), complex valued.
inline cplx kernel_series(const KernelQuery& q, const ProcessParams& par,
                          const SeriesBudget& budget) {
    const int N = par.N;
    const double r = par.r, ts = par.t_star, r2 = r * r;
    const double L = par.L();
    const double s = q.s, t = q.t, x = q.x, y = q.y;
    ModularNome nomeN2 = ModularNome::from_tau(N * (double)N * ts / (2.0 * pi * r2));
    double pref = 1.0 / (theta1_dv0(nomeN2) * r);
    const double lcut = std::log(budget.cut) - 5.0;
    const double a = N * (double)N * s / (2.0 * r2);

    cplx tot{0.0, 0.0};
    // resummed theta_2 term
    {
        double tau2 = N * (double)N * (ts - (t - s)) / (2.0 * pi * r2);
        for (int k = -budget.k_max; k <= budget.k_max; ++k) {
            double im2 = k * N * (double)N * s / (2.0 * pi * r2);
            double lg = -k * k * a + pi * im2 * im2 / tau2;
            if (lg < lcut) continue;
            cplx v2{N * (y - x) / L, -im2};
            tot += 0.5 * std::exp(-k * k * a) * std::exp(cplx{0.0, k * N * x / r}) *
                   theta_eval(2, v2, tau2, 1e-15, 96);
        }
    }
    // spin-window theta_3 term
    {
        double tau3 = N * (double)N * s / (2.0 * pi * r2);
        for (int n = 1; n <= budget.n_max; ++n) {
            double lgn = -(n - 0.5) * (n - 0.5) * N * N * ts / (2.0 * r2);
            double bound = ((2.0 * n - 1.0) * N - 2.0) / 2.0;
            if (bound < 0.0) continue;
            if (lgn + bound * bound * t / (2.0 * r2) < lcut) break;
            double cn = (n % 2 == 1 ? 1.0 : -1.0) * std::exp(lgn);
            for (double sg = (N % 2 == 0) ? 0.0 : 0.5; sg <= bound + 1e-12; sg += 1.0) {
                for (int pm = 0; pm < ((sg == 0.0) ? 1 : 2); ++pm) {
                    double sgn = pm == 0 ? sg : -sg;
                    cplx v3{N * x / L, -N * sgn * s / (2.0 * pi * r2)};
                    cplx term = cn * std::exp(sgn * sgn * (t - s) / (2.0 * r2)) *
                                std::exp(cplx{0.0, sgn * (y - x) / r}) *
                                theta_eval(3, v3, tau3, 1e-15, 96);
                    tot += term;
                }
            }
        }
    }
    // asymptotic double series with the k-resummed phase
    {
        const double lbeta = -N * ts / r2;
        for (int k = -budget.k_max; k <= budget.k_max; ++k) {
            double ka = -k * k * a;
            // crude bound at l=1, n=1 including phase growth
            if (ka + std::abs((double)k) * (3.0 * N) * N * s / (2.0 * r2) + lbeta +
                    (0.5 * N + 1.0) * (0.5 * N + 1.0) * std::abs(t - s) / (2.0 * r2) <
                lcut - 20.0)
                continue;
            cplx ck = std::exp(ka) * std::exp(cplx{0.0, k * N * x / r});
            for (int half = 0; half < 2; ++half) {
                for (int nn = 1; nn <= budget.n_max; ++nn) {
                    int n = half == 0 ? nn : 1 - nn;
                    double lgn = -(n - 0.5) * (n - 0.5) * N * N * ts / (2.0 * r2);
                    double fn = (((n - 1) % 2) == 0) ? 1.0 : -1.0;
                    double prev_mag = std::numeric_limits<double>::infinity();
                    bool any = false;
                    for (int l = 1; l <= budget.l_max; ++l) {
                        double grow = ((n - 0.5) * N + l) * ((n - 0.5) * N + l) * (t - s) /
                                      (2.0 * r2);
                        double phase_grow =
                            std::abs(((2.0 * n - 1.0) * N + 2.0 * l) * k) * N * s / (2.0 * r2);
                        double lgl = ka + lgn + l * lbeta + grow + phase_grow;
                        if (lgl > prev_mag) break;
                        prev_mag = lgl;
                        if (lgl < lcut) { any = any || l > 1; break; }
                        double coef = std::exp(lgn + l * lbeta + grow) /
                                      (1.0 + std::exp(l * lbeta));
                        cplx carg = ((2.0 * n - 1.0) * N + 2.0 * l) * pi *
                                    cplx{(y - x) / L, -k * N * s / (2.0 * pi * r2)};
                        tot += 2.0 * fn * coef * ck * std::cos(carg);
                        any = true;
                    }
                    if (!any && nn > 2) break;
                }
            }
        }
    }
    return pref * tot;
}

}  // namespace detail

// Finite-N inhomogeneous kernel for the equidistant start.
inline cplx kernel_K(const KernelQuery& q, const ProcessParams& par,
                     KernelForm form = KernelForm::series, SeriesBudget budget = {}) {
    if (!(q.s > 0.0 && q.t > 0.0 && q.s < par.t_star && q.t < par.t_star))
        throw domain_error("kernel_K: times must lie in (0, t_star)");
    cplx g;
    if (form == KernelForm::martingale_sum) {
        InitialMeasure eta = equidistant_measure(par);
        g = cplx{0.0, 0.0};
        for (int k = 1; k <= par.N; ++k)
            g += wrapped_kernel(par.N, par.r, q.s, eta.atoms[k - 1], q.x) *
                 mart_M(eta, k, q.t, q.y, par, MartMethod::series, budget);
    } else {
        g = detail::kernel_series(q, par, budget);
    }
    if (q.s > q.t) g -= wrapped_kernel(par.N, par.r, q.s - q.t, q.y, q.x);
    return g;
}

// Temporally homogeneous kernel. `full` keeps the whole resummed k-sum of
// the t_* -> infinity limit; `principal` keeps the k=0 cosine term only,
// which is the spatial-gauge the equilibrium kernel lives in. The k != 0
// terms carry the center-of-mass confinement and never decay under time
// shifts, so relaxation comparisons use `principal`.
enum class HomogeneousModes { full, principal };

inline cplx kernel_K_homogeneous(const KernelQuery& q, int N, double r,
                                 HomogeneousModes modes = HomogeneousModes::principal) {
    if (!(q.s > 0.0 && q.t > 0.0)) throw domain_error("kernel_K_homogeneous: times must be positive");
    const double L = 2.0 * pi * r, r2 = r * r;
    const double s = q.s, t = q.t, x = q.x, y = q.y;
    cplx tot{0.0, 0.0};
    int kmax = (modes == HomogeneousModes::principal) ? 0 : 16;
    for (int k = -kmax; k <= kmax; ++k) {
        double lg = (-k * k + std::abs((double)k)) * N * (double)N * s / (2.0 * r2) +
                    N * (double)N * (t - s) / (8.0 * r2);
        if (lg < -46.0) continue;
        cplx carg = (y - x) - cplx{0.0, 1.0} * (k * N * s / r);
        tot += std::exp(-k * k * N * (double)N * s / (2.0 * r2)) *
               std::exp(cplx{0.0, k * N * x / r}) *
               std::exp(N * (double)N * (t - s) / (8.0 * r2)) *
               std::cos((double)N * carg / (2.0 * r)) / L;
    }
    double tau3 = N * (double)N * s / (2.0 * pi * r2);
    double bound = (N - 2.0) / 2.0;
    for (double sg = (N % 2 == 0) ? 0.0 : 0.5; sg <= bound + 1e-12; sg += 1.0) {
        for (int pm = 0; pm < ((sg == 0.0) ? 1 : 2); ++pm) {
            double sgn = pm == 0 ? sg : -sg;
            cplx v3{N * x / L, -N * sgn * s / (2.0 * pi * r2)};
            tot += std::exp(sgn * sgn * (t - s) / (2.0 * r2)) *
                   std::exp(cplx{0.0, sgn * (y - x) / r}) *
                   detail::theta_eval(3, v3, tau3, 1e-15, 96) / L;
        }
    }
    if (s > t) tot -= wrapped_kernel(N, r, s - t, y, x);
    return tot;
}

namespace detail {

inline cplx keq_series_lt(double dt, double dx, int N, double r) {
    const double L = 2.0 * pi * r, r2 = r * r;
    cplx tot{0.0, 0.0};
    double bound = (N - 2.0) / 2.0;
    for (double sg = (N % 2 == 0) ? 0.0 : 0.5; sg <= bound + 1e-12; sg += 1.0)
        for (int pm = 0; pm < ((sg == 0.0) ? 1 : 2); ++pm) {
            double sgn = pm == 0 ? sg : -sg;
            tot += std::exp(sgn * sgn * dt / (2.0 * r2)) * std::exp(cplx{0.0, sgn * dx / r}) / L;
        }
    return tot + std::exp(N * (double)N * dt / (8.0 * r2)) * std::cos(N * dx / (2.0 * r)) / L;
}

inline cplx keq_series_gt(double dt, double dx, int N, double r) {
    const double L = 2.0 * pi * r, r2 = r * r;
    cplx tot{0.0, 0.0};
    double bound = (N - 2.0) / 2.0;
    double start = (N % 2 == 0) ? std::floor(bound) + 1.0 : std::floor(bound + 0.5) + 0.5;
    for (double sg = start; sg < start + 2000000.0; sg += 1.0) {
        double damp = std::exp(sg * sg * dt / (2.0 * r2));
        if (damp < 1e-20) break;
        for (int pm = 0; pm < 2; ++pm) {
            double sgn = pm == 0 ? sg : -sg;
            tot -= damp * std::exp(cplx{0.0, sgn * dx / r}) / L;
        }
    }
    return tot + std::exp(N * (double)N * dt / (8.0 * r2)) * std::cos(N * dx / (2.0 * r)) / L;
}

}  // namespace detail

// Space-time homogeneous equilibrium kernel (three branches).
inline cplx kernel_K_equilibrium(double dt, double dx, int N, double r) {
    const double L = 2.0 * pi * r;
    if (dt > 0.0) return detail::keq_series_lt(dt, dx, N, r);
    if (dt < 0.0) return detail::keq_series_gt(dt, dx, N, r);
    double m = std::round(dx / L);
    double u = dx - m * L;
    if (std::abs(u) < 1e-14 * L) return cplx{N / L, 0.0};
    return cplx{std::sin((N - 1.0) * dx / (2.0 * r)) / std::sin(dx / (2.0 * r)) / L +
                    std::cos(N * dx / (2.0 * r)) / L,
                0.0};
}

// Extended sine kernel with density rho.
inline double extended_sine(double dt, double dx, double rho) {
    if (!(rho > 0.0)) throw domain_error("extended_sine: rho must be positive");
    if (dt == 0.0) {
        if (dx == 0.0) return rho;
        return std::sin(pi * rho * dx) / (pi * dx);
    }
    if (dt > 0.0) {
        auto f = [&](double v) { return std::exp(pi * pi * v * v * dt / 2.0) * std::cos(pi * v * dx); };
        return integrate_adaptive(f, 0.0, rho, 1e-12);
    }
    double vmax = rho + std::sqrt(2.0 * 46.0 / (pi * pi * (-dt)));
    auto f = [&](double v) { return std::exp(pi * pi * v * v * dt / 2.0) * std::cos(pi * v * dx); };
    return -integrate_adaptive(f, rho, vmax, 1e-12);
}

// Infinite-particle kernel at fixed density rho. t_star <= 0 selects the
// temporally homogeneous (t_star = infinity) kernel.
inline cplx kernel_K_infinite(const KernelQuery& q, double rho, double t_star = -1.0,
                              SeriesBudget budget = {}) {
    if (!(rho > 0.0)) throw domain_error("kernel_K_infinite: rho must be positive");
    if (!(q.s > 0.0 && q.t > 0.0)) throw domain_error("kernel_K_infinite: times must be positive");
    const double s = q.s, t = q.t, x = q.x, y = q.y;
    const double tau3 = 2.0 * pi * rho * rho * s;
    auto integrand1 = [&](double v) {
        return std::exp(pi * pi * v * v * (t - s) / 2.0) *
               std::exp(cplx{0.0, pi * v * (y - x)}) *
               detail::theta_eval(3, cplx{rho * x, -pi * v * rho * s}, tau3, 1e-15, 96);
    };
    if (t_star <= 0.0) {
        cplx tot = 0.5 * integrate_adaptive(integrand1, -rho, rho, 1e-12);
        if (s > t) tot -= p_bm(s - t, x - y);
        return tot;
    }

    if (t > t_star * (1.0 - 1e-6))
        throw domain_error("kernel_K_infinite: t too close to t_star");
    ModularNome nome_star = ModularNome::from_tau(2.0 * pi * rho * rho * t_star);
    double pref = 2.0 * pi / theta1_dv0(nome_star);
    const double lcut = std::log(budget.cut);
    cplx tot{0.0, 0.0};
    bool converged = false;
    for (int n = 1; n <= budget.n_max; ++n) {
        double lgn = -2.0 * pi * pi * (n - 0.5) * (n - 0.5) * rho * rho * t_star;
        double vtop = (2.0 * n - 1.0) * rho;
        if (lgn + pi * pi * vtop * vtop * t / 2.0 < lcut) {
            converged = true;
            break;
        }
        double cn = (n % 2 == 1 ? 1.0 : -1.0) * std::exp(lgn);
        tot += 0.5 * cn * integrate_adaptive(integrand1, -vtop, vtop, 1e-13);
    }
    if (!converged)
        throw accuracy_error("kernel_K_infinite: n budget exhausted before the cut",
                             std::exp(-2.0 * pi * pi * (budget.n_max - 0.5) *
                                      (budget.n_max - 0.5) * rho * rho * t_star));
    // Fermi-weighted oscillator tail; the v-integrand is asymptotic for
    // t > s, so the range stops at the bound's minimum.
    for (int k = -budget.k_max; k <= budget.k_max; ++k) {
        double lgk = -2.0 * pi * pi * k * k * rho * rho * s;
        cplx ck = std::exp(lgk) * std::exp(cplx{0.0, 2.0 * pi * k * rho * x});
        bool k_used = false;
        for (int half = 0; half < 2; ++half) {
            for (int nn = 1; nn <= budget.n_max; ++nn) {
                int n = half == 0 ? nn : 1 - nn;
                double lgn = -2.0 * pi * pi * (n - 0.5) * (n - 0.5) * rho * rho * t_star;
                double cn = ((((n - 1) % 2) == 0) ? 1.0 : -1.0) * std::exp(lgn);
                auto log_bound = [&](double v) {
                    double u = (2.0 * n - 1.0) * rho + v;
                    return lgk + lgn - 2.0 * pi * pi * v * rho * t_star +
                           pi * pi * u * u * (t - s) / 2.0 +
                           std::abs(2.0 * pi * pi * u * k * rho * s);
                };
                double vend = 0.0, prev = log_bound(0.0), step = 0.25;
                if (prev < lcut) {
                    if (nn > 2) break;
                    continue;
                }
                for (double v = step; v < 500.0; v += step) {
                    double lg = log_bound(v);
                    if (lg > prev || lg < lcut) { vend = v; break; }
                    prev = lg;
                    vend = v;
                }
                auto f2 = [&](double v) {
                    double u = (2.0 * n - 1.0) * rho + v;
                    double w = std::exp(-2.0 * pi * pi * v * rho * t_star);
                    cplx carg = u * pi * cplx{y - x, -2.0 * pi * k * rho * s};
                    return w / (1.0 + w) * std::exp(pi * pi * u * u * (t - s) / 2.0) *
                           std::cos(carg);
                };
                tot += cn * ck * integrate_adaptive(f2, 0.0, vend, 1e-13);
                k_used = true;
            }
        }
        if (!k_used && k > 2) break;
    }
    tot *= pref;
    if (s > t) tot -= p_bm(s - t, x - y);
    return tot;
}

// ---------------------------------------------------------------------------
// Correlation functions as finite determinants.
// ---------------------------------------------------------------------------

enum class KernelChoice { finite, homogeneous, equilibrium, infinite };

struct SpacetimePointQ {
    double t, x;
};

inline double correlation_rho(const std::vector<SpacetimePointQ>& pts, const ProcessParams& par,
                              KernelChoice choice, double rho_density = 1.0,
                              SeriesBudget budget = {}) {
    const int n = (int)pts.size();
    if (n < 1 || n > 6) throw budget_error("correlation_rho: supports 1..6 points");
    CMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            KernelQuery q{pts[i].t, pts[i].x, pts[j].t, pts[j].x};
            switch (choice) {
                case KernelChoice::finite:
                    m(i, j) = kernel_K(q, par, KernelForm::series, budget);
                    break;
                case KernelChoice::homogeneous:
                    m(i, j) = kernel_K_homogeneous(q, par.N, par.r, HomogeneousModes::full);
                    break;
                case KernelChoice::equilibrium:
                    m(i, j) = kernel_K_equilibrium(pts[j].t - pts[i].t, pts[j].x - pts[i].x,
                                                   par.N, par.r);
                    break;
                case KernelChoice::infinite:
                    m(i, j) = kernel_K_infinite(q, rho_density);
                    break;
            }
        }
    cplx det = det_lu(m, false).det;
    if (std::abs(det.imag()) > 1e-8 * std::max(1.0, std::abs(det)))
        throw accuracy_error("correlation_rho: determinant has imaginary residue",
                             std::abs(det.imag()));
    return det.real();
}

}  // namespace edpa
