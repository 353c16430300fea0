#pragma once

#include <cmath>

#include "common.hpp"
#include "theta.hpp"
#include "weierstrass.hpp"

namespace edpa {

// A_N^alpha(t_*-t, x): the interaction drift. Prefactor is 1/alpha so that
// the three representations coincide and x*A -> 1 as x -> 0 for any alpha.
struct DriftParams {
    int N;
    double alpha;
    double s_remaining;  // t_* - t

    DriftParams(int N_, double alpha_, double s_remaining_)
        : N(N_), alpha(alpha_), s_remaining(s_remaining_) {
        if (N < 1) throw domain_error("DriftParams: N must be >= 1");
        if (!(alpha > 0.0)) throw domain_error("DriftParams: alpha must be positive");
        if (!(s_remaining > 0.0)) throw domain_error("DriftParams: s_remaining must be positive");
    }

    // beta = q^2 = e^{-4 pi^2 N s / alpha^2}; the Fourier decay rate.
    double beta() const {
        return std::exp(-4.0 * pi * pi * N * s_remaining / (alpha * alpha));
    }
    double tau_im() const { return 2.0 * pi * N * s_remaining / (alpha * alpha); }
};

enum class DriftMethod { fourier, zeta_centered, theta_logderiv };

// eta1(t_*-t; N, alpha) per the q-series.
inline double drift_eta1(const DriftParams& p) {
    double beta = p.beta();
    double s = 0.0, bn = beta;
    for (int n = 1; n < 4000000; ++n) {
        double term = n * bn / (1.0 - bn);
        s += term;
        bn *= beta;
        if (term < 1e-18 * std::max(1.0, std::abs(s)) && n > 4) break;
    }
    return 2.0 * pi * pi / p.alpha * (1.0 / 12.0 - 2.0 * s);
}

inline void drift_pole_guard(double x, double alpha) {
    double m = std::round(x / alpha);
    if (std::abs(x - m * alpha) < 1e-12 * alpha)
        throw pole_error("drift_A: x on the pole lattice alpha*Z", m * alpha);
}

inline double drift_A(const DriftParams& p, double x, DriftMethod method = DriftMethod::fourier) {
    if (!is_finite(x)) throw domain_error("drift_A: non-finite x");
    drift_pole_guard(x, p.alpha);
    switch (method) {
        case DriftMethod::fourier: {
            double beta = p.beta();
            double acc = pi / p.alpha * std::cos(pi * x / p.alpha) / std::sin(pi * x / p.alpha);
            double bn = beta;
            for (int n = 1; n < 4000000; ++n) {
                double coef = bn / (1.0 - bn);
                acc += 4.0 * pi / p.alpha * coef * std::sin(2.0 * pi * n * x / p.alpha);
                bn *= beta;
                if (coef < 1e-18 && n > 4) return acc;
            }
            throw accuracy_error("drift_A: Fourier series not converged", 1e-18);
        }
        case DriftMethod::zeta_centered: {
            HalfPeriods per{cplx{p.alpha / 2.0, 0.0},
                            cplx{0.0, pi * p.N * p.s_remaining / p.alpha}};
            return weierstrass_zeta_centered(x, per);
        }
        case DriftMethod::theta_logderiv: {
            ModularNome nome = ModularNome::from_tau(p.tau_im());
            auto pair = detail::theta1_pair(cplx{x / p.alpha, 0.0}, nome.tau_im(), nome.tol,
                                            nome.max_terms);
            return as_real(pair.deriv / pair.value, 1e-10) / p.alpha;
        }
    }
    throw domain_error("drift_A: unknown method");
}

// t_* -> infinity reduction: (1/2r) cot(x/2r).
inline double drift_trig(double r, double x) {
    if (!(r > 0.0)) throw domain_error("drift_trig: r must be positive");
    double L = 2.0 * pi * r;
    double m = std::round(x / L);
    if (std::abs(x - m * L) < 1e-12 * L)
        throw pole_error("drift_trig: x on the pole lattice 2 pi r Z", m * L);
    return 0.5 / r * std::cos(x / (2.0 * r)) / std::sin(x / (2.0 * r));
}

// Hyperbolic scaling limit: (1/2Na) coth(x/2Na).
inline double drift_hyper(int N, double a, double x) {
    if (N < 1) throw domain_error("drift_hyper: N must be >= 1");
    if (!(a > 0.0)) throw domain_error("drift_hyper: a must be positive");
    if (x == 0.0) throw pole_error("drift_hyper: pole at x=0", 0.0);
    double u = x / (2.0 * N * a);
    return 1.0 / (2.0 * N * a) / std::tanh(u);
}

// Dyson-model building block.
inline double drift_rational(double x) {
    if (x == 0.0) throw pole_error("drift_rational: pole at x=0", 0.0);
    return 1.0 / x;
}

}  // namespace edpa
