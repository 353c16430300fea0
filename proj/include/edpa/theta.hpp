#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "common.hpp"

namespace edpa {

// Real nome q in (0,1), i.e. tau = i*ln(1/q)/pi purely imaginary, plus the
// truncation policy shared by every elliptic series in the library.
struct ModularNome {
    double q;
    double tol = 1e-15;
    int max_terms = 64;

    explicit ModularNome(double q_, double tol_ = 1e-15, int max_terms_ = 64)
        : q(q_), tol(tol_), max_terms(max_terms_) {
        if (!(q > 0.0 && q < 1.0)) throw domain_error("nome q must lie in (0,1)");
        if (!(tol > 0.0)) throw domain_error("nome tol must be positive");
        if (max_terms < 8) throw domain_error("nome max_terms must be >= 8");
    }

    double tau_im() const { return std::log(1.0 / q) / pi; }

    static ModularNome from_tau(double tau_im, double tol = 1e-15, int max_terms = 64) {
        if (!(tau_im > 0.0)) throw domain_error("Im tau must be positive");
        return ModularNome(std::exp(-pi * tau_im), tol, max_terms);
    }
};

namespace detail {

// Direct series at reduced argument/nome. Index 0 denotes the function
// written theta_4 in Whittaker-Watson. The q-power and the trigonometric factor
// are combined inside one exponential: computed separately they reach
// 0 * inf long before the term itself leaves double range.
inline cplx theta_series(int mu, cplx v, double q, double tol, int max_terms) {
    cplx acc = (mu == 3 || mu == 0) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
    double scale = std::abs(acc);
    int below = 0;
    double lq = std::log(q);
    for (int n = 1; n <= max_terms; ++n) {
        double c = (mu == 1 || mu == 2) ? (n - 0.5) * (n - 0.5) * lq : (double)n * n * lq;
        cplx z = (mu == 1 || mu == 2) ? (2.0 * n - 1.0) * pi * v : 2.0 * n * pi * v;
        cplx ep = std::exp(cplx{c, 0.0} + cplx{0.0, 1.0} * z);
        cplx em = std::exp(cplx{c, 0.0} - cplx{0.0, 1.0} * z);
        cplx term;
        switch (mu) {
            case 1:
                term = cplx{0.0, -1.0} * (ep - em);  // 2 q^c sin(z)
                if (n % 2 == 0) term = -term;
                break;
            case 2:
                term = ep + em;  // 2 q^c cos(z)
                break;
            case 3:
                term = ep + em;
                break;
            default:
                term = ep + em;
                if (n % 2 == 1) term = -term;
                break;
        }
        acc += term;
        scale = std::max(scale, std::abs(acc));
        if (std::abs(term) < tol * std::max(scale, 1e-300)) {
            if (++below >= 2) return acc;
        } else {
            below = 0;
        }
    }
    throw accuracy_error("theta series not converged within max_terms",
                         std::abs(acc) > 0 ? tol * std::abs(acc) : tol);
}

inline cplx theta1_dv_series(cplx v, double q, double tol, int max_terms) {
    cplx acc{0.0, 0.0};
    double scale = 0.0;
    int below = 0;
    double lq = std::log(q);
    for (int n = 1; n <= max_terms; ++n) {
        double c = (n - 0.5) * (n - 0.5) * lq;
        cplx z = (2.0 * n - 1.0) * pi * v;
        cplx term = pi * (2.0 * n - 1.0) *
                    (std::exp(cplx{c, 0.0} + cplx{0.0, 1.0} * z) +
                     std::exp(cplx{c, 0.0} - cplx{0.0, 1.0} * z));
        if (n % 2 == 0) term = -term;
        acc += term;
        scale = std::max(scale, std::abs(acc));
        if (std::abs(term) < tol * std::max(scale, 1e-300)) {
            if (++below >= 2) return acc;
        } else {
            below = 0;
        }
    }
    throw accuracy_error("theta1' series not converged within max_terms", tol);
}

// Full pipeline: real-period shift, nome reduction below e^{-pi}, imaginary
// quasi-period shift, then the plain series.
inline cplx theta_eval(int mu, cplx v, double T, double tol, int max_terms) {
    // theta_mu(v+2)=theta_mu(v) for all mu.
    double shift = 2.0 * std::floor((v.real() + 1.0) / 2.0);
    v -= shift;

    if (T < 1.0) {
        static constexpr int swap_mu[4] = {2, 1, 0, 3};
        cplx w = cplx{0.0, -1.0} * v / T;
        cplx pref = std::pow(T, -0.5) * std::exp(-pi * v * v / T);
        if (mu == 1) pref *= cplx{0.0, 1.0};
        return pref * theta_eval(swap_mu[mu], w, 1.0 / T, tol, max_terms);
    }

    long m = std::lround(v.imag() / T);
    if (m != 0) {
        cplx w = v - cplx{0.0, (double)m * T};
        cplx tau{0.0, T};
        cplx factor = std::exp(cplx{0.0, -pi} * (2.0 * (double)m * w + (double)(m * m) * tau));
        if ((mu == 1 || mu == 0) && (m % 2 != 0)) factor = -factor;
        return factor * theta_series(mu, w, std::exp(-pi * T), tol, max_terms);
    }
    return theta_series(mu, v, std::exp(-pi * T), tol, max_terms);
}

struct ThetaPair {
    cplx value;
    cplx deriv;
};

inline ThetaPair theta1_pair(cplx v, double T, double tol, int max_terms) {
    double shift = 2.0 * std::floor((v.real() + 1.0) / 2.0);
    v -= shift;

    if (T < 1.0) {
        cplx w = cplx{0.0, -1.0} * v / T;
        ThetaPair inner = theta1_pair(w, 1.0 / T, tol, max_terms);
        cplx pref = cplx{0.0, 1.0} * std::pow(T, -0.5) * std::exp(-pi * v * v / T);
        cplx value = pref * inner.value;
        cplx deriv = pref * ((-2.0 * pi * v / T) * inner.value +
                             cplx{0.0, -1.0} / T * inner.deriv);
        return {value, deriv};
    }

    long m = std::lround(v.imag() / T);
    if (m != 0) {
        cplx w = v - cplx{0.0, (double)m * T};
        cplx tau{0.0, T};
        cplx factor = std::exp(cplx{0.0, -pi} * (2.0 * (double)m * w + (double)(m * m) * tau));
        if (m % 2 != 0) factor = -factor;
        double q = std::exp(-pi * T);
        cplx th = theta_series(1, w, q, tol, max_terms);
        cplx dth = theta1_dv_series(w, q, tol, max_terms);
        return {factor * th, factor * (dth + cplx{0.0, -2.0 * pi * (double)m} * th)};
    }
    double q = std::exp(-pi * T);
    return {theta_series(1, v, q, tol, max_terms),
            theta1_dv_series(v, q, tol, max_terms)};
}

}  // namespace detail

inline cplx theta1(cplx v, const ModularNome& nome) {
    if (!is_finite(v)) throw domain_error("theta1: non-finite argument");
    return detail::theta_eval(1, v, nome.tau_im(), nome.tol, nome.max_terms);
}

inline cplx theta_mu(int mu, cplx v, const ModularNome& nome) {
    if (mu != 0 && mu != 2 && mu != 3) throw domain_error("theta_mu: index must be 0, 2 or 3");
    if (!is_finite(v)) throw domain_error("theta_mu: non-finite argument");
    return detail::theta_eval(mu, v, nome.tau_im(), nome.tol, nome.max_terms);
}

inline cplx theta1_dv(cplx v, const ModularNome& nome) {
    if (!is_finite(v)) throw domain_error("theta1_dv: non-finite argument");
    return detail::theta1_pair(v, nome.tau_im(), nome.tol, nome.max_terms).deriv;
}

// Real-argument fast paths (the drift/kernel stack is real-valued).
inline double theta1_real(double v, const ModularNome& nome) {
    return as_real(theta1(cplx{v, 0.0}, nome), 1e-12);
}
inline double theta_mu_real(int mu, double v, const ModularNome& nome) {
    return as_real(theta_mu(mu, cplx{v, 0.0}, nome), 1e-12);
}
inline double theta1_dv0(const ModularNome& nome) {
    return as_real(theta1_dv(cplx{0.0, 0.0}, nome), 1e-12);
}

// (a; p)_infinity, |p| < 1 real.
inline cplx qpoch_inf(cplx a, double p, double tol = 1e-15) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("qpoch_inf: p must lie in (0,1)");
    cplx acc{1.0, 0.0};
    double apj = std::abs(a);
    const long max_iter = 4000000;
    cplx apow = a;
    for (long j = 0; j < max_iter; ++j) {
        acc *= (1.0 - apow);
        apow *= p;
        apj *= p;
        if (apj / (1.0 - p) < tol) return acc;
    }
    throw accuracy_error("qpoch_inf: product not converged", apj / (1.0 - p));
}

// log (a; p)_infinity as a principal-log sum; exp of it reproduces the
// product even when the product itself under/overflows (q near 1).
inline cplx log_qpoch_inf(cplx a, double p, double tol = 1e-15) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("log_qpoch_inf: p must lie in (0,1)");
    cplx acc{0.0, 0.0};
    double apj = std::abs(a);
    const long max_iter = 4000000;
    cplx apow = a;
    for (long j = 0; j < max_iter; ++j) {
        cplx f = 1.0 - apow;
        if (std::abs(f) < 1e-280)
            throw pole_error("log_qpoch_inf: vanishing factor", (double)j);
        acc += std::log(f);
        apow *= p;
        apj *= p;
        if (apj / (1.0 - p) < tol) return acc;
    }
    throw accuracy_error("log_qpoch_inf: not converged", apj / (1.0 - p));
}

// E(s;p) = (s, p/s; p)_infinity with quasi-period reduction of |s|.
inline cplx theta_E(cplx s, double p, double tol = 1e-15) {
    if (s == cplx{0.0, 0.0}) throw domain_error("theta_E: s must be nonzero");
    if (!(p > 0.0 && p < 1.0)) throw domain_error("theta_E: p must lie in (0,1)");
    cplx factor{1.0, 0.0};
    double sq = std::sqrt(p);
    int guard = 0;
    while (std::abs(s) > 1.0 / sq && guard++ < 4096) {
        factor *= -s;        // E(s;p) = -s E(ps;p)
        s *= p;
    }
    while (std::abs(s) < sq && guard++ < 4096) {
        factor *= -p / s;    // E(s;p) = -(p/s) E(s/p;p)
        s /= p;
    }
    if (guard >= 4096) throw accuracy_error("theta_E: modulus reduction exhausted", std::abs(s));
    return factor * qpoch_inf(s, p, tol) * qpoch_inf(p / s, p, tol);
}

// q0(tau) = (q^2; q^2)_infinity, the partition-type product.
inline double q0_factor(const ModularNome& nome) {
    return qpoch_inf(cplx{nome.q * nome.q, 0.0}, nome.q * nome.q, nome.tol).real();
}

// Dedekind eta of real x in (0,1); modular step keeps the product short for
// x near 1.
inline double dedekind_eta(double x, double tol = 1e-15) {
    if (!(x > 0.0 && x < 1.0)) throw domain_error("dedekind_eta: x must lie in (0,1)");
    double a = -std::log(x);
    if (a < 2.0 * pi) {
        double ad = 4.0 * pi * pi / a;
        double xd = std::exp(-ad);
        return std::sqrt(2.0 * pi / a) * std::pow(xd, 1.0 / 24.0) *
               qpoch_inf(cplx{xd, 0.0}, xd, tol).real();
    }
    return std::pow(x, 1.0 / 24.0) * qpoch_inf(cplx{x, 0.0}, x, tol).real();
}

}  // namespace edpa
