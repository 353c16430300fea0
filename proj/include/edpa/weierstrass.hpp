#pragma once

#include <cmath>

#include "common.hpp"
#include "theta.hpp"

namespace edpa {

// Fundamental half-periods with Im(omega3/omega1) > 0. The library's use
// cases keep tau = omega3/omega1 on the imaginary axis (real nome).
struct HalfPeriods {
    cplx omega1;
    cplx omega3;

    HalfPeriods(cplx w1, cplx w3) : omega1(w1), omega3(w3) {
        if (omega1 == cplx{0.0, 0.0}) throw domain_error("HalfPeriods: omega1 must be nonzero");
        cplx tau = omega3 / omega1;
        if (!(tau.imag() > 0.0)) throw domain_error("HalfPeriods: Im(omega3/omega1) must be positive");
        if (std::abs(tau.real()) > 1e-12 * std::abs(tau.imag()))
            throw domain_error("HalfPeriods: tau off the imaginary axis is unsupported");
    }

    double tau_im() const { return (omega3 / omega1).imag(); }
    double q() const { return std::exp(-pi * tau_im()); }
};

namespace detail {

inline void zeta_pole_guard(double x, double two_omega1) {
    double m = std::round(x / two_omega1);
    if (std::abs(x - m * two_omega1) < 1e-12 * std::max(1.0, two_omega1))
        throw pole_error("argument on the period lattice", m * two_omega1);
}

}  // namespace detail

// eta1 = zeta(omega1) from the q-series of the Eisenstein-type sum.
inline double eta1(const HalfPeriods& per) {
    double w1 = as_real(per.omega1, 1e-12);
    double q = per.q();
    double q2 = q * q;
    double s = 0.0, q2n = q2;
    for (int n = 1; n < 2000000; ++n) {
        double term = n * q2n / (1.0 - q2n);
        s += term;
        q2n *= q2;
        if (term < 1e-18 * std::max(1.0, std::abs(s)) && n > 4) break;
    }
    return pi * pi / w1 * (1.0 / 12.0 - 2.0 * s);
}

// zeta(x | 2 w1, 2 w3) - eta1 x / w1: cot plus exponentially small sine tail.
inline double weierstrass_zeta_centered(double x, const HalfPeriods& per) {
    if (!is_finite(x)) throw domain_error("weierstrass_zeta_centered: non-finite x");
    double w1 = as_real(per.omega1, 1e-12);
    detail::zeta_pole_guard(x, 2.0 * w1);
    double q = per.q();
    double q2 = q * q;
    double acc = pi / (2.0 * w1) * (std::cos(pi * x / (2.0 * w1)) / std::sin(pi * x / (2.0 * w1)));
    double q2n = q2;
    for (int n = 1; n < 2000000; ++n) {
        double coef = q2n / (1.0 - q2n);
        acc += 2.0 * pi / w1 * coef * std::sin(n * pi * x / w1);
        q2n *= q2;
        if (coef < 1e-18 && n > 4) break;
    }
    return acc;
}

// wp(x) = -(d/dx)[zeta-centered] - eta1/omega1.
inline double weierstrass_p(double x, const HalfPeriods& per) {
    if (!is_finite(x)) throw domain_error("weierstrass_p: non-finite x");
    double w1 = as_real(per.omega1, 1e-12);
    detail::zeta_pole_guard(x, 2.0 * w1);
    double q = per.q();
    double q2 = q * q;
    double s = std::sin(pi * x / (2.0 * w1));
    double acc = pi * pi / (4.0 * w1 * w1) / (s * s);
    double q2n = q2;
    for (int n = 1; n < 2000000; ++n) {
        double coef = q2n / (1.0 - q2n);
        acc -= 2.0 * pi * pi / (w1 * w1) * n * coef * std::cos(n * pi * x / w1);
        q2n *= q2;
        if (n * coef < 1e-18 && n > 4) break;
    }
    return acc - eta1(per) / w1;
}

// Full zeta, for the addition identity.
inline double weierstrass_zeta(double x, const HalfPeriods& per) {
    double w1 = as_real(per.omega1, 1e-12);
    return weierstrass_zeta_centered(x, per) + eta1(per) * x / w1;
}

}  // namespace edpa
