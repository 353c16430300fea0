#pragma once

#include <cmath>
#include <complex>

#include "common.hpp"
#include "theta.hpp"

namespace edpa {

// Gosper's q-sine, argument convention sin_q(w) -> sin(w) as q -> 1.
// Evaluated in log space: the individual q-Pochhammer factors underflow
// doubles long before the ratio does.
inline cplx q_sine(cplx w, double q, double tol = 1e-15) {
    if (!(q > 0.0 && q < 1.0)) throw domain_error("q_sine: q must lie in (0,1)");
    if (!is_finite(w)) throw domain_error("q_sine: non-finite argument");
    cplx z = w / pi;
    double q2 = q * q;
    double lq = std::log(q);
    cplx lg = (z - 0.5) * (z - 0.5) * lq + log_qpoch_inf(std::exp(2.0 * z * lq), q2, tol) +
              log_qpoch_inf(std::exp((2.0 - 2.0 * z) * lq), q2, tol) -
              2.0 * log_qpoch_inf(cplx{q, 0.0}, q2, tol);
    return std::exp(lg);
}

// q-gamma: (1-q)^{1-z} (q;q)_inf / (q^z;q)_inf.
inline cplx q_gamma(cplx z, double q, double tol = 1e-15) {
    if (!(q > 0.0 && q < 1.0)) throw domain_error("q_gamma: q must lie in (0,1)");
    if (!is_finite(z)) throw domain_error("q_gamma: non-finite argument");
    double lq = std::log(q);
    cplx ldenom;
    try {
        ldenom = log_qpoch_inf(std::exp(z * lq), q, tol);
    } catch (const pole_error&) {
        throw pole_error("q_gamma: pole of the q-gamma function", -std::round(z.real()));
    }
    return std::exp((1.0 - z) * std::log(1.0 - q) + log_qpoch_inf(cplx{q, 0.0}, q, tol) - ldenom);
}

// Residual of the q-analogue of Euler's reflection formula at z.
inline double q_reflection_residual(cplx z, double q, double tol = 1e-15) {
    double q2 = q * q;
    cplx lhs = q_sine(pi * z, q, tol);
    cplx rhs = std::pow(q, 0.25) * std::pow(q_gamma(cplx{0.5, 0.0}, q2, tol), 2.0) *
               std::exp(z * (z - 1.0) / 2.0 * std::log(q2)) /
               (q_gamma(z, q2, tol) * q_gamma(1.0 - z, q2, tol));
    return rel_residual(lhs, rhs);
}

}  // namespace edpa
