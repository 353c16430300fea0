#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace edpa {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Argument landed on (or too close to) a pole of the evaluated function.
struct pole_error : domain_error {
    double nearest_pole;
    pole_error(const std::string& msg, double pole)
        : domain_error(msg), nearest_pole(pole) {}
};

// Series/quadrature did not reach the requested tolerance within its budget.
struct accuracy_error : std::runtime_error {
    double residual_bound;
    accuracy_error(const std::string& msg, double bound)
        : std::runtime_error(msg), residual_bound(bound) {}
};

struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// |a-b| / max(1, |a|, |b|): stable across the dynamic range of theta products.
inline double rel_residual(const cplx& a, const cplx& b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double rel_diff(const cplx& a, const cplx& b) {
    double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) return 0.0;
    return std::abs(a - b) / scale;
}

// Strip a numerically-zero imaginary part; real-typed results downstream.
inline double as_real(const cplx& z, double rel = 1e-10) {
    if (std::abs(z.imag()) > rel * std::max(1.0, std::abs(z.real())))
        throw accuracy_error("expected real value, imaginary residue " +
                                 std::to_string(z.imag()),
                             std::abs(z.imag()));
    return z.real();
}

}  // namespace edpa
