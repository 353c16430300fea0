#pragma once

#include <optional>
#include <span>
#include <vector>

#include "common.hpp"
#include "linalg.hpp"
#include "quadrature.hpp"
#include "theta.hpp"

namespace edpa {

struct ProcessParams {
    int N;
    double r;
    double t_star;

    ProcessParams(int N_, double r_, double t_star_) : N(N_), r(r_), t_star(t_star_) {
        if (N < 1) throw domain_error("ProcessParams: N must be >= 1");
        if (!(r > 0.0)) throw domain_error("ProcessParams: r must be positive");
        if (!(t_star > 0.0)) throw domain_error("ProcessParams: t_star must be positive");
    }

    double L() const { return 2.0 * pi * r; }
    double delta_A() const { return -pi * r * (N - 2.0); }
};

// sigma_M(m): integer spins for M odd, half-integers for M even.
inline double sigma_spin(int M, long m) {
    if (M < 1) throw domain_error("sigma_spin: M must be >= 1");
    return (M % 2 == 1) ? (double)m : (double)m - 0.5;
}

// Ordered positions on [0, 2 pi r) plus the center index delta in pi r Z.
// delta is pinned by the parity rule delta/(pi r) == N (mod 2), which the
// dynamics preserves and which the equidistant delta_A satisfies.
struct Configuration {
    std::vector<double> points;
    double delta = 0.0;
    bool boundary = false;  // no valid delta (center on {0, 2 pi r})

    Configuration(std::vector<double> pts, const ProcessParams& par, std::optional<double> dlt = {})
        : points(std::move(pts)) {
        const double L = par.L();
        if ((int)points.size() != par.N) throw domain_error("Configuration: wrong point count");
        for (std::size_t j = 0; j + 1 < points.size(); ++j)
            if (!(points[j] < points[j + 1]))
                throw domain_error("Configuration: points must be strictly increasing");
        if (!(points.front() >= 0.0 && points.back() < L))
            throw domain_error("Configuration: points must lie in [0, 2 pi r)");
        double s = 0.0;
        for (double v : points) s += v;
        if (dlt) {
            delta = *dlt;
            double c = delta + s;
            if (!(c > 0.0 && c < L)) boundary = true;
        } else {
            // unique pi r multiple of parity N with delta + sum in (0, L)
            long base = (long)std::ceil(-s / (pi * par.r));
            bool found = false;
            for (long m = base - 2; m <= base + 4; ++m) {
                if (((m - par.N) % 2) != 0) continue;
                double c = pi * par.r * m + s;
                if (c > 0.0 && c < L) {
                    delta = pi * par.r * m;
                    found = true;
                    break;
                }
            }
            if (!found) boundary = true;
        }
    }

    double center() const {
        double s = delta;
        for (double v : points) s += v;
        return s;
    }
};

inline Configuration equidistant_init(const ProcessParams& par) {
    std::vector<double> v(par.N);
    for (int j = 0; j < par.N; ++j) v[j] = par.L() * j / par.N;
    return Configuration(std::move(v), par, par.delta_A());
}

enum class WrapMethod { auto_pick, image_sum, theta_form, spectral };

inline double p_bm(double t, double d) {
    return std::exp(-d * d / (2.0 * t)) / std::sqrt(2.0 * pi * t);
}

// Wrapped heat kernel p^r_{A_{N-1}}(t, y|x): plain wrap for N even,
// sign-alternating wrap for N odd.
inline double wrapped_kernel(int N, double r, double t, double x, double y,
                             WrapMethod method = WrapMethod::auto_pick) {
    if (!(t > 0.0)) throw domain_error("wrapped_kernel: t must be positive");
    const double L = 2.0 * pi * r;
    const bool odd = (N % 2 == 1);
    if (method == WrapMethod::auto_pick)
        method = (t / (r * r) > 1.0) ? WrapMethod::spectral : WrapMethod::image_sum;
    double d = y - x;
    switch (method) {
        case WrapMethod::image_sum: {
            long lmax = (long)std::ceil((std::sqrt(2.0 * t * 40.0) + std::abs(d)) / L) + 1;
            double acc = 0.0;
            for (long l = -lmax; l <= lmax; ++l) {
                double term = p_bm(t, d + L * l);
                acc += (odd && (l % 2 != 0)) ? -term : term;
            }
            return acc;
        }
        case WrapMethod::theta_form: {
            ModularNome nome = ModularNome::from_tau(t / (2.0 * pi * r * r));
            return (odd ? theta_mu_real(2, d / L, nome) : theta_mu_real(3, d / L, nome)) / L;
        }
        case WrapMethod::spectral: {
            double acc = odd ? 0.0 : 1.0;
            for (long m = 1; m < 1000000; ++m) {
                double s = odd ? (m - 0.5) : (double)m;
                double term = 2.0 * std::exp(-s * s * t / (2.0 * r * r)) * std::cos(s * d / r);
                acc += term;
                if (std::exp(-s * s * t / (2.0 * r * r)) < 1e-18) break;
            }
            return acc / L;
        }
        default:
            throw domain_error("wrapped_kernel: bad method");
    }
}

struct FlaggedValue {
    double value = 0.0;
    bool out_of_alcove = false;
    bool boundary = false;                 // configuration on the state-space boundary
    bool unproven_representation = false;  // non-equidistant start, KM formula unproven
};

namespace detail {

// det[ p^r(t, y_j | x_k) ] over arbitrary ordered tuples.
inline DetResult km_det_matrix(int N, double r, double t, std::span<const double> y,
                               std::span<const double> x) {
    CMatrix m(N);
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) m(j, k) = wrapped_kernel(N, r, t, x[k], y[j]);
    return det_lu(m);
}

}  // namespace detail

enum class KmForm { determinant, closed };

// q_N^A(t, y | v) from the equidistant start. Closed form: all theta factors
// at nome e^{-Nt/2r^2}; eta(e^{-Nt/r^2}) prefactor.
inline FlaggedValue km_determinant(const ProcessParams& par, double t, const Configuration& y,
                                   KmForm form = KmForm::determinant) {
    if (!(t > 0.0)) throw domain_error("km_determinant: t must be positive");
    const int N = par.N;
    const double L = par.L();
    double yb = par.delta_A();
    for (double v : y.points) yb += v;
    FlaggedValue out;
    out.out_of_alcove = !(yb > 0.0 && yb < L);
    if (form == KmForm::determinant) {
        Configuration v = equidistant_init(par);
        out.value = detail::km_det_matrix(N, par.r, t, y.points, v.points).det.real();
        return out;
    }
    ModularNome nome = ModularNome::from_tau(N * t / (2.0 * pi * par.r * par.r));
    double eta_arg = std::exp(-N * t / (par.r * par.r));
    double val = std::pow(std::sqrt((double)N) / L, N) *
                 std::pow(dedekind_eta(eta_arg), -(N - 1.0) * (N - 2.0) / 2.0) *
                 theta1_real(yb / L, nome);
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k)
            val *= theta1_real((y.points[k] - y.points[j]) / L, nome);
    out.value = val;
    return out;
}

// General-start determinant; flagged unproven outside the equidistant case.
inline FlaggedValue km_determinant_from(const ProcessParams& par, double t,
                                        std::span<const double> y, std::span<const double> x) {
    if (!(t > 0.0)) throw domain_error("km_determinant_from: t must be positive");
    FlaggedValue out;
    out.value = detail::km_det_matrix(par.N, par.r, t, y, x).det.real();
    Configuration v = equidistant_init(par);
    out.unproven_representation = false;
    for (int j = 0; j < par.N; ++j)
        if (std::abs(x[j] - v.points[j]) > 1e-12 * par.L()) out.unproven_representation = true;
    return out;
}

// h_N^A(t_*-t, x): Dedekind-eta prefactor times theta_1 products.
inline FlaggedValue h_A(const ProcessParams& par, double s_remaining, const Configuration& x) {
    if (!(s_remaining > 0.0)) throw domain_error("h_A: s_remaining must be positive");
    const int N = par.N;
    const double L = par.L();
    FlaggedValue out;
    if (x.boundary) {
        out.boundary = true;
        return out;  // value 0 on the boundary
    }
    double xb = x.center();
    if (!(xb > 0.0 && xb < L)) {
        out.out_of_alcove = true;
        return out;
    }
    ModularNome nome = ModularNome::from_tau(N * s_remaining / (2.0 * pi * par.r * par.r));
    double eta_arg = std::exp(-N * s_remaining / (par.r * par.r));
    double val = std::exp(-N * (N - 1.0) * (N - 2.0) * par.t_star / (48.0 * par.r * par.r)) *
                 std::pow(dedekind_eta(eta_arg), -(N - 1.0) * (N - 2.0) / 2.0) *
                 theta1_real(xb / L, nome);
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k)
            val *= theta1_real((x.points[k] - x.points[j]) / L, nome);
    out.value = val;
    return out;
}

// Variant on an ordered unwrapped tuple (x may start below 0) with the fixed
// equidistant delta_A; used by normalization/Chapman-Kolmogorov quadrature.
inline double h_A_points(const ProcessParams& par, double s_remaining, std::span<const double> x,
                         double delta) {
    const int N = par.N;
    const double L = par.L();
    double xb = delta;
    for (double v : x) xb += v;
    ModularNome nome = ModularNome::from_tau(N * s_remaining / (2.0 * pi * par.r * par.r));
    double eta_arg = std::exp(-N * s_remaining / (par.r * par.r));
    double val = std::exp(-N * (N - 1.0) * (N - 2.0) * par.t_star / (48.0 * par.r * par.r)) *
                 std::pow(dedekind_eta(eta_arg), -(N - 1.0) * (N - 2.0) / 2.0) *
                 theta1_real(xb / L, nome);
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k) val *= theta1_real((x[k] - x[j]) / L, nome);
    return val;
}

// p_N^A(t, y | s, x) = h(t_*-t, y)/h(t_*-s, x) * q_N^A(t-s, y|x), on ordered
// unwrapped tuples sharing one delta window.
inline FlaggedValue transition_density_points(const ProcessParams& par, double s,
                                              std::span<const double> x, double t,
                                              std::span<const double> y, double delta) {
    if (!(s >= 0.0 && s < t && t < par.t_star))
        throw domain_error("transition_density: need 0 <= s < t < t_star");
    FlaggedValue q = km_determinant_from(par, t - s, y, x);
    double hy = h_A_points(par, par.t_star - t, y, delta);
    double hx = h_A_points(par, par.t_star - s, x, delta);
    FlaggedValue out;
    out.value = hy / hx * q.value;
    out.unproven_representation = q.unproven_representation;
    return out;
}

inline FlaggedValue transition_density(const ProcessParams& par, double s, const Configuration& x,
                                       double t, const Configuration& y) {
    return transition_density_points(par, s, x.points, t, y.points, x.delta);
}

// Absorbing BM on [0, L]: images below the crossover, spectral above.
inline double absorbing_kernel(double L, double t, double x, double y) {
    if (!(t > 0.0)) throw domain_error("absorbing_kernel: t must be positive");
    double r = L / (2.0 * pi);
    if (t / (r * r) > 1.0) {
        double acc = 0.0;
        for (long k = 1; k < 1000000; ++k) {
            double lam = k * pi / L;
            double term = 2.0 / L * std::exp(-lam * lam * t / 2.0) * std::sin(k * pi * x / L) *
                          std::sin(k * pi * y / L);
            acc += term;
            if (std::exp(-lam * lam * t / 2.0) < 1e-18) break;
        }
        return acc;
    }
    long nmax = (long)std::ceil((std::sqrt(2.0 * t * 40.0) + std::abs(x) + std::abs(y)) / (2.0 * L)) + 1;
    double acc = 0.0;
    for (long n = -nmax; n <= nmax; ++n)
        acc += p_bm(t, y - x + 2.0 * n * L) - p_bm(t, y + x + 2.0 * n * L);
    return acc;
}

// Single-particle elliptic BES(3) transition density (h-transform of the
// absorbing kernel by a theta_1 ratio).
inline double single_particle_density(double r, double t_star, double s, double x, double t,
                                      double y) {
    const double L = 2.0 * pi * r;
    if (!(x > 0.0 && x < L && y > 0.0 && y < L))
        throw domain_error("single_particle_density: positions must lie in (0, 2 pi r)");
    if (!(s >= 0.0 && s < t && t < t_star))
        throw domain_error("single_particle_density: need 0 <= s < t < t_star");
    ModularNome ny = ModularNome::from_tau((t_star - t) / (2.0 * pi * r * r));
    ModularNome nx = ModularNome::from_tau((t_star - s) / (2.0 * pi * r * r));
    return absorbing_kernel(L, t - s, x, y) * theta1_real(y / L, ny) / theta1_real(x / L, nx);
}

}  // namespace edpa
