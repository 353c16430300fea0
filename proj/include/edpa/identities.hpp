#pragma once

#include <vector>

#include "common.hpp"
#include "linalg.hpp"
#include "theta.hpp"
#include "weierstrass.hpp"

namespace edpa {

struct CheckResult {
    double residual = 0.0;
    bool ill_conditioned = false;
};

// Parameters of the elliptic determinant evaluations: r_j/r_k and
// kappa*prod(r) must stay off p^Z.
struct EllipticDetInput {
    int N;
    std::vector<cplx> r_vec;
    std::vector<cplx> s_vec;
    cplx kappa;
    double p;

    EllipticDetInput(int N_, std::vector<cplx> r_, std::vector<cplx> s_, cplx kappa_, double p_)
        : N(N_), r_vec(std::move(r_)), s_vec(std::move(s_)), kappa(kappa_), p(p_) {
        if (N < 2) throw domain_error("EllipticDetInput: N must be >= 2");
        if ((int)r_vec.size() != N || (int)s_vec.size() != N)
            throw domain_error("EllipticDetInput: vector sizes must equal N");
        if (!(p > 0.0 && p < 1.0)) throw domain_error("EllipticDetInput: p must lie in (0,1)");
        double lp = std::log(p);
        auto on_pZ = [&](cplx z) {
            if (z == cplx{0.0, 0.0}) return true;
            if (std::abs(std::arg(z)) > 1e-10) return false;
            double k = std::log(std::abs(z)) / lp;
            return std::abs(k - std::round(k)) < 1e-10;
        };
        cplx pr{1.0, 0.0};
        for (int j = 0; j < N; ++j) {
            if (r_vec[j] == cplx{0.0, 0.0} || s_vec[j] == cplx{0.0, 0.0})
                throw domain_error("EllipticDetInput: zero entry");
            pr *= r_vec[j];
            for (int k = 0; k < N; ++k)
                if (j != k && on_pZ(r_vec[j] / r_vec[k]))
                    throw domain_error("EllipticDetInput: r_j/r_k on p^Z");
        }
        if (on_pZ(kappa * pr)) throw domain_error("EllipticDetInput: kappa prod r on p^Z");
    }
};

// W_{A_{N-1}}(s; p) = prod_{j<k} s_k E(s_j/s_k; p).
inline cplx macdonald_denominator(const std::vector<cplx>& s, double p, double tol = 1e-15) {
    cplx out{1.0, 0.0};
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == cplx{0.0, 0.0}) throw domain_error("macdonald_denominator: zero entry");
        for (std::size_t k = j + 1; k < s.size(); ++k)
            out *= s[k] * theta_E(s[j] / s[k], p, tol);
    }
    return out;
}

// Elliptic Cauchy determinant (Tarasov-Varchenko form).
inline CheckResult check_elliptic_cauchy(const EllipticDetInput& in) {
    const int N = in.N;
    const double p = in.p;
    cplx prod_r{1.0, 0.0}, prod_s{1.0, 0.0};
    for (int j = 0; j < N; ++j) {
        prod_r *= in.r_vec[j];
        prod_s *= in.s_vec[j];
    }
    cplx Ekr = theta_E(in.kappa * prod_r, p);
    CMatrix m(N);
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
            cplx el = theta_E(in.kappa * in.s_vec[j] * prod_r / in.r_vec[k], p) / Ekr;
            for (int l = 0; l < N; ++l)
                if (l != k)
                    el *= theta_E(in.s_vec[j] / in.r_vec[l], p) /
                          theta_E(in.r_vec[k] / in.r_vec[l], p);
            m(j, k) = el;
        }
    auto lu = det_lu(m);
    cplx rhs = theta_E(in.kappa * prod_s, p) * macdonald_denominator(in.s_vec, p) /
               (Ekr * macdonald_denominator(in.r_vec, p));
    return {rel_residual(lu.det, rhs), lu.ill_conditioned};
}

// Macdonald-denominator expansion into a p^N-nome determinant.
inline CheckResult check_denominator_expansion(const std::vector<cplx>& s, cplx kappa, double p) {
    const int N = (int)s.size();
    cplx prod_s{1.0, 0.0};
    for (auto& z : s) {
        if (z == cplx{0.0, 0.0}) throw domain_error("check_denominator_expansion: zero entry");
        prod_s *= z;
    }
    cplx lhs = theta_E(kappa * prod_s, p) * macdonald_denominator(s, p);
    double pN = std::pow(p, N);
    CMatrix m(N);
    double sgn = (N % 2 == 1) ? 1.0 : -1.0;
    for (int j = 0; j < N; ++j) {
        cplx sjN = std::pow(s[j], N);
        for (int k = 0; k < N; ++k)
            m(j, k) = std::pow(s[j], k) * theta_E(sgn * std::pow(p, k) * kappa * sjN, pN);
    }
    auto lu = det_lu(m);
    cplx pref = std::pow(qpoch_inf(cplx{pN, 0.0}, pN) / qpoch_inf(cplx{p, 0.0}, p), N);
    return {rel_residual(lhs, pref * lu.det), lu.ill_conditioned};
}

// theta_1 Cauchy determinant on the circle.
inline CheckResult check_theta_cauchy(int N, const std::vector<double>& u,
                                      const std::vector<double>& x, double delta, double r,
                                      double tau_im) {
    if ((int)u.size() != N || (int)x.size() != N)
        throw domain_error("check_theta_cauchy: size mismatch");
    const double L = 2.0 * pi * r;
    for (int j = 0; j + 1 < N; ++j)
        if (!(u[j] < u[j + 1])) throw domain_error("check_theta_cauchy: u not in the alcove");
    if (!(u.front() >= 0.0 && u.back() < L))
        throw domain_error("check_theta_cauchy: u not in [0, 2 pi r)");
    double ub = delta, xb = delta;
    for (int j = 0; j < N; ++j) {
        ub += u[j];
        xb += x[j];
    }
    if (!(ub > 0.0 && ub < L)) throw domain_error("check_theta_cauchy: center of u out of range");
    ModularNome nome = ModularNome::from_tau(tau_im);
    auto th1 = [&](double v) { return theta1_real(v, nome); };
    CMatrix m(N);
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
            double el = th1((ub + x[j] - u[k]) / L) / th1(ub / L);
            for (int l = 0; l < N; ++l)
                if (l != k) el *= th1((x[j] - u[l]) / L) / th1((u[k] - u[l]) / L);
            m(j, k) = el;
        }
    auto lu = det_lu(m);
    double rhs = th1(xb / L) / th1(ub / L);
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k) rhs *= th1((x[j] - x[k]) / L) / th1((u[j] - u[k]) / L);
    return {rel_residual(lu.det, rhs), lu.ill_conditioned};
}

// C_N^A(tau), both printed lines; they agree identically.
inline cplx cNA_line1(int N, double delta, double r, const ModularNome& nome) {
    double q0 = q0_factor(nome);
    cplx i_pow = std::exp(cplx{0.0, pi / 2.0 * (N - 1.0) * (3.0 * N - 2.0) / 2.0});
    return std::pow(q0, (N - 1.0) * (N - 2.0) / 2.0) * i_pow *
           std::pow(nome.q, (N - 1.0) * (3.0 * N - 2.0) / 8.0) *
           std::exp(cplx{0.0, (N - 1.0) * delta / (2.0 * r)});
}

inline cplx cNA_line2(int N, double delta, double r, const ModularNome& nome) {
    double q0 = q0_factor(nome);
    cplx tau{0.0, nome.tau_im()};
    cplx expo = (N - 1.0) *
                ((3.0 * N - 2.0) / 8.0 * tau + delta / (2.0 * pi * r) + (3.0 * N - 2.0) / 4.0) *
                cplx{0.0, pi};
    return std::pow(q0, (N - 1.0) * (N - 2.0) / 2.0) * std::exp(expo);
}

// theta-product versus C_N^A * determinant (Rosengren-Schlosser type).
inline CheckResult check_rs_determinant(int N, const std::vector<double>& x, double delta,
                                        double r, double tau_im) {
    if ((int)x.size() != N) throw domain_error("check_rs_determinant: size mismatch");
    const double L = 2.0 * pi * r;
    ModularNome nome = ModularNome::from_tau(tau_im);
    ModularNome nomeN = ModularNome::from_tau(N * tau_im);
    double xb = delta;
    for (double v : x) xb += v;
    cplx lhs = theta1(cplx{xb / L, 0.0}, nome);
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k) lhs *= theta1(cplx{(x[j] - x[k]) / L, 0.0}, nome);
    CMatrix m(N);
    cplx tau{0.0, tau_im};
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
            cplx arg = (N - 1.0) / 2.0 + (double)k * tau + (delta + N * x[j]) / L;
            m(j, k) = std::exp(cplx{0.0, (double)k * x[j] / r}) * theta1(arg, nomeN);
        }
    auto lu = det_lu(m);
    cplx rhs = cNA_line2(N, delta, r, nome) * lu.det;
    return {rel_residual(lhs, rhs), lu.ill_conditioned};
}

// Forrester's theta determinant (Prop 5.6.3 type). Center factor corrected:
// theta_3 resp. theta_0 of sum(x_j + alpha) at nome N*tau (the printed
// N*tau/2 shift and 2N*tau nome fail numerically).
inline CheckResult check_forrester(int N, const std::vector<double>& x, double alpha,
                                   double tau_im) {
    if ((int)x.size() != N) throw domain_error("check_forrester: size mismatch");
    if (N < 2) throw domain_error("check_forrester: N must be >= 2");
    ModularNome nome = ModularNome::from_tau(tau_im);
    ModularNome nomeN = ModularNome::from_tau(N * tau_im);
    const bool odd = (N % 2 == 1);
    CMatrix m(N);
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
            cplx v{x[j] + alpha - (k + 1.0) / N, 0.0};
            m(j, k) = odd ? theta_mu(3, v, nome) : theta1(v, nome);
        }
    auto lu = det_lu(m);
    double ssum = N * alpha;
    for (double v : x) ssum += v;
    cplx center = odd ? theta_mu(3, cplx{ssum, 0.0}, nomeN) : theta_mu(0, cplx{ssum, 0.0}, nomeN);
    double eta_arg = std::exp(-2.0 * N * pi * tau_im);
    cplx rhs = std::pow((double)N, N / 2.0) *
               std::pow(dedekind_eta(eta_arg), -(N - 1.0) * (N - 2.0) / 2.0) * center;
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k) rhs *= theta1(cplx{x[k] - x[j], 0.0}, nomeN);
    return {rel_residual(lu.det, rhs), lu.ill_conditioned};
}

// Lemma 2.1: pairwise zeta products against zeta^2 and wp sums.
inline CheckResult check_zeta_addition(double a, double b, double c, const HalfPeriods& per) {
    auto z = [&](double x) { return weierstrass_zeta(x, per); };
    auto P = [&](double x) { return weierstrass_p(x, per); };
    double ab = a - b, bc = b - c, ac = a - c;
    double lhs = z(ab) * z(ac) + z(-ab) * z(bc) + z(-ac) * z(-bc);
    double rhs = 0.5 * (z(ab) * z(ab) + z(bc) * z(bc) + z(ac) * z(ac)) -
                 0.5 * (P(ab) + P(bc) + P(ac));
    return {rel_residual(cplx{lhs, 0.0}, cplx{rhs, 0.0}), false};
}

}  // namespace edpa
