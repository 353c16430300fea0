#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "common.hpp"

namespace edpa {

struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
};

namespace detail {

// Legendre P_n and its derivative by the three-term recurrence.
inline std::pair<double, double> legendre_pd(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace detail

// Gauss-Legendre nodes/weights on (-1, 1).
inline const QuadRule& gauss_legendre(int n) {
    static thread_local std::vector<std::pair<int, QuadRule>> cache;
    for (auto& e : cache)
        if (e.first == n) return e.second;
    QuadRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = detail::legendre_pd(n, z);
            double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        auto [p, dp] = detail::legendre_pd(n, z);
        (void)p;
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = rule.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    cache.emplace_back(n, std::move(rule));
    return cache.back().second;
}

namespace detail {

// Orthonormal Hermite h_n(z) and h_{n-1}(z) (weight e^{-z^2}).
inline std::pair<double, double> hermite_on(int n, double z) {
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    double p1 = pim4, p2 = 0.0;
    for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt((double)j / (j + 1)) * p3;
    }
    return {p1, p2};
}

}  // namespace detail

// Gauss-Hermite (weight e^{-x^2}); orthonormal recurrence keeps n~512 stable.
inline const QuadRule& gauss_hermite(int n) {
    static thread_local std::vector<std::pair<int, QuadRule>> cache;
    for (auto& e : cache)
        if (e.first == n) return e.second;
    QuadRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    int m = (n + 1) / 2;
    std::vector<double> root(m);  // descending positive roots
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow((double)n, 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * root[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * root[1];
        else
            z = 2.0 * z - root[i - 2];
        for (int it = 0; it < 200; ++it) {
            auto [p1, p2] = detail::hermite_on(n, z);
            double dz = p1 / (std::sqrt(2.0 * n) * p2);
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        root[i] = z;
        auto [p1, p2] = detail::hermite_on(n, z);
        (void)p1;
        double w = 1.0 / ((double)n * p2 * p2);
        rule.x[n - 1 - i] = z;
        rule.x[i] = -z;
        rule.w[n - 1 - i] = w;
        rule.w[i] = w;
    }
    if (n % 2 == 1) rule.x[n / 2] = 0.0;
    cache.emplace_back(n, std::move(rule));
    return cache.back().second;
}

// Fixed-order Gauss-Legendre over [a, b].
template <typename F>
auto integrate_gl(F&& f, double a, double b, int order = 64) -> decltype(f(0.0)) {
    const auto& r = gauss_legendre(order);
    decltype(f(0.0)) acc{};
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < r.x.size(); ++i)
        acc += r.w[i] * f(mid + half * r.x[i]);
    return acc * half;
}

// Adaptive panel splitting against an absolute tolerance. The per-panel
// tolerance floor keeps boundary-layer refinements from demanding more than
// doubles can deliver.
template <typename F>
auto integrate_adaptive(F&& f, double a, double b, double abs_tol, int depth = 20)
    -> decltype(f(0.0)) {
    auto coarse = integrate_gl(f, a, b, 16);
    auto fine = integrate_gl(f, a, b, 32);
    if (std::abs(fine - coarse) <= abs_tol || depth == 0) return fine;
    double mid = 0.5 * (a + b);
    double next = std::max(abs_tol / 2.0, 1e-16);
    return integrate_adaptive(f, a, mid, next, depth - 1) +
           integrate_adaptive(f, mid, b, next, depth - 1);
}

// E[f(x + sqrt(t) Z)], Z standard normal, via Gauss-Hermite.
template <typename F>
auto gaussian_average(F&& f, double x, double t, int nodes) -> decltype(f(0.0)) {
    const auto& r = gauss_hermite(nodes);
    decltype(f(0.0)) acc{};
    double s = std::sqrt(2.0 * t);
    for (std::size_t i = 0; i < r.x.size(); ++i)
        acc += r.w[i] * f(x + s * r.x[i]);
    return acc / std::sqrt(pi);
}

}  // namespace edpa
