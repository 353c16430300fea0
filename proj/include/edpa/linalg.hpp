#pragma once

#include <vector>

#include "common.hpp"

namespace edpa {

// Row-major dense complex matrix, small N only.
struct CMatrix {
    int n = 0;
    std::vector<cplx> a;
    explicit CMatrix(int n_) : n(n_), a((std::size_t)n_ * n_) {}
    cplx& operator()(int i, int j) { return a[(std::size_t)i * n + j]; }
    const cplx& operator()(int i, int j) const { return a[(std::size_t)i * n + j]; }
};

struct DetResult {
    cplx det{0.0, 0.0};
    double cond = 0.0;         // 1-norm condition estimate
    bool ill_conditioned = false;  // cond > 1e10
};

// Determinant by LU with partial pivoting; condition via explicit inverse
// (fine at the N<=8 sizes used here).
inline DetResult det_lu(CMatrix m, bool want_cond = true) {
    const int n = m.n;
    DetResult out;
    double norm1 = 0.0;
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::abs(m(i, j));
        norm1 = std::max(norm1, s);
    }
    std::vector<int> piv(n);
    cplx det{1.0, 0.0};
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(m(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > best) { best = std::abs(m(i, k)); p = i; }
        piv[k] = p;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            det = -det;
        }
        if (best == 0.0) {
            out.det = 0.0;
            out.cond = std::numeric_limits<double>::infinity();
            out.ill_conditioned = true;
            return out;
        }
        det *= m(k, k);
        for (int i = k + 1; i < n; ++i) {
            cplx f = m(i, k) / m(k, k);
            m(i, k) = f;
            for (int j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    out.det = det;
    if (want_cond) {
        double inv_norm1 = 0.0;
        std::vector<cplx> col(n);
        for (int e = 0; e < n; ++e) {
            for (int i = 0; i < n; ++i) col[i] = (i == e) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
            for (int k = 0; k < n; ++k) {
                if (piv[k] != k) std::swap(col[k], col[piv[k]]);
                for (int i = k + 1; i < n; ++i) col[i] -= m(i, k) * col[k];
            }
            for (int k = n - 1; k >= 0; --k) {
                for (int j = k + 1; j < n; ++j) col[k] -= m(k, j) * col[j];
                col[k] /= m(k, k);
            }
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += std::abs(col[i]);
            inv_norm1 = std::max(inv_norm1, s);
        }
        out.cond = norm1 * inv_norm1;
        out.ill_conditioned = out.cond > 1e10;
    }
    return out;
}

}  // namespace edpa
