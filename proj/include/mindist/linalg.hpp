#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "mindist/tensor.hpp"

// Dense symmetric kernels for the tiny matrices this library produces
// (metric blocks and Jacobian Gram matrices, n rarely above 3). Kept
// dependency-free on purpose: the positive-definite factorization is not
// just a solver here, its *failure* is the library's singularity signal,
// so the pivoting behavior has to stay fully under our control.

namespace mindist {

// In-place lower Cholesky of a symmetric matrix. Returns false as soon as
// a pivot fails to be strictly positive (or is NaN) — that is the caller's
// singularity signal. No relative pivot threshold: a metric block can be
// legitimately tiny (e.g. sin²θ near a chart pole) and still invertible.
inline bool cholesky_factor(Mat& a) {
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0)) return false; // catches d <= 0 and NaN
        d = std::sqrt(d);
        a(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / d;
        }
    }
    return true;
}

// inv = a⁻¹ for symmetric positive definite a, via Cholesky. Returns false
// if the factorization fails. `work` is clobbered. All three may alias in
// size only, not storage.
inline bool spd_invert(const Mat& a, Mat& inv, Mat& work) {
    const std::size_t n = a.rows();
    work = a;
    if (!cholesky_factor(work)) return false;

    // Invert the lower factor in place: L⁻¹ is lower triangular.
    for (std::size_t j = 0; j < n; ++j) {
        work(j, j) = 1.0 / work(j, j);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += work(i, k) * work(k, j);
            work(i, j) = -s / work(i, i);
        }
    }

    // a⁻¹ = L⁻ᵀ L⁻¹, filled symmetrically.
    inv.resize(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = j; k < n; ++k) s += work(k, i) * work(k, j);
            inv(i, j) = s;
            inv(j, i) = s;
        }
    return true;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending
// order written into `eig` (size n). Convergence is quadratic; for the
// 1-3 dimensional Gram matrices seen here a handful of sweeps suffices.
inline void sym_eigenvalues(Mat a, std::span<double> eig) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
}

} // namespace mindist
