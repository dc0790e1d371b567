#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace causal_audit {

// Row-major dense symmetric solve helpers sized for the tiny systems this
// toolkit builds (design matrices with a handful of columns).

// In-place Cholesky factorization of a symmetric matrix stored row-major.
// Returns the index of the first non-positive pivot column, or nullopt on
// success. A failed pivot at column j means column j of the original design
// is (numerically) linearly dependent on columns 0..j-1.
inline std::optional<std::size_t> cholesky_factor(std::vector<double>& a, std::size_t n,
                                                  double rel_tol = 1e-12) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i * n + i]));
    const double floor = rel_tol * std::max(max_diag, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > floor)) return j;
        const double lj = std::sqrt(d);
        a[j * n + j] = lj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / lj;
        }
    }
    return std::nullopt;
}

// Solves L L^T x = b given the factor produced by cholesky_factor.
inline std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n,
                                          const std::vector<double>& b) {
    std::vector<double> x(b);
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * x[k];
        x[i] = s / l[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * x[k];
        x[ii] = s / l[ii * n + ii];
    }
    return x;
}

// Solves the SPD system a x = b; returns nullopt alongside the offending
// column index through `dependent_column` when the matrix is singular.
inline std::optional<std::vector<double>> solve_spd(std::vector<double> a, std::size_t n,
                                                    const std::vector<double>& b,
                                                    std::size_t* dependent_column = nullptr) {
    if (auto bad = cholesky_factor(a, n)) {
        if (dependent_column) *dependent_column = *bad;
        return std::nullopt;
    }
    return cholesky_solve(a, n, b);
}

}  // namespace causal_audit
