#pragma once

// Dense least squares by Householder QR. Sized for the small, tall systems
// the trend fits produce (tens of rows, at most a handful of columns).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"

namespace slicecast::linalg {

// Column-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Relative threshold on |R_ii| below which a column counts as dependent.
inline constexpr double kRankTolerance = 1e-12;

// Minimizes ||A x - b||_2 for rows >= cols. Throws NumericalError when A is
// numerically rank deficient.
inline std::vector<double> least_squares(Matrix a, std::vector<double> b) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (b.size() != m) throw ValidationError("least squares: right-hand side length mismatch");
    if (m < n) throw ValidationError("least squares: fewer rows than unknowns");

    double max_col_norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += a(i, j) * a(i, j);
        max_col_norm = std::max(max_col_norm, std::sqrt(s));
    }
    if (!(max_col_norm > 0.0)) throw NumericalError("least squares: design matrix is zero");

    std::vector<double> v(m);
    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        if (norm <= kRankTolerance * max_col_norm) throw NumericalError("least squares: rank-deficient design matrix");

        const double alpha = a(k, k) > 0.0 ? -norm : norm;
        for (std::size_t i = k; i < m; ++i) v[i] = a(i, k);
        v[k] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];

        // Apply H = I - 2 v v^T / (v^T v) to the trailing columns and to b.
        for (std::size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += v[i] * a(i, j);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < m; ++i) a(i, j) -= f * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < m; ++i) dot += v[i] * b[i];
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < m; ++i) b[i] -= f * v[i];
        a(k, k) = alpha;
    }

    std::vector<double> x(n);
    for (std::size_t kk = n; kk-- > 0;) {
        double s = b[kk];
        for (std::size_t j = kk + 1; j < n; ++j) s -= a(kk, j) * x[j];
        x[kk] = s / a(kk, kk);
    }
    return x;
}

} // namespace slicecast::linalg
