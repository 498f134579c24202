// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "reentra/errors.hpp"

namespace reentra {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Deliberately minimal: the model code
/// below only ever needs matrix-vector products and rank-1 updates.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

inline double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

/// out = W x
inline void matvec(const Matrix& w, const double* x, double* out) {
    for (std::size_t r = 0; r < w.rows; ++r) out[r] = dot(w.row(r), x, w.cols);
}

/// out[0..ncols) += W^T y, as a sum of scaled rows so the access stays
/// sequential in memory. ncols may be smaller than w.cols when only a
/// prefix of the gradient is needed.
inline void matvec_t_accum(const Matrix& w, const double* y, double* out, std::size_t ncols) {
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double yr = y[r];
        if (yr == 0.0) continue;
        const double* wr = w.row(r);
        for (std::size_t c = 0; c < ncols; ++c) out[c] += yr * wr[c];
    }
}

/// W += y x^T
inline void outer_accum(Matrix& w, const double* y, const double* x) {
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double yr = y[r];
        if (yr == 0.0) continue;
        double* wr = w.row(r);
        for (std::size_t c = 0; c < w.cols; ++c) wr[c] += yr * x[c];
    }
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// Numerically safe logistic sigmoid; saturates instead of overflowing.
inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double cosine(const Vec& x, const Vec& y) {
    double xy = dot(x.data(), y.data(), x.size());
    double xx = dot(x.data(), x.data(), x.size());
    double yy = dot(y.data(), y.data(), y.size());
    if (xx == 0.0 || yy == 0.0) return 0.0;
    return xy / std::sqrt(xx * yy);
}

}  // namespace reentra
