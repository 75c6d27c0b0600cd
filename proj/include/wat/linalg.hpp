#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace wat {

using Vec = std::vector<double>;

// Dense row-major matrix. All models and datasets here are tiny, so no BLAS.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    std::span<const double> row(int i) const {
        return {data.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)};
    }
    std::span<double> row(int i) {
        return {data.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)};
    }

    Vec row_vec(int i) const {
        auto r = row(i);
        return Vec(r.begin(), r.end());
    }

    bool operator==(const Matrix&) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y = M x
inline Vec matvec(const Matrix& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("matvec: size mismatch");
    Vec y(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) y[i] = dot(m.row(i), x);
    return y;
}

// y = M^T x
inline Vec matvec_t(const Matrix& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.rows) throw std::invalid_argument("matvec_t: size mismatch");
    Vec y(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        auto r = m.row(i);
        for (int j = 0; j < m.cols; ++j) y[j] += r[j] * x[i];
    }
    return y;
}

// M += c * u v^T
inline void add_outer(Matrix& m, double c, std::span<const double> u, std::span<const double> v) {
    for (int i = 0; i < m.rows; ++i) {
        auto r = m.row(i);
        double cu = c * u[i];
        for (int j = 0; j < m.cols; ++j) r[j] += cu * v[j];
    }
}

inline void axpy(double a, const Vec& x, Vec& y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double norm_p(std::span<const double> v, double p) {
    if (p < 1.0) throw std::invalid_argument("norm_p: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::fabs(x));
        return m;
    }
    double s = 0.0;
    for (double x : v) s += std::pow(std::fabs(x), p);
    return std::pow(s, 1.0 / p);
}

}  // namespace wat
