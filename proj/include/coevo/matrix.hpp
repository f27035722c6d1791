#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "coevo/errors.hpp"

namespace coevo {

/// Dense row-major matrix of doubles. The only substrate the engine needs:
/// activations, weights and sample clouds are all small (widths <= 64, d = 2).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

/// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul: inner dimensions disagree");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

/// C = A * B^T. This is the forward-pass kernel: X (n x in) times W (out x in).
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols == b.cols, "matmul_nt: inner dimensions disagree");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            crow[j] = acc;
        }
    }
    return c;
}

/// C = A^T * B. Weight-gradient kernel: delta (n x out) against input (n x in).
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows == b.rows, "matmul_tn: inner dimensions disagree");
    Matrix c(a.cols, b.cols);
    for (std::size_t n = 0; n < a.rows; ++n) {
        const double* arow = a.row(n);
        const double* brow = b.row(n);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double ani = arow[i];
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += ani * brow[j];
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline void add_row_vector(Matrix& m, const std::vector<double>& v) {
    require(v.size() == m.cols, "add_row_vector: width mismatch");
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += v[j];
    }
}

inline std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> s(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols; ++j) s[j] += row[j];
    }
    return s;
}

inline double trace(const Matrix& m) {
    require(m.rows == m.cols, "trace: matrix not square");
    double t = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) t += m(i, i);
    return t;
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "frobenius_distance: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Stack a on top of b (column counts must agree).
inline Matrix vstack(const Matrix& a, const Matrix& b) {
    require(a.cols == b.cols, "vstack: width mismatch");
    Matrix c(a.rows + b.rows, a.cols);
    std::copy(a.data.begin(), a.data.end(), c.data.begin());
    std::copy(b.data.begin(), b.data.end(), c.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
    return c;
}

} // namespace coevo
