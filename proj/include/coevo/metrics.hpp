#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "coevo/errors.hpp"
#include "coevo/matrix.hpp"

namespace coevo {

/// Gaussian fit of a sample cloud: the two numbers the Frechet distance reads.
struct GaussianMoments {
    std::vector<double> mean;
    Matrix cov;
    std::size_t n_samples = 0;

    std::size_t dim() const { return mean.size(); }
};

/// Sample mean and unbiased (n-1) covariance. Requires n >= d + 1 so the
/// covariance estimate has full rank generically.
inline GaussianMoments fit_moments(const Matrix& samples) {
    const std::size_t n = samples.rows;
    const std::size_t d = samples.cols;
    require(n >= d + 1, "fit_moments: need at least d + 1 samples");

    GaussianMoments g;
    g.n_samples = n;
    g.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = samples.row(i);
        for (std::size_t j = 0; j < d; ++j) g.mean[j] += row[j];
    }
    for (double& v : g.mean) v /= static_cast<double>(n);

    g.cov = Matrix(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = samples.row(i);
        for (std::size_t a = 0; a < d; ++a) {
            const double da = row[a] - g.mean[a];
            for (std::size_t b = a; b < d; ++b) g.cov(a, b) += da * (row[b] - g.mean[b]);
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            g.cov(a, b) /= denom;
            g.cov(b, a) = g.cov(a, b);
        }
    return g;
}

namespace detail {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns eigenvalues;
/// fills V with eigenvectors as columns. Small d only (here d <= a few dozen).
inline std::vector<double> jacobi_eigen(Matrix m, Matrix& v) {
    const std::size_t d = m.rows;
    require(m.cols == d, "jacobi_eigen: matrix not square");
    v = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += m(p, q) * m(p, q);
        if (off <= 1e-30) break;

        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<double> eig(d);
    for (std::size_t i = 0; i < d; ++i) eig[i] = m(i, i);
    return eig;
}

inline constexpr double kPsdEigenTolerance = 1e-10;

} // namespace detail

/// Principal square root of a symmetric positive semi-definite matrix, by
/// eigendecomposition: V diag(sqrt(lambda)) V^T. Eigenvalues in
/// [-1e-10, 0) are treated as zero; anything more negative is an error.
inline Matrix sqrtm_spd(const Matrix& m) {
    const std::size_t d = m.rows;
    require(m.cols == d, "sqrtm_spd: matrix not square");
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12)
                throw contract_violation("sqrtm_spd: matrix not symmetric");

    Matrix v;
    const std::vector<double> eig = detail::jacobi_eigen(m, v);
    std::vector<double> root(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (eig[i] < -detail::kPsdEigenTolerance)
            throw numeric_error("sqrtm_spd: eigenvalue " + std::to_string(eig[i]) +
                                " below PSD tolerance");
        root[i] = std::sqrt(std::max(eig[i], 0.0));
    }
    // V diag(root) V^T
    Matrix s(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += v(i, k) * root[k] * v(j, k);
            s(i, j) = acc;
            s(j, i) = acc;
        }
    return s;
}

namespace detail {

// Total order on moments so frechet_distance can evaluate each unordered pair
// in one canonical argument order (bitwise symmetry).
inline bool moments_less(const GaussianMoments& a, const GaussianMoments& b) {
    for (std::size_t i = 0; i < a.mean.size(); ++i) {
        if (a.mean[i] != b.mean[i]) return a.mean[i] < b.mean[i];
    }
    for (std::size_t i = 0; i < a.cov.data.size(); ++i) {
        if (a.cov.data[i] != b.cov.data[i]) return a.cov.data[i] < b.cov.data[i];
    }
    return false;
}

inline double frechet_ordered(const GaussianMoments& p, const GaussianMoments& q) {
    double mean_term = 0.0;
    for (std::size_t i = 0; i < p.mean.size(); ++i) {
        const double d = p.mean[i] - q.mean[i];
        mean_term += d * d;
    }

    // tr(sqrt(S1 S2)) computed on the symmetric similar matrix A S2 A, A = sqrt(S1).
    const Matrix a = sqrtm_spd(p.cov);
    Matrix inner = matmul(matmul(a, q.cov), a);
    for (std::size_t i = 0; i < inner.rows; ++i)
        for (std::size_t j = i + 1; j < inner.cols; ++j) {
            const double sym = 0.5 * (inner(i, j) + inner(j, i));
            inner(i, j) = sym;
            inner(j, i) = sym;
        }
    double trace_term = trace(p.cov) + trace(q.cov) - 2.0 * trace(sqrtm_spd(inner));
    if (trace_term < 0.0) {
        if (trace_term < -1e-8)
            throw numeric_error("frechet_distance: negative trace residue " +
                                std::to_string(trace_term));
        trace_term = 0.0;
    }
    return mean_term + trace_term;
}

} // namespace detail

/// Squared Frechet (2-Wasserstein) distance between two Gaussian fits:
/// |mu1 - mu2|^2 + tr(S1 + S2 - 2 sqrt(S1 S2)). Lower is better. Evaluated in
/// a canonical argument order so fd(p, q) == fd(q, p) exactly as computed.
inline double frechet_distance(const GaussianMoments& p, const GaussianMoments& q) {
    require(p.dim() == q.dim() && p.cov.rows == q.cov.rows,
            "frechet_distance: dimension mismatch");
    if (detail::moments_less(q, p)) return detail::frechet_ordered(q, p);
    return detail::frechet_ordered(p, q);
}

} // namespace coevo
