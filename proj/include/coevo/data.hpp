#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "coevo/errors.hpp"
#include "coevo/matrix.hpp"
#include "coevo/rng.hpp"

namespace coevo {

enum class MixtureLayout { ring, grid };

inline const char* layout_name(MixtureLayout l) {
    return l == MixtureLayout::ring ? "ring" : "grid";
}

inline MixtureLayout layout_from_name(const std::string& s) {
    if (s == "ring") return MixtureLayout::ring;
    if (s == "grid") return MixtureLayout::grid;
    throw config_error("unknown mixture layout: " + s);
}

/// 2-D Gaussian mixture: the synthetic stand-in for a real dataset. The default
/// experiment uses the 8-mode ring, the classic mode-collapse probe.
struct MixtureSpec {
    std::size_t n_modes = 8;
    MixtureLayout layout = MixtureLayout::ring;
    double extent = 2.0;   // ring radius, or half-width of the grid square
    double mode_std = 0.02;
    std::vector<double> weights; // empty means uniform

    void validate() const {
        require(n_modes >= 1, "mixture: n_modes must be >= 1");
        require(extent > 0.0, "mixture: extent must be positive");
        require(mode_std > 0.0, "mixture: mode_std must be positive");
        if (!weights.empty()) {
            require(weights.size() == n_modes, "mixture: weights size must equal n_modes");
            double total = 0.0;
            for (double w : weights) {
                require(w >= 0.0, "mixture: weights must be non-negative");
                total += w;
            }
            require(std::abs(total - 1.0) <= 1e-12, "mixture: weights must sum to 1");
        }
    }

    std::vector<std::array<double, 2>> centers() const {
        std::vector<std::array<double, 2>> c;
        c.reserve(n_modes);
        if (layout == MixtureLayout::ring) {
            constexpr double two_pi = 6.283185307179586476925286766559;
            for (std::size_t i = 0; i < n_modes; ++i) {
                const double angle = two_pi * static_cast<double>(i) / static_cast<double>(n_modes);
                c.push_back({extent * std::cos(angle), extent * std::sin(angle)});
            }
        } else {
            const std::size_t side =
                static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_modes))));
            for (std::size_t i = 0; i < n_modes; ++i) {
                const std::size_t gx = i % side;
                const std::size_t gy = i / side;
                auto coord = [&](std::size_t g) {
                    return side == 1 ? 0.0
                                     : -extent + 2.0 * extent * static_cast<double>(g) /
                                                     static_cast<double>(side - 1);
                };
                c.push_back({coord(gx), coord(gy)});
            }
        }
        return c;
    }

    double weight(std::size_t mode) const {
        return weights.empty() ? 1.0 / static_cast<double>(n_modes) : weights[mode];
    }

    /// Closed-form mixture mean: sum of weighted centers.
    std::array<double, 2> analytic_mean() const {
        std::array<double, 2> mu{0.0, 0.0};
        const auto c = centers();
        for (std::size_t i = 0; i < n_modes; ++i) {
            mu[0] += weight(i) * c[i][0];
            mu[1] += weight(i) * c[i][1];
        }
        return mu;
    }

    /// Closed-form mixture covariance: sigma^2 I + sum_i w_i c_i c_i^T - mu mu^T.
    Matrix analytic_cov() const {
        const auto c = centers();
        const auto mu = analytic_mean();
        Matrix cov(2, 2);
        cov(0, 0) = cov(1, 1) = mode_std * mode_std;
        for (std::size_t i = 0; i < n_modes; ++i) {
            const double w = weight(i);
            cov(0, 0) += w * c[i][0] * c[i][0];
            cov(0, 1) += w * c[i][0] * c[i][1];
            cov(1, 1) += w * c[i][1] * c[i][1];
        }
        cov(0, 0) -= mu[0] * mu[0];
        cov(0, 1) -= mu[0] * mu[1];
        cov(1, 1) -= mu[1] * mu[1];
        cov(1, 0) = cov(0, 1);
        return cov;
    }
};

/// Draw n samples: pick a mode (uniform index draw, or CDF inversion for
/// explicit weights), then add isotropic Gaussian noise. Per sample the stream
/// advances by a fixed draw count, so output is bitwise reproducible.
inline Matrix sample(const MixtureSpec& spec, std::size_t n, SeededStream& stream) {
    spec.validate();
    require(n >= 1, "sample: n must be >= 1");
    const auto c = spec.centers();
    Matrix out(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t mode;
        if (spec.weights.empty()) {
            mode = stream.next_index(spec.n_modes);
        } else {
            const double u = stream.next_unit();
            double acc = 0.0;
            mode = spec.n_modes - 1;
            for (std::size_t m = 0; m < spec.n_modes; ++m) {
                acc += spec.weights[m];
                if (u < acc) {
                    mode = m;
                    break;
                }
            }
        }
        out(i, 0) = c[mode][0] + spec.mode_std * stream.next_normal();
        out(i, 1) = c[mode][1] + spec.mode_std * stream.next_normal();
    }
    return out;
}

/// Nearest-center assignment; the mode-collapse diagnostic.
struct ModeAssignment {
    std::vector<std::size_t> index;  // per-sample nearest mode
    std::vector<std::size_t> counts; // per-mode sample count
};

inline ModeAssignment mode_assignment(const Matrix& samples, const MixtureSpec& spec) {
    require(samples.cols == 2, "mode_assignment: samples must be n x 2");
    const auto c = spec.centers();
    ModeAssignment a;
    a.index.resize(samples.rows);
    a.counts.assign(spec.n_modes, 0);
    for (std::size_t i = 0; i < samples.rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_m = 0;
        for (std::size_t m = 0; m < spec.n_modes; ++m) {
            const double dx = samples(i, 0) - c[m][0];
            const double dy = samples(i, 1) - c[m][1];
            const double d2 = dx * dx + dy * dy;
            if (d2 < best) {
                best = d2;
                best_m = m;
            }
        }
        a.index[i] = best_m;
        a.counts[best_m] += 1;
    }
    return a;
}

} // namespace coevo
