#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "coevo/errors.hpp"

namespace coevo {

/// Best-score-per-run sample for one training method.
struct MethodSample {
    std::string method;
    std::vector<double> values;
};

struct Summary {
    double median = 0.0;
    double mean = 0.0;
    double std_dev = 0.0; // sample standard deviation, n-1 denominator
};

inline double median_of(std::span<const double> values) {
    require(!values.empty(), "median: empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean_of(std::span<const double> values) {
    require(!values.empty(), "mean: empty sample");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

inline double sample_std(std::span<const double> values) {
    require(values.size() >= 2, "std: need at least 2 values");
    const double m = mean_of(values);
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(values.size() - 1));
}

inline Summary summarize(std::span<const double> values) {
    require(values.size() >= 2, "summarize: need at least 2 values");
    return Summary{median_of(values), mean_of(values), sample_std(values)};
}

inline Summary summarize(const MethodSample& s) { return summarize(std::span(s.values)); }

namespace detail {

// Continued-fraction core of the regularized incomplete beta (Lentz's method).
inline double beta_cont_fraction(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-15;
    constexpr double fpmin = 1e-300;

    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

/// Regularized incomplete beta I_x(a, b); the t-distribution CDF reduces to it,
/// which keeps p-values free of external statistics tables.
inline double reg_inc_beta(double a, double b, double x) {
    require(a > 0.0 && b > 0.0, "reg_inc_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::beta_cont_fraction(a, b, x) / a;
    return 1.0 - bt * detail::beta_cont_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of a t statistic with df degrees of freedom.
inline double t_two_sided_p(double t, double df) {
    require(df > 0.0, "t_two_sided_p: df must be positive");
    if (!std::isfinite(t)) return 0.0;
    return reg_inc_beta(0.5 * df, 0.5, df / (df + t * t));
}

inline constexpr double kSignificanceLevel = 0.05;

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
    bool significant = false;
    bool degenerate = false; // zero variance with unequal means
};

/// Two-sample Student t-test. Pooled variance by default (the protocol's
/// "Student t-statistic"); `welch` switches to the unequal-variance form.
inline TTestResult student_t(std::span<const double> a, std::span<const double> b,
                             bool welch = false) {
    require(a.size() >= 2 && b.size() >= 2, "student_t: each sample needs >= 2 values");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double va = sample_std(a) * sample_std(a);
    const double vb = sample_std(b) * sample_std(b);

    TTestResult r;
    double denom, df;
    if (welch) {
        const double qa = va / na, qb = vb / nb;
        denom = std::sqrt(qa + qb);
        df = (qa + qb) * (qa + qb) /
             (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    } else {
        const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        denom = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
        df = na + nb - 2.0;
    }

    if (denom == 0.0) {
        if (ma == mb) {
            r.t = 0.0;
            r.p = 1.0;
            r.df = welch ? 0.0 : na + nb - 2.0;
            return r;
        }
        r.t = ma > mb ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        r.df = na + nb - 2.0;
        r.significant = true;
        r.degenerate = true;
        return r;
    }

    r.t = (ma - mb) / denom;
    r.df = df;
    r.p = t_two_sided_p(r.t, df);
    r.significant = r.p < kSignificanceLevel;
    return r;
}

/// One cell of the pairwise method-comparison matrix. ratio > 1 means the row
/// method reaches lower (better) scores than the column method.
struct ComparisonCell {
    std::string row_method;
    std::string col_method;
    double median_ratio = 1.0;
    bool ratio_defined = true;
    double t_statistic = 0.0;
    double p_value = 1.0;
    bool significant = false;
};

inline std::vector<std::vector<ComparisonCell>> comparison_matrix(
    const std::vector<MethodSample>& samples, bool welch = false) {
    require(samples.size() >= 2, "comparison_matrix: need >= 2 methods");
    const std::size_t n = samples.size();
    std::vector<double> medians(n);
    for (std::size_t i = 0; i < n; ++i) {
        require(!samples[i].values.empty(), "comparison_matrix: empty sample");
        medians[i] = median_of(samples[i].values);
    }

    std::vector<std::vector<ComparisonCell>> m(n, std::vector<ComparisonCell>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            ComparisonCell& cell = m[r][c];
            cell.row_method = samples[r].method;
            cell.col_method = samples[c].method;
            if (r == c) continue; // identity diagonal: ratio 1, not significant
            if (medians[r] == 0.0) {
                cell.ratio_defined = false;
            } else {
                cell.median_ratio = medians[c] / medians[r];
            }
            const TTestResult t = student_t(samples[r].values, samples[c].values, welch);
            cell.t_statistic = t.t;
            cell.p_value = t.p;
            cell.significant = t.significant;
        }
    }
    return m;
}

} // namespace coevo
