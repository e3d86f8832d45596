#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsdr/common.hpp"

namespace gsdr {

enum class SmootherSource { response, projected_features };

/// Column-stochastic Nadaraya-Watson weight matrix: column j holds the
/// weights that estimate a conditional expectation at point j.
struct SmootherMatrix {
    Matrix weights;
    double bandwidth = 0.0;
    SmootherSource source = SmootherSource::response;

    Eigen::Index n() const { return weights.rows(); }
};

struct BandwidthSpec {
    enum class Mode { automatic, fixed };
    Mode mode = Mode::automatic;
    double value = 0.0;

    static BandwidthSpec auto_select() { return {}; }
    static BandwidthSpec fixed(double h) {
        if (!(h > 0)) throw input_error("bandwidth: fixed value must be positive");
        return {Mode::fixed, h};
    }
};

/// Product Epanechnikov kernel: prod_j (0.75/h) (1 - (u_j/h)^2) 1{|u_j| <= h}.
inline double epanechnikov(const Vector& u, double h) {
    if (!(h > 0)) throw input_error("epanechnikov: bandwidth must be positive");
    double v = 1.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        double t = u[j] / h;
        // Negated comparison so non-finite offsets fall outside the support.
        if (!(t >= -1.0 && t <= 1.0)) return 0.0;
        v *= 0.75 / h * (1.0 - t * t);
    }
    return v;
}

namespace detail {

inline double epanechnikov_1d(double u, double h) {
    double t = u / h;
    return (t >= -1.0 && t <= 1.0) ? 0.75 / h * (1.0 - t * t) : 0.0;
}

inline double silverman_h(double sigma_bar, Eigen::Index n, Eigen::Index d) {
    return 1.06 * sigma_bar * std::pow(static_cast<double>(n), -1.0 / (4.0 + static_cast<double>(d)));
}

// Robust per-coordinate scale: min(sd, IQR/1.349), falling back to whichever
// of the two is usable. This is what ksdensity-style default selectors do and
// it keeps the bandwidth sane under heavy-tailed (even overflowing) values.
inline double robust_scale(Vector col) {
    const Eigen::Index n = col.size();
    double sd = std::numeric_limits<double>::infinity();
    if (col.allFinite()) {
        double mean = col.mean();
        double s = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n - 1));
        if (std::isfinite(s)) sd = s;
    }
    std::sort(col.data(), col.data() + n);
    auto quantile = [&](double q) {
        double pos = q * static_cast<double>(n - 1);
        Eigen::Index lo = static_cast<Eigen::Index>(pos);
        double frac = pos - static_cast<double>(lo);
        return lo + 1 < n ? col[lo] * (1.0 - frac) + col[lo + 1] * frac : col[lo];
    };
    double iqr = quantile(0.75) - quantile(0.25);
    if (std::isfinite(iqr) && iqr > 0 && sd > 0) return std::min(sd, iqr / 1.349);
    return std::isfinite(sd) ? sd : 0.0;
}

}  // namespace detail

/// Silverman-type bandwidth over the rows of `values` (n points in d dims):
/// h = 1.06 * sigma_bar * n^(-1/(4+d)), sigma_bar the mean per-coordinate
/// scale, clamped below by 1e-6 * sigma_bar.
inline double default_bandwidth(const Matrix& values) {
    const Eigen::Index n = values.rows();
    const Eigen::Index d = values.cols();
    if (n < 2) throw input_error("default_bandwidth: need at least 2 rows");
    double sigma_bar = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) sigma_bar += detail::robust_scale(values.col(j));
    sigma_bar /= static_cast<double>(d);
    if (!(sigma_bar > 0))
        throw input_error("default_bandwidth: zero spread in all coordinates");
    return std::max(detail::silverman_h(sigma_bar, n, d), 1e-6 * sigma_bar);
}

/// Nadaraya-Watson weights over the rows of `values`:
/// weights(i, j) = K_h(v_i - v_j) / sum_l K_h(v_l - v_j).
/// The diagonal term is part of every column sum, so denominators stay
/// positive; a column that still underflows to zero falls back to uniform.
inline SmootherMatrix nw_weights(const Matrix& values, double h,
                                 SmootherSource source = SmootherSource::response) {
    if (!(h > 0)) throw input_error("nw_weights: bandwidth must be positive");
    const Eigen::Index n = values.rows();
    const Eigen::Index d = values.cols();
    Matrix W(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        W(i, i) = std::pow(0.75 / h, static_cast<double>(d));
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double v = 1.0;
            for (Eigen::Index m = 0; m < d; ++m) {
                v *= detail::epanechnikov_1d(values(i, m) - values(j, m), h);
                if (v == 0.0) break;
            }
            W(i, j) = v;
            W(j, i) = v;
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        double s = W.col(j).sum();
        if (s > 0)
            W.col(j) /= s;
        else
            W.col(j).setConstant(1.0 / static_cast<double>(n));
    }
    return SmootherMatrix{std::move(W), h, source};
}

/// Resolve a BandwidthSpec against the values it will smooth.
inline double resolve_bandwidth(const BandwidthSpec& spec, const Matrix& values) {
    return spec.mode == BandwidthSpec::Mode::fixed ? spec.value : default_bandwidth(values);
}

}  // namespace gsdr
