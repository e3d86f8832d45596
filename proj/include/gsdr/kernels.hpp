#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsdr/common.hpp"

namespace gsdr {

enum class KernelFamily { gaussian, polynomial };

struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double sigma = 1.0;  // gaussian length-scale
    int degree = 2;      // polynomial degree
    double offset = 1.0; // polynomial offset

    void validate() const {
        if (family == KernelFamily::gaussian && !(sigma > 0))
            throw input_error("kernel: sigma must be positive");
        if (family == KernelFamily::polynomial && degree < 1)
            throw input_error("kernel: degree must be >= 1");
    }
};

/// Gram matrix of reproducing-kernel evaluations over the sample.
struct GramMatrix {
    Matrix entries;
    bool centered = false;
    KernelSpec kernel;

    Eigen::Index n() const { return entries.rows(); }
};

inline double kernel_eval(const KernelSpec& k, const Vector& s, const Vector& t) {
    if (s.size() != t.size())
        throw input_error("kernel_eval: vectors have lengths " + std::to_string(s.size()) +
                          " and " + std::to_string(t.size()));
    k.validate();
    switch (k.family) {
        case KernelFamily::gaussian:
            return std::exp(-(s - t).squaredNorm() / (2.0 * k.sigma * k.sigma));
        case KernelFamily::polynomial:
            return std::pow(s.dot(t) + k.offset, k.degree);
    }
    throw input_error("kernel_eval: unknown kernel family");
}

/// Gram matrix R(x_i, x_j) over the rows of X.
inline GramMatrix gram(const Matrix& X, const KernelSpec& k) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw input_error("gram: need at least 2 rows");
    k.validate();
    Matrix R(n, n);
    if (k.family == KernelFamily::gaussian) {
        // ||x_i - x_j||^2 via the usual norm expansion, then exponentiate.
        Vector sq = X.rowwise().squaredNorm();
        R.noalias() = -2.0 * X * X.transpose();
        R.colwise() += sq;
        R.rowwise() += sq.transpose();
        R = (-R.cwiseMax(0.0) / (2.0 * k.sigma * k.sigma)).array().exp();
    } else {
        R.noalias() = X * X.transpose();
        R = (R.array() + k.offset).pow(k.degree);
    }
    // Symmetrize away rounding asymmetry from the matrix products.
    R = 0.5 * (R + R.transpose()).eval();
    return GramMatrix{std::move(R), false, k};
}

/// Cross-kernel block R(x_i, z_j) between training rows X and new rows Z.
inline Matrix cross_gram(const Matrix& X, const Matrix& Z, const KernelSpec& k) {
    if (X.cols() != Z.cols())
        throw input_error("cross_gram: column counts differ");
    k.validate();
    Matrix R(X.rows(), Z.rows());
    if (k.family == KernelFamily::gaussian) {
        Vector sx = X.rowwise().squaredNorm();
        Vector sz = Z.rowwise().squaredNorm();
        R.noalias() = -2.0 * X * Z.transpose();
        R.colwise() += sx;
        R.rowwise() += sz.transpose();
        R = (-R.cwiseMax(0.0) / (2.0 * k.sigma * k.sigma)).array().exp();
    } else {
        R.noalias() = X * Z.transpose();
        R = (R.array() + k.offset).pow(k.degree);
    }
    return R;
}

/// Double-centering (I - J/n) R (I - J/n). Refuses to re-center.
inline GramMatrix center_gram(const GramMatrix& R) {
    if (R.centered) throw input_error("center_gram: matrix is already centered");
    const Eigen::Index n = R.n();
    Vector row_mean = R.entries.rowwise().mean();
    double grand_mean = row_mean.mean();
    Matrix C = R.entries;
    C.colwise() -= row_mean;
    C.rowwise() -= row_mean.transpose();
    C.array() += grand_mean;
    C = 0.5 * (C + C.transpose()).eval();
    return GramMatrix{std::move(C), true, R.kernel};
}

/// Median of pairwise Euclidean distances between the rows of X.
inline double median_heuristic_sigma(const Matrix& X) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw input_error("median_heuristic_sigma: need at least 2 rows");
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            dists.push_back((X.row(i) - X.row(j)).norm());
    std::sort(dists.begin(), dists.end());
    std::size_t m = dists.size();
    double med = (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    if (!(med > 0))
        throw input_error("median_heuristic_sigma: degenerate input (median pairwise distance is 0)");
    return med;
}

}  // namespace gsdr
