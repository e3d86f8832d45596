#pragma once

#include <algorithm>
#include <cmath>

#include "gsdr/common.hpp"
#include "gsdr/kernels.hpp"
#include "gsdr/rng.hpp"
#include "gsdr/sdr.hpp"

namespace gsdr {

namespace detail {

inline Matrix center_columns(const Matrix& M) {
    return M.colwise() - M.rowwise().mean().eval();
}

// (I - J/n) G (I - J/n) for a plain square matrix.
inline Matrix double_center(const Matrix& G) {
    Vector row_mean = G.rowwise().mean();
    double grand = row_mean.mean();
    Matrix C = G;
    C.colwise() -= row_mean;
    C.rowwise() -= row_mean.transpose();
    C.array() += grand;
    return C;
}

}  // namespace detail

/// Squared multiple correlation between two multivariate samples (columns are
/// observations): the mean of the nonzero eigenvalues of
///   var(u)^{-1/2} cov(u,v) var(v)^{-1} cov(v,u) var(u)^{-1/2}.
/// Eigenvalues below 1e-10 of the largest are treated as zero. A rank-zero
/// argument yields 0 and sets *rank_warning when given.
inline double multiple_correlation(const Matrix& U, const Matrix& V,
                                   bool* rank_warning = nullptr) {
    if (U.cols() != V.cols()) throw input_error("multiple_correlation: sample sizes differ");
    const Eigen::Index n = U.cols();
    if (n < 2) throw input_error("multiple_correlation: need at least 2 samples");
    if (rank_warning) *rank_warning = false;

    Matrix Uc = detail::center_columns(U);
    Matrix Vc = detail::center_columns(V);
    Matrix Suu = Uc * Uc.transpose() / static_cast<double>(n);
    Matrix Svv = Vc * Vc.transpose() / static_cast<double>(n);
    Matrix Suv = Uc * Vc.transpose() / static_cast<double>(n);
    if (!(Suu.trace() > 0) || !(Svv.trace() > 0)) {
        if (rank_warning) *rank_warning = true;
        return 0.0;
    }
    Suu += 1e-8 * Suu.trace() * Matrix::Identity(Suu.rows(), Suu.cols());
    Svv += 1e-8 * Svv.trace() * Matrix::Identity(Svv.rows(), Svv.cols());

    Eigen::SelfAdjointEigenSolver<Matrix> es_u(Suu);
    if (es_u.info() != Eigen::Success)
        throw numeric_error("multiple_correlation: eigensolver failed on var(u)");
    Vector lam_u = es_u.eigenvalues().cwiseMax(0.0);
    Matrix inv_sqrt_u = es_u.eigenvectors() *
                        lam_u.cwiseSqrt().cwiseInverse().asDiagonal() *
                        es_u.eigenvectors().transpose();

    Matrix M = inv_sqrt_u * Suv * Svv.ldlt().solve(Suv.transpose()) * inv_sqrt_u;
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es_m(M);
    if (es_m.info() != Eigen::Success)
        throw numeric_error("multiple_correlation: eigensolver failed");
    const Vector& lam = es_m.eigenvalues();
    double lam_max = lam[lam.size() - 1];
    if (!(lam_max > 0)) {
        if (rank_warning) *rank_warning = true;
        return 0.0;
    }
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] > 1e-10 * lam_max) {
            sum += lam[i];
            ++count;
        }
    }
    return std::clamp(sum / count, 0.0, 1.0);
}

/// First regularized kernel canonical correlation between the reduced
/// predictors (columns of U) and the response. Gaussian Grams at
/// median-heuristic scales, double-centered, Tikhonov term reg*m*I per block.
/// Degenerate inputs (constant U or y) score 0 so that CV can rank them last.
inline double kcca_score(const Matrix& U, const Vector& y, double reg = 0.1) {
    const Eigen::Index m = U.cols();
    if (m < 5) throw input_error("kcca_score: need at least 5 samples");
    if (y.size() != m) throw input_error("kcca_score: response length mismatch");
    if (!(reg > 0)) throw input_error("kcca_score: reg must be positive");

    KernelSpec ku, ky;
    try {
        ku.sigma = median_heuristic_sigma(U.transpose());
        ky.sigma = median_heuristic_sigma(Matrix(y));
    } catch (const input_error&) {
        return 0.0;
    }
    Matrix Gu = detail::double_center(gram(U.transpose(), ku).entries);
    Matrix Gy = detail::double_center(gram(Matrix(y), ky).entries);

    double gamma = reg * static_cast<double>(m);
    auto whiten = [&](const Matrix& G) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        if (es.info() != Eigen::Success) throw numeric_error("kcca_score: eigensolver failed");
        // (G^2 + gamma I)^{-1/2} G shares G's eigenbasis.
        Vector d = es.eigenvalues();
        Vector scaled = d.array() / (d.array().square() + gamma).sqrt();
        return Matrix(es.eigenvectors() * scaled.asDiagonal() * es.eigenvectors().transpose());
    };
    Matrix T = whiten(Gu) * whiten(Gy);
    Eigen::SelfAdjointEigenSolver<Matrix> es(T * T.transpose());
    if (es.info() != Eigen::Success) throw numeric_error("kcca_score: eigensolver failed");
    double rho2 = es.eigenvalues().maxCoeff();
    return std::clamp(std::sqrt(std::max(rho2, 0.0)), 0.0, 1.0);
}

struct KernelRidgeModel {
    Matrix U_train;  // q x n
    Vector alpha;
    double sigma = 1.0;
    double y_mean = 0.0;
};

/// Kernel ridge on the reduced predictors: (G + reg n I) alpha = y - ybar
/// with a gaussian Gram at the median-heuristic scale.
inline KernelRidgeModel kernel_ridge_fit(const Matrix& U, const Vector& y, double reg) {
    if (!(reg > 0)) throw input_error("kernel_ridge_fit: reg must be positive");
    const Eigen::Index n = U.cols();
    if (y.size() != n) throw input_error("kernel_ridge_fit: response length mismatch");
    KernelRidgeModel model;
    model.U_train = U;
    try {
        model.sigma = median_heuristic_sigma(U.transpose());
    } catch (const input_error&) {
        model.sigma = 1.0;  // constant inputs; predictions collapse to the mean
    }
    model.y_mean = y.mean();
    KernelSpec k;
    k.sigma = model.sigma;
    Matrix G = gram(U.transpose(), k).entries;
    G += reg * static_cast<double>(n) * Matrix::Identity(n, n);
    Eigen::LDLT<Matrix> ldlt(G);
    if (ldlt.info() != Eigen::Success) throw numeric_error("kernel_ridge_fit: solve failed");
    model.alpha = ldlt.solve(Vector(y.array() - model.y_mean));
    if (!model.alpha.allFinite()) throw numeric_error("kernel_ridge_fit: non-finite solution");
    return model;
}

inline Vector kernel_ridge_predict(const KernelRidgeModel& model, const Matrix& U_new) {
    if (U_new.rows() != model.U_train.rows())
        throw input_error("kernel_ridge_predict: dimension mismatch");
    KernelSpec k;
    k.sigma = model.sigma;
    Matrix cross = cross_gram(model.U_train.transpose(), U_new.transpose(), k);  // n x m
    return (cross.transpose() * model.alpha).array() + model.y_mean;
}

/// Mean absolute prediction error.
inline double pmae(const Vector& y_true, const Vector& y_pred) {
    if (y_true.size() != y_pred.size()) throw input_error("pmae: length mismatch");
    return (y_true - y_pred).cwiseAbs().mean();
}

enum class CvCriterion { kcca, prediction };

struct CvReport {
    std::vector<double> lambda_grid;
    std::vector<double> scores;  // mean KCCA, or negative mean squared error
    double best_lambda = 0.0;
    int fold_count = 0;
};

namespace detail {

// Quantile-stratified fold labels: indices are ordered by response, then each
// consecutive block of k gets a seeded permutation of the fold labels.
inline std::vector<int> stratified_folds(const Vector& y, int k, std::uint64_t seed) {
    const Eigen::Index n = y.size();
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return y[a] < y[b]; });
    Philox rng(seed, 0xF01D5u);
    std::vector<int> fold_of(n);
    std::vector<int> labels(k);
    for (Eigen::Index start = 0; start < n; start += k) {
        for (int j = 0; j < k; ++j) labels[j] = j;
        for (int j = k - 1; j > 0; --j)
            std::swap(labels[j], labels[static_cast<int>(rng.below(j + 1))]);
        for (int j = 0; j < k && start + j < n; ++j) fold_of[order[start + j]] = labels[j];
    }
    return fold_of;
}

inline DataSet subset(const DataSet& ds, const std::vector<Eigen::Index>& rows) {
    DataSet out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.p());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(rows[i]);
        out.y[static_cast<Eigen::Index>(i)] = ds.y[rows[i]];
    }
    out.predictor_names = ds.predictor_names;
    out.standardization = ds.standardization;
    return out;
}

}  // namespace detail

/// k-fold cross-validation over a lambda grid. Per fold the model is fit on
/// the retained data and held-out points are projected through the
/// cross-kernel; ties in the score go to the smaller lambda.
inline CvReport cv_select_lambda(const DataSet& ds, const FitConfig& cfg,
                                 const std::vector<double>& grid, int folds,
                                 CvCriterion criterion, double kcca_reg = 0.1,
                                 double ridge_reg = 1e-3) {
    check_dataset(ds);
    if (folds < 2) throw input_error("cv_select_lambda: need at least 2 folds");
    if (grid.empty()) throw input_error("cv_select_lambda: empty lambda grid");
    const Eigen::Index n = ds.n();
    if (n / folds < cfg.q + 2)
        throw input_error("cv_select_lambda: fold too small (need >= q+2 points per fold)");

    std::vector<int> fold_of = detail::stratified_folds(ds.y, folds, cfg.seed);
    std::vector<std::vector<Eigen::Index>> train_rows(folds), test_rows(folds);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int f = 0; f < folds; ++f)
            (fold_of[i] == f ? test_rows[f] : train_rows[f]).push_back(i);
    }
    for (int f = 0; f < folds; ++f)
        if (static_cast<Eigen::Index>(test_rows[f].size()) < cfg.q + 2)
            throw input_error("cv_select_lambda: fold too small (need >= q+2 points per fold)");

    CvReport report;
    report.fold_count = folds;
    report.lambda_grid = grid;
    report.scores.resize(grid.size());

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        FitConfig fold_cfg = cfg;
        fold_cfg.lambda = grid[gi];
        double score_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
            DataSet train = detail::subset(ds, train_rows[f]);
            DataSet test = detail::subset(ds, test_rows[f]);
            FitResult fitted = fit(train, fold_cfg);
            Matrix Rcross = cross_gram(train.X, test.X, fitted.kernel_used);
            Matrix U_test = transform(fitted, Rcross);
            if (criterion == CvCriterion::kcca) {
                score_sum += kcca_score(U_test, test.y, kcca_reg);
            } else {
                KernelRidgeModel krr = kernel_ridge_fit(fitted.features, train.y, ridge_reg);
                Vector pred = kernel_ridge_predict(krr, U_test);
                score_sum -= (test.y - pred).squaredNorm() / static_cast<double>(test.y.size());
            }
        }
        report.scores[gi] = score_sum / folds;
    }

    std::size_t best = 0;
    for (std::size_t gi = 1; gi < grid.size(); ++gi) {
        bool better = report.scores[gi] > report.scores[best] ||
                      (report.scores[gi] == report.scores[best] && grid[gi] < grid[best]);
        if (better) best = gi;
    }
    report.best_lambda = grid[best];
    return report;
}

}  // namespace gsdr
