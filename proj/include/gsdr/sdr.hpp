#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>
#include <utility>

#include "gsdr/common.hpp"
#include "gsdr/kernels.hpp"
#include "gsdr/smoothing.hpp"

namespace gsdr {

enum class FitMethod { ksir, gsksir1, gsksir2, gsksave };

inline const char* to_string(FitMethod m) {
    switch (m) {
        case FitMethod::ksir: return "ksir";
        case FitMethod::gsksir1: return "gsksir1";
        case FitMethod::gsksir2: return "gsksir2";
        case FitMethod::gsksave: return "gsksave";
    }
    return "?";
}

inline FitMethod fit_method_from_string(const std::string& s) {
    if (s == "ksir") return FitMethod::ksir;
    if (s == "gsksir1") return FitMethod::gsksir1;
    if (s == "gsksir2") return FitMethod::gsksir2;
    if (s == "gsksave") return FitMethod::gsksave;
    throw input_error("unknown method '" + s + "'");
}

struct FitConfig {
    int q = 2;
    double lambda = 1e-2;
    BandwidthSpec h1, h2, h3, h4;  // h1/h3 response side, h2/h4 projected side
    FitMethod method = FitMethod::gsksir1;
    int max_iters = 30;
    double tol = 1e-4;
    std::uint64_t seed = 1;
    int slices = 10;          // KSIR initialization slices
    double ksir_ridge = 1e-3; // ridge in the KSIR generalized eigenproblem
    std::optional<KernelSpec> kernel;  // default: gaussian, median-heuristic sigma
    int threads = 1;          // workers for finite-difference gradient entries

    void validate() const {
        if (q < 1) throw input_error("fit config: q must be >= 1");
        if (lambda < 0) throw input_error("fit config: lambda must be >= 0");
        if (max_iters < 1) throw input_error("fit config: max_iters must be >= 1");
        if (!(tol > 0)) throw input_error("fit config: tol must be positive");
        if (slices < 2) throw input_error("fit config: slices must be >= 2");
        if (!(ksir_ridge > 0)) throw input_error("fit config: ksir_ridge must be positive");
        if (threads < 1) throw input_error("fit config: threads must be >= 1");
    }
};

struct FitResult {
    CoefficientMatrix C;                 // n x q
    Matrix features;                     // q x n, column i = C^T R_(i)
    std::vector<double> objective_trace; // objective at init, then each accepted step
    double lambda_used = 0.0;
    double h1_used = 0.0, h2_used = 0.0, h3_used = 0.0, h4_used = 0.0;
    bool converged = false;
    int iterations = 0;
    KernelSpec kernel_used;
    std::optional<Standardization> standardization;
};

/// Columns i = C^T R_(i), the reduced predictors of the training points.
inline Matrix projected_features(const CoefficientMatrix& C, const Matrix& R) {
    if (C.rows() != R.rows())
        throw input_error("projected_features: C has " + std::to_string(C.rows()) +
                          " rows but Gram matrix has " + std::to_string(R.rows()));
    return C.transpose() * R;
}

inline Matrix projected_features(const CoefficientMatrix& C, const GramMatrix& R) {
    return projected_features(C, R.entries);
}

/// Smoother over the current reduced predictors, recomputed from C.
inline SmootherMatrix projected_smoother(const CoefficientMatrix& C, const Matrix& Rraw, double h) {
    Matrix P = projected_features(C, Rraw);
    return nw_weights(P.transpose(), h, SmootherSource::projected_features);
}

namespace detail {

// Smoother over reduced predictors with the bandwidth following its argument
// (re-selected per evaluation unless overridden). This keeps the objective
// invariant to rescaling C; a frozen bandwidth lets the optimizer zero the
// residual by spreading the features until every point is isolated.
inline SmootherMatrix projected_smoother_spec(const Matrix& P_rows, const BandwidthSpec& spec) {
    double h;
    if (spec.mode == BandwidthSpec::Mode::fixed) {
        h = spec.value;
    } else {
        try {
            h = default_bandwidth(P_rows);
        } catch (const input_error&) {
            h = 1.0;  // collapsed features; any bandwidth yields uniform weights
        }
    }
    return nw_weights(P_rows, h, SmootherSource::projected_features);
}

}  // namespace detail

/// || Rc K1 (I - K2)(I - K2)^T Rc ||_F^2, the data term of GS-KSIR-I.
inline double gsksir1_residual_norm2(const Matrix& Rc, const Matrix& K1, const Matrix& K2) {
    Matrix W = Matrix::Identity(K2.rows(), K2.cols()) - K2;
    Matrix left = Rc * K1 * W;
    Matrix right = W.transpose() * Rc;
    return (left * right).squaredNorm();
}

/// || Rc (K1 - K2 K3)(K1 - K2 K3)^T Rc ||_F^2, the data term of GS-KSIR-II.
inline double gsksir2_residual_norm2(const Matrix& Rc, const Matrix& K1, const Matrix& K2,
                                     const Matrix& K3) {
    Matrix D = K1 - K2 * K3;
    Matrix left = Rc * D;
    return (left * (D.transpose() * Rc)).squaredNorm();
}

/// Residual row vectors of the GS-KSAVE sample equation:
///   u = D1 - diag(R)^T K3,   w = D2 - diag(R)^T K4,
/// with D1 = diag{I + K1^T R K1} and
/// D2 = diag{R - R K1 - R K2 + K1^T R K1 + K2^T R K2}.
inline std::pair<Vector, Vector> gsksave_residual_vectors(const Matrix& R, const Matrix& K1,
                                                          const Matrix& K2, const Matrix& K3,
                                                          const Matrix& K4) {
    const Eigen::Index n = R.rows();
    Matrix RK1 = R * K1;
    Matrix RK2 = R * K2;
    Vector qf1 = (K1.array() * RK1.array()).colwise().sum();  // diag(K1^T R K1)
    Vector qf2 = (K2.array() * RK2.array()).colwise().sum();  // diag(K2^T R K2)
    Vector d1 = Vector::Ones(n) + qf1;
    Vector d2 = R.diagonal() - RK1.diagonal() - RK2.diagonal() + qf1 + qf2;
    Vector u = d1 - K3.transpose() * R.diagonal();
    Vector w = d2 - K4.transpose() * R.diagonal();
    return {std::move(u), std::move(w)};
}

/// || u w^T ||_F^2 + lambda tr(C^T C); the outer-product norm factorizes.
inline double gsksave_value(const Vector& u, const Vector& w, const CoefficientMatrix& C,
                            double lambda) {
    return u.squaredNorm() * w.squaredNorm() + lambda * C.squaredNorm();
}

/// GS-KSIR-I objective Q(C). K2 is rebuilt from the current reduced
/// predictors; with cfg.h2 automatic, its bandwidth follows them too.
inline double gsksir1_objective(const CoefficientMatrix& C, const GramMatrix& Rc,
                                const GramMatrix& Rraw, const SmootherMatrix& K1,
                                const FitConfig& cfg) {
    if (!Rc.centered) throw input_error("gsksir1_objective: Rc must be centered");
    Matrix P = projected_features(C, Rraw.entries).transpose();
    SmootherMatrix K2 = detail::projected_smoother_spec(P, cfg.h2);
    return gsksir1_residual_norm2(Rc.entries, K1.weights, K2.weights) +
           cfg.lambda * C.squaredNorm();
}

/// GS-KSIR-II objective Q(C). K3 smooths the responses at h3.
inline double gsksir2_objective(const CoefficientMatrix& C, const GramMatrix& Rc,
                                const GramMatrix& Rraw, const SmootherMatrix& K1,
                                const SmootherMatrix& K3, const FitConfig& cfg) {
    if (!Rc.centered) throw input_error("gsksir2_objective: Rc must be centered");
    Matrix P = projected_features(C, Rraw.entries).transpose();
    SmootherMatrix K2 = detail::projected_smoother_spec(P, cfg.h2);
    return gsksir2_residual_norm2(Rc.entries, K1.weights, K2.weights, K3.weights) +
           cfg.lambda * C.squaredNorm();
}

/// GS-KSAVE objective. Uses the raw Gram matrix throughout; K1/K3 smooth the
/// responses at h1/h3, K2/K4 the reduced predictors at h2/h4.
inline double gsksave_objective(const CoefficientMatrix& C, const GramMatrix& Rraw,
                                const SmootherMatrix& K1, const SmootherMatrix& K3,
                                const FitConfig& cfg) {
    if (Rraw.centered) throw input_error("gsksave_objective: Rraw must be uncentered");
    Matrix P = projected_features(C, Rraw.entries).transpose();
    SmootherMatrix K2 = detail::projected_smoother_spec(P, cfg.h2);
    SmootherMatrix K4 = detail::projected_smoother_spec(P, cfg.h4);
    auto [u, w] = gsksave_residual_vectors(Rraw.entries, K1.weights, K2.weights, K3.weights,
                                           K4.weights);
    return gsksave_value(u, w, C, cfg.lambda);
}

/// KSIR directions as representer coefficients: quantile-slice the response,
/// form the between-slice covariance in coefficient space and solve
///   Rc Omega Rc c = mu (Rc Rc + n ridge I) c.
/// Columns are normalized to c^T Rc c = 1 and centered so that raw Gram
/// columns reproduce the centered-feature projections up to constant shifts.
inline CoefficientMatrix ksir_init(const GramMatrix& Rc, const Vector& y, int q, int n_slices,
                                   double ridge) {
    if (!Rc.centered) throw input_error("ksir_init: Gram matrix must be centered");
    const Eigen::Index n = Rc.n();
    if (y.size() != n) throw input_error("ksir_init: response length mismatch");
    if (q < 1 || q >= n) throw input_error("ksir_init: need 1 <= q < n");
    if (n_slices < 2) throw input_error("ksir_init: need n_slices >= 2");
    if ((y.maxCoeff() - y.minCoeff()) == 0.0)
        throw input_error("ksir_init: no directional signal (constant response)");

    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return y[a] < y[b]; });

    // Quantile edges on the sorted values; ties can empty a slice, in which
    // case we halve the slice count once and retry.
    auto slice_assign = [&](int S) -> std::optional<std::vector<int>> {
        std::vector<double> edges(S - 1);
        for (int b = 1; b < S; ++b)
            edges[b - 1] = y[order[static_cast<Eigen::Index>(
                static_cast<double>(b) * static_cast<double>(n) / S)]];
        std::vector<int> slice_of(n);
        std::vector<int> counts(S, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            // Values equal to an edge go to the bin above it.
            int b = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), y[i]) -
                                     edges.begin());
            slice_of[i] = b;
            ++counts[b];
        }
        for (int b = 0; b < S; ++b)
            if (counts[b] == 0) return std::nullopt;
        return slice_of;
    };

    int S = std::min<int>(n_slices, static_cast<int>(n));
    auto assigned = slice_assign(S);
    if (!assigned) {
        S = std::max(2, S / 2);
        assigned = slice_assign(S);
        if (!assigned)
            throw input_error("ksir_init: empty slice after retry (too many tied responses)");
    }
    const std::vector<int>& slice_of = *assigned;
    std::vector<double> counts(S, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) counts[slice_of[i]] += 1.0;

    // Omega = sum_h (n_h/n)(w_h - wbar)(w_h - wbar)^T with indicator weights.
    Matrix Wd = Matrix::Zero(n, S);
    for (Eigen::Index i = 0; i < n; ++i) Wd(i, slice_of[i]) = 1.0 / counts[slice_of[i]];
    Wd.colwise() -= Vector::Constant(n, 1.0 / static_cast<double>(n));
    Vector scale(S);
    for (int b = 0; b < S; ++b) scale[b] = counts[b] / static_cast<double>(n);
    Matrix Omega = Wd * scale.asDiagonal() * Wd.transpose();

    Matrix A = Rc.entries * Omega * Rc.entries;
    A = 0.5 * (A + A.transpose()).eval();
    Matrix B = Rc.entries * Rc.entries +
               static_cast<double>(n) * ridge * Matrix::Identity(n, n);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(A, B);
    if (solver.info() != Eigen::Success)
        throw numeric_error("ksir_init: generalized eigensolver failed");
    Vector evals = solver.eigenvalues();
    if (!(evals[n - 1] > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff())))
        throw input_error("ksir_init: no directional signal");

    CoefficientMatrix C(n, q);
    for (int j = 0; j < q; ++j) {
        Vector c = solver.eigenvectors().col(n - 1 - j);
        c.array() -= c.mean();  // center; leaves c^T Rc c unchanged
        double s = c.dot(Rc.entries * c);
        if (!(s > 1e-300))
            throw numeric_error("ksir_init: direction " + std::to_string(j + 1) +
                                " has vanishing RKHS norm");
        C.col(j) = c / std::sqrt(s);
    }
    return C;
}

namespace detail {

// Runs fn(i) for i in [0, count) across the given number of threads.
// Each index writes only its own output slot, so the result does not
// depend on the thread count.
template <typename Fn>
void parallel_for(Eigen::Index count, int threads, const Fn& fn) {
    if (threads <= 1 || count < 2) {
        for (Eigen::Index i = 0; i < count; ++i) fn(i);
        return;
    }
    int nt = static_cast<int>(std::min<Eigen::Index>(threads, count));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (Eigen::Index i = t; i < count; i += nt) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Quasi-Newton (L-BFGS) minimization over vec(C) with central-difference
/// gradients and Armijo backtracking. Every accepted step strictly decreases
/// the objective; the trace records the initial value and each accepted one.
inline FitResult minimize(const std::function<double(const CoefficientMatrix&)>& objective,
                          const CoefficientMatrix& C0, const FitConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = C0.rows(), q = C0.cols(), N = n * q;

    auto eval_vec = [&](const Vector& v) {
        return objective(Eigen::Map<const Matrix>(v.data(), n, q));
    };

    Vector x = Eigen::Map<const Vector>(C0.data(), N);
    double f = eval_vec(x);
    if (!std::isfinite(f)) throw numeric_error("minimize: objective not finite at start");

    FitResult result;
    result.objective_trace.push_back(f);

    auto gradient = [&](const Vector& at, int iter) {
        Vector g(N);
        detail::parallel_for(N, cfg.threads, [&](Eigen::Index i) {
            double step = 1e-5 * (1.0 + std::abs(at[i]));
            Vector probe = at;
            probe[i] = at[i] + step;
            double fp = eval_vec(probe);
            probe[i] = at[i] - step;
            double fm = eval_vec(probe);
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw numeric_error("minimize: non-finite objective in gradient at iteration " +
                                    std::to_string(iter));
            g[i] = (fp - fm) / (2.0 * step);
        });
        return g;
    };

    const int memory = 8;
    std::vector<Vector> s_hist, y_hist;
    std::vector<double> rho_hist;
    Vector g = gradient(x, 0);

    int iter = 0;
    bool converged = false;
    for (; iter < cfg.max_iters; ++iter) {
        if (g.norm() <= 1e-12 * (1.0 + std::abs(f))) {
            converged = true;
            break;
        }
        // L-BFGS two-loop recursion.
        Vector d = -g;
        int m = static_cast<int>(s_hist.size());
        std::vector<double> alpha(m);
        for (int i = m - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(d);
            d -= alpha[i] * y_hist[i];
        }
        if (m > 0) {
            double gamma = s_hist[m - 1].dot(y_hist[m - 1]) / y_hist[m - 1].squaredNorm();
            if (std::isfinite(gamma) && gamma > 0) d *= gamma;
        }
        for (int i = 0; i < m; ++i) {
            double beta = rho_hist[i] * y_hist[i].dot(d);
            d += (alpha[i] - beta) * s_hist[i];
        }
        double slope = g.dot(d);
        if (!(slope < 0)) {  // not a descent direction; fall back to steepest descent
            d = -g;
            slope = g.dot(d);
        }

        // Armijo backtracking with halving. The very first step has no
        // curvature information, so cap it at unit length.
        double step = 1.0;
        if (s_hist.empty()) step = std::min(1.0, 1.0 / std::max(1.0, d.norm()));
        double f_new = std::numeric_limits<double>::infinity();
        Vector x_new;
        bool accepted = false;
        for (int ls = 0; ls < 45; ++ls) {
            x_new = x + step * d;
            f_new = eval_vec(x_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope && f_new < f) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Vector g_new = gradient(x_new, iter + 1);
        Vector s = x_new - x;
        Vector ydiff = g_new - g;
        double sy = s.dot(ydiff);
        if (sy > 1e-12 * s.norm() * ydiff.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(ydiff));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }

        double decrease = (f - f_new) / std::max(std::abs(f), 1e-12);
        x = std::move(x_new);
        g = std::move(g_new);
        f = f_new;
        result.objective_trace.push_back(f);
        if (decrease < cfg.tol) {
            ++iter;
            converged = true;
            break;
        }
    }

    result.C = Eigen::Map<const Matrix>(x.data(), n, q);
    result.converged = converged;
    result.iterations = iter;
    result.lambda_used = cfg.lambda;
    return result;
}

namespace detail {

// Rank-revealing factorization of a PSD matrix: M ~= V diag(lam) V^T with
// eigenvalues above 1e-13 * max kept. Used to evaluate the objectives in a
// reduced basis; agrees with the dense forms to rounding noise.
struct PsdFactor {
    Matrix V;   // n x r, orthonormal columns
    Vector lam; // r positive eigenvalues

    explicit PsdFactor(const Matrix& M) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(M);
        if (es.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
        const Vector& ev = es.eigenvalues();
        double cutoff = 1e-13 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (ev[i] > cutoff) ++r;
        V.resize(M.rows(), r);
        lam.resize(r);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev[i] > cutoff) {
                V.col(k) = es.eigenvectors().col(i);
                lam[k] = ev[i];
                ++k;
            }
        }
    }
};

// Precomputed state for fast objective evaluations during optimization.
// Everything that does not depend on C is factored out once.
class ObjectiveWorkspace {
public:
    ObjectiveWorkspace(FitMethod method, const GramMatrix& Rc, const GramMatrix& Rraw,
                       const SmootherMatrix& K1, const SmootherMatrix* K3,
                       const BandwidthSpec& h2, const BandwidthSpec& h4, double lambda)
        : method_(method), Rraw_(Rraw.entries), h2_(h2), h4_(h4), lambda_(lambda) {
        switch (method_) {
            case FitMethod::gsksir1: {
                PsdFactor fac(Rc.entries);
                B2_ = fac.lam.asDiagonal() * fac.V.transpose();  // r x n
                A2_ = B2_ * K1.weights;                          // r x n
                VL_ = fac.V * fac.lam.asDiagonal();              // n x r
                break;
            }
            case FitMethod::gsksir2: {
                if (!K3) throw input_error("workspace: gsksir2 needs the h3 response smoother");
                PsdFactor fac(Rc.entries);
                B2_ = fac.lam.asDiagonal() * fac.V.transpose();
                A2_ = B2_ * K1.weights;
                K3_ = K3->weights;
                break;
            }
            case FitMethod::gsksave: {
                if (!K3) throw input_error("workspace: gsksave needs the h3 response smoother");
                PsdFactor fac(Rraw.entries);
                Broot_ = fac.lam.cwiseSqrt().asDiagonal() * fac.V.transpose();  // r x n
                Matrix RK1 = Rraw.entries * K1.weights;
                Vector qf1 = (K1.weights.array() * RK1.array()).colwise().sum();
                diagRK1_ = RK1.diagonal();
                qf1_ = qf1;
                u_ = (Vector::Ones(Rraw.n()) + qf1 - K3->weights.transpose() * Rraw.entries.diagonal())
                         .eval();
                diagR_ = Rraw.entries.diagonal();
                break;
            }
            case FitMethod::ksir:
                throw input_error("workspace: ksir has no objective");
        }
    }

    double operator()(const CoefficientMatrix& C) const {
        Matrix P = (C.transpose() * Rraw_).transpose();  // n x q
        Matrix K2 = projected_smoother_spec(P, h2_).weights;
        double data = 0.0;
        switch (method_) {
            case FitMethod::gsksir1: {
                // Z = A2 (I-K2) (I-K2)^T VL evaluated with rank-r factors.
                Matrix left = A2_ - A2_ * K2;                    // r x n
                Matrix right = VL_ - K2.transpose() * VL_;       // n x r
                data = (left * right).squaredNorm();
                break;
            }
            case FitMethod::gsksir2: {
                Matrix F = A2_ - (B2_ * K2) * K3_;  // r x n
                data = (F * F.transpose()).squaredNorm();
                break;
            }
            case FitMethod::gsksave: {
                Matrix K4 = projected_smoother_spec(P, h4_).weights;
                Matrix S = Broot_ * K2;  // r x n
                Vector qf2 = S.colwise().squaredNorm();
                Vector diagRK2 = (Rraw_.array() * K2.transpose().array()).rowwise().sum();
                Vector d2 = diagR_ - diagRK1_ - diagRK2 + qf1_ + qf2;
                Vector w = d2 - K4.transpose() * diagR_;
                data = u_.squaredNorm() * w.squaredNorm();
                break;
            }
            case FitMethod::ksir:
                break;
        }
        return data + lambda_ * C.squaredNorm();
    }

private:
    FitMethod method_;
    Matrix Rraw_;
    BandwidthSpec h2_, h4_;
    double lambda_;
    Matrix A2_, B2_, VL_, K3_, Broot_;
    Vector u_, qf1_, diagRK1_, diagR_;
};

}  // namespace detail

/// Full estimation pipeline: Gram -> centering -> bandwidths -> KSIR
/// initialization -> penalized quasi-Newton minimization.
inline FitResult fit(const DataSet& ds, const FitConfig& cfg) {
    cfg.validate();
    check_dataset(ds);
    const Eigen::Index n = ds.n();
    if (cfg.q >= n) throw input_error("fit: q must be smaller than the sample size");

    KernelSpec kernel;
    if (cfg.kernel) {
        kernel = *cfg.kernel;
    } else {
        kernel.family = KernelFamily::gaussian;
        kernel.sigma = median_heuristic_sigma(ds.X);
    }

    GramMatrix Rraw = gram(ds.X, kernel);
    GramMatrix Rc = center_gram(Rraw);

    Matrix ymat = ds.y;
    double h1 = resolve_bandwidth(cfg.h1, ymat);
    SmootherMatrix K1 = nw_weights(ymat, h1, SmootherSource::response);

    CoefficientMatrix C0 = ksir_init(Rc, ds.y, cfg.q, cfg.slices, cfg.ksir_ridge);

    FitResult result;
    if (cfg.method == FitMethod::ksir) {
        result.C = std::move(C0);
        result.converged = true;
    } else {
        double h3 = 0.0;
        std::optional<SmootherMatrix> K3;
        if (cfg.method == FitMethod::gsksir2 || cfg.method == FitMethod::gsksave) {
            h3 = resolve_bandwidth(cfg.h3, ymat);
            K3 = nw_weights(ymat, h3, SmootherSource::response);
        }

        detail::ObjectiveWorkspace objective(cfg.method, Rc, Rraw, K1, K3 ? &*K3 : nullptr,
                                             cfg.h2, cfg.h4, cfg.lambda);
        result = minimize([&](const CoefficientMatrix& C) { return objective(C); }, C0, cfg);

        // Report the bandwidths in effect at the final iterate.
        Matrix P = projected_features(result.C, Rraw.entries).transpose();
        result.h2_used = detail::projected_smoother_spec(P, cfg.h2).bandwidth;
        result.h3_used = h3;
        if (cfg.method == FitMethod::gsksave)
            result.h4_used = detail::projected_smoother_spec(P, cfg.h4).bandwidth;
    }
    result.h1_used = h1;
    result.lambda_used = cfg.lambda;
    result.kernel_used = kernel;
    result.features = projected_features(result.C, Rraw.entries);
    result.standardization = ds.standardization;
    return result;
}

/// Reduced predictors for new points: C^T R(X_train, X_new).
inline Matrix transform(const FitResult& fitted, const Matrix& Rcross) {
    if (fitted.C.rows() != Rcross.rows())
        throw input_error("transform: cross-kernel matrix has " + std::to_string(Rcross.rows()) +
                          " rows, expected " + std::to_string(fitted.C.rows()));
    return fitted.C.transpose() * Rcross;
}

}  // namespace gsdr
