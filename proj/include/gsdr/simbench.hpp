#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "gsdr/common.hpp"
#include "gsdr/evaluation.hpp"
#include "gsdr/rng.hpp"
#include "gsdr/sdr.hpp"

namespace gsdr {

enum class SimCaseId { case1, case2, case3 };

inline const char* to_string(SimCaseId id) {
    switch (id) {
        case SimCaseId::case1: return "case1";
        case SimCaseId::case2: return "case2";
        case SimCaseId::case3: return "case3";
    }
    return "?";
}

inline SimCaseId sim_case_from_string(const std::string& s) {
    if (s == "case1") return SimCaseId::case1;
    if (s == "case2") return SimCaseId::case2;
    if (s == "case3") return SimCaseId::case3;
    throw input_error("unknown simulation case '" + s + "'");
}

struct SimCase {
    SimCaseId id = SimCaseId::case2;
    int n = 200;
    int p = 10;
    std::uint64_t seed = 1;
};

struct SimData {
    DataSet data;
    Matrix u_true;  // 2 x n true reduced predictors
};

struct BenchmarkRow {
    SimCaseId case_id;
    int p = 0;
    std::string method;
    double mean_rbar2 = 0.0;
    double sd_rbar2 = 0.0;
    int reps = 0;
    int failures = 0;
};

namespace detail {

// Cholesky factor of the AR covariance (rho^{|i-j|}).
inline Matrix ar_cholesky(double rho, int d) {
    Matrix S(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) S(i, j) = std::pow(rho, std::abs(i - j));
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) throw numeric_error("ar_cholesky: factorization failed");
    return llt.matrixL();
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace detail

/// Generate one simulated dataset plus the two true reduced predictors.
/// Deterministic per (case, n, p, seed). `zero_y_noise` suppresses only the
/// final response noise (a test hook); the covariates are unchanged.
inline SimData generate(const SimCase& sc, bool zero_y_noise = false) {
    if (sc.p < 10) throw input_error("generate: p must be >= 10");
    if (sc.n < 2) throw input_error("generate: n must be >= 2");
    const int n = sc.n, p = sc.p;
    Philox rng(sc.seed, static_cast<std::uint64_t>(sc.id) + 1);

    SimData out;
    out.data.X.resize(n, p);
    out.data.y.resize(n);
    out.u_true.resize(2, n);
    Matrix& X = out.data.X;
    Vector& y = out.data.y;

    const double y_noise = zero_y_noise ? 0.0 : 1.0;

    if (sc.id == SimCaseId::case2) {
        Matrix L = detail::ar_cholesky(0.8, p);
        Vector z(p);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) z[j] = rng.normal();
            X.row(i) = (L * z).transpose();
            double u1 = 0.0, u2 = 0.0;
            for (int j = 0; j < 10; ++j) {
                double s = X(i, j) * X(i, j);
                u1 += s;
                u2 += (j % 2 == 0) ? s : -s;
            }
            out.u_true(0, i) = u1;
            out.u_true(1, i) = u2;
            y[i] = std::abs(u1) * u2 + 0.5 * rng.normal() * y_noise;
        }
    } else {
        // Cases 1 and 3 share the covariate process.
        Matrix L4 = detail::ar_cholesky(0.5, 4);
        Matrix Lx;
        if (p > 10) Lx = detail::ar_cholesky(0.6, p - 10);
        Vector z4(4), zx(std::max(p - 10, 1));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 4; ++j) z4[j] = rng.normal();
            Vector x14 = L4 * z4;
            double e1 = rng.normal(), e2 = rng.normal(), e3 = rng.normal(), e4 = rng.normal();
            double u7 = rng.uniform(), u8 = rng.uniform();
            X(i, 0) = x14[0];
            X(i, 1) = x14[1];
            X(i, 2) = x14[2];
            X(i, 3) = x14[3];
            double s12 = x14[0] + x14[1];
            double s34 = x14[2] + x14[3];
            X(i, 4) = std::abs(s12) + std::abs(x14[0]) * e1;
            X(i, 5) = s12 * s12 + std::abs(x14[1]) * e2;
            X(i, 6) = (u7 < 1.0 / (1.0 + std::exp(-x14[1]))) ? 1.0 : 0.0;
            X(i, 7) = (u8 < detail::normal_cdf(x14[1])) ? 1.0 : 0.0;
            X(i, 8) = x14[2] * x14[2] * x14[2] - 2.0 * std::abs(x14[3]) + std::abs(x14[2]) * e3;
            X(i, 9) = s34 * s34 + std::abs(x14[3]) * e4;
            if (p > 10) {
                for (int j = 0; j < p - 10; ++j) zx[j] = rng.normal();
                X.row(i).segment(10, p - 10) = (Lx * zx.head(p - 10)).transpose();
            }
            double eps = rng.normal();
            if (sc.id == SimCaseId::case1) {
                double u1 = 0.0, u2 = 0.0;
                for (int j = 0; j < 10; ++j) {
                    double s = X(i, j) * X(i, j);
                    u1 += s;
                    u2 += (j % 2 == 0) ? s : -s;
                }
                out.u_true(0, i) = u1;
                out.u_true(1, i) = u2;
                y[i] = std::abs(u1) + 2.0 * std::exp(u2) + 0.1 * eps * y_noise;
            } else {
                double u1 = 0.0, u2 = 0.0;
                for (int j = 0; j < 10; ++j) {
                    u1 += X(i, j);
                    u2 += (j % 2 == 0) ? X(i, j) : -X(i, j);
                }
                out.u_true(0, i) = u1;
                out.u_true(1, i) = u2;
                y[i] = u1 * u1 + u2 * u2 + 0.5 * eps * y_noise;
            }
        }
    }

    out.data.predictor_names.resize(p);
    for (int j = 0; j < p; ++j) out.data.predictor_names[j] = "x" + std::to_string(j + 1);
    return out;
}

/// Fit every method on `reps` fresh datasets (seed = base seed + rep) and
/// aggregate r-bar-squared against the true predictors. Failing reps are
/// excluded and counted. `workers` parallelizes over reps; the aggregation
/// order is fixed so results do not depend on it.
inline std::vector<BenchmarkRow> run_benchmark(const SimCase& sc,
                                               const std::vector<FitMethod>& methods, int reps,
                                               const FitConfig& cfg, int workers = 1) {
    if (reps < 1) throw input_error("run_benchmark: reps must be >= 1");
    if (methods.empty()) throw input_error("run_benchmark: no methods given");

    struct Cell {
        double value = 0.0;
        bool ok = false;
    };
    std::vector<std::vector<Cell>> results(methods.size(), std::vector<Cell>(reps));

    detail::parallel_for(reps, workers, [&](Eigen::Index rep) {
        SimCase rep_case = sc;
        rep_case.seed = sc.seed + static_cast<std::uint64_t>(rep) + 1;
        SimData sim;
        try {
            sim = generate(rep_case);
        } catch (const std::exception&) {
            return;  // all methods fail for this rep
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            try {
                FitConfig rep_cfg = cfg;
                rep_cfg.method = methods[mi];
                rep_cfg.seed = rep_case.seed;
                FitResult fitted = fit(sim.data, rep_cfg);
                double r2 = multiple_correlation(sim.u_true, fitted.features);
                results[mi][rep] = {r2, true};
            } catch (const std::exception&) {
                // recorded as a failure below
            }
        }
    });

    std::vector<BenchmarkRow> rows;
    rows.reserve(methods.size());
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        BenchmarkRow row;
        row.case_id = sc.id;
        row.p = sc.p;
        row.method = to_string(methods[mi]);
        row.reps = reps;
        double sum = 0.0;
        int ok = 0;
        for (int r = 0; r < reps; ++r) {
            if (results[mi][r].ok) {
                sum += results[mi][r].value;
                ++ok;
            }
        }
        row.failures = reps - ok;
        if (ok > 0) {
            double mean = sum / ok;
            double ss = 0.0;
            for (int r = 0; r < reps; ++r)
                if (results[mi][r].ok) ss += (results[mi][r].value - mean) * (results[mi][r].value - mean);
            row.mean_rbar2 = mean;
            row.sd_rbar2 = ok > 1 ? std::sqrt(ss / (ok - 1)) : 0.0;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Per-rep r-bar-squared values for one method; used where the distribution
/// itself matters (medians, paired comparisons).
inline std::vector<double> benchmark_values(const SimCase& sc, FitMethod method, int reps,
                                            const FitConfig& cfg, int workers = 1) {
    std::vector<double> values(reps, std::numeric_limits<double>::quiet_NaN());
    detail::parallel_for(reps, workers, [&](Eigen::Index rep) {
        SimCase rep_case = sc;
        rep_case.seed = sc.seed + static_cast<std::uint64_t>(rep) + 1;
        try {
            SimData sim = generate(rep_case);
            FitConfig rep_cfg = cfg;
            rep_cfg.method = method;
            rep_cfg.seed = rep_case.seed;
            FitResult fitted = fit(sim.data, rep_cfg);
            values[rep] = multiple_correlation(sim.u_true, fitted.features);
        } catch (const std::exception&) {
            // leave NaN
        }
    });
    return values;
}

}  // namespace gsdr
