#include "gsdr/gsdr.hpp"

#include <cmath>

#include "test_support.hpp"

using namespace gsdr;

TEST_CASE("generate is bit-deterministic") {
    for (auto id : {SimCaseId::case1, SimCaseId::case2, SimCaseId::case3}) {
        SimCase sc{id, 50, 12, 31};
        SimData a = generate(sc);
        SimData b = generate(sc);
        CHECK(a.data.X == b.data.X);
        CHECK(a.data.y == b.data.y);
        CHECK(a.u_true == b.u_true);
    }
}

TEST_CASE("case 2 covariance matches the AR(0.8) structure") {
    SimData sim = generate({SimCaseId::case2, 5000, 10, 11});
    Matrix Xc = sim.data.X.rowwise() - sim.data.X.colwise().mean();
    Matrix S = Xc.transpose() * Xc / 4999.0;
    CHECK(S(0, 1) == Catch::Approx(0.8).margin(0.03));
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            CHECK(S(i, j) == Catch::Approx(std::pow(0.8, std::abs(i - j))).margin(0.03));
}

TEST_CASE("case 1 leading block matches AR(0.5) and binaries are 0/1") {
    SimData sim = generate({SimCaseId::case1, 5000, 10, 13});
    Matrix X4 = sim.data.X.leftCols(4);
    Matrix Xc = X4.rowwise() - X4.colwise().mean();
    Matrix S = Xc.transpose() * Xc / 4999.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(S(i, j) == Catch::Approx(std::pow(0.5, std::abs(i - j))).margin(0.03));

    for (Eigen::Index i = 0; i < sim.data.X.rows(); ++i) {
        CHECK((sim.data.X(i, 6) == 0.0 || sim.data.X(i, 6) == 1.0));
        CHECK((sim.data.X(i, 7) == 0.0 || sim.data.X(i, 7) == 1.0));
    }
    // Both levels show up.
    CHECK(sim.data.X.col(6).sum() > 0.0);
    CHECK(sim.data.X.col(6).sum() < 5000.0);
}

TEST_CASE("case 3 with the noise hook off reproduces the index model") {
    SimData sim = generate({SimCaseId::case3, 80, 10, 17}, /*zero_y_noise=*/true);
    for (Eigen::Index i = 0; i < 80; ++i) {
        double u1 = sim.u_true(0, i), u2 = sim.u_true(1, i);
        CHECK(sim.data.y[i] == u1 * u1 + u2 * u2);
    }
    // Recompute the true predictors from X directly.
    for (Eigen::Index i = 0; i < 80; ++i) {
        double u1 = 0.0, u2 = 0.0;
        for (int j = 0; j < 10; ++j) {
            u1 += sim.data.X(i, j);
            u2 += (j % 2 == 0) ? sim.data.X(i, j) : -sim.data.X(i, j);
        }
        CHECK(sim.u_true(0, i) == Catch::Approx(u1).margin(1e-12));
        CHECK(sim.u_true(1, i) == Catch::Approx(u2).margin(1e-12));
    }
}

TEST_CASE("noise hook leaves the covariates untouched") {
    SimCase sc{SimCaseId::case2, 40, 10, 19};
    SimData with = generate(sc);
    SimData without = generate(sc, true);
    CHECK(with.data.X == without.data.X);
    CHECK(with.u_true == without.u_true);
    CHECK(with.data.y != without.data.y);
}

TEST_CASE("true predictors correlate perfectly with themselves") {
    for (auto id : {SimCaseId::case1, SimCaseId::case2, SimCaseId::case3}) {
        SimData sim = generate({id, 100, 10, 23});
        CHECK(multiple_correlation(sim.u_true, sim.u_true) == Catch::Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("generate validates p and supports extra covariates") {
    CHECK_THROWS_AS(generate({SimCaseId::case1, 50, 9, 1}), input_error);
    SimData wide = generate({SimCaseId::case1, 200, 20, 29});
    CHECK(wide.data.X.cols() == 20);
    // Extra block is standard normal AR(0.6): variance near 1.
    double var = (wide.data.X.col(15).array() - wide.data.X.col(15).mean()).square().sum() / 199.0;
    CHECK(var == Catch::Approx(1.0).margin(0.35));
}

TEST_CASE("run_benchmark aggregates per method") {
    SimCase sc{SimCaseId::case2, 50, 10, 41};
    FitConfig cfg;
    cfg.q = 2;
    cfg.max_iters = 2;

    auto one = run_benchmark(sc, {FitMethod::ksir}, 1, cfg);
    REQUIRE(one.size() == 1);
    CHECK(one[0].sd_rbar2 == 0.0);
    CHECK(one[0].reps == 1);
    CHECK(one[0].failures == 0);

    auto rows = run_benchmark(sc, {FitMethod::ksir, FitMethod::gsksir1}, 3, cfg);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.mean_rbar2 >= 0.0);
        CHECK(row.mean_rbar2 <= 1.0);
        CHECK(row.sd_rbar2 >= 0.0);
        CHECK(row.p == 10);
    }

    // Worker count must not change the numbers.
    auto rows2 = run_benchmark(sc, {FitMethod::ksir, FitMethod::gsksir1}, 3, cfg, 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mean_rbar2 == rows2[i].mean_rbar2);
        CHECK(rows[i].sd_rbar2 == rows2[i].sd_rbar2);
    }
}

TEST_CASE("benchmark_values exposes the per-rep metric") {
    SimCase sc{SimCaseId::case2, 50, 10, 41};
    FitConfig cfg;
    cfg.q = 2;
    cfg.max_iters = 2;
    auto vals = benchmark_values(sc, FitMethod::ksir, 3, cfg);
    REQUIRE(vals.size() == 3);
    for (double v : vals) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
