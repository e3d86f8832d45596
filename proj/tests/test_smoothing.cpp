#include "gsdr/smoothing.hpp"

#include <cmath>

#include "test_support.hpp"

using namespace gsdr;
using test_support::random_matrix;
using test_support::random_vector;

TEST_CASE("epanechnikov closed forms") {
    Vector u(1);
    u << 0.0;
    CHECK(epanechnikov(u, 1.0) == Catch::Approx(0.75));
    u << 1.0;
    CHECK(epanechnikov(u, 1.0) == 0.0);
    u << -1.0001;
    CHECK(epanechnikov(u, 1.0) == 0.0);

    // Product form over coordinates.
    Vector v(2);
    v << 0.3, -0.4;
    Vector a(1), b(1);
    a << 0.3;
    b << -0.4;
    CHECK(epanechnikov(v, 0.8) == Catch::Approx(epanechnikov(a, 0.8) * epanechnikov(b, 0.8)));
}

TEST_CASE("epanechnikov integrates to one") {
    // Simpson quadrature over the support as an independent oracle.
    const double h = 2.0;
    const int steps = 20000;
    double integral = 0.0;
    double dx = 2.0 * h / steps;
    Vector u(1);
    for (int i = 0; i <= steps; ++i) {
        u[0] = -h + i * dx;
        double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        integral += w * epanechnikov(u, h);
    }
    integral *= dx / 3.0;
    CHECK(integral == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("default_bandwidth follows the Silverman-type rule") {
    CHECK(detail::silverman_h(1.0, 200, 1) == Catch::Approx(1.06 * std::pow(200.0, -0.2)));
    CHECK(detail::silverman_h(1.0, 200, 1) == Catch::Approx(0.3674).margin(5e-4));

    // Homogeneity: scaling the values doubles the bandwidth.
    Matrix V = random_matrix(60, 2, 31);
    CHECK(default_bandwidth(2.0 * V) == Catch::Approx(2.0 * default_bandwidth(V)));

    // Independent recomputation of sigma-bar for a standard-normal sample.
    Matrix W = random_matrix(100, 1, 32);
    std::vector<double> sorted(W.data(), W.data() + 100);
    std::sort(sorted.begin(), sorted.end());
    auto quant = [&](double q) {
        double pos = q * 99.0;
        std::size_t lo = static_cast<std::size_t>(pos);
        double frac = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
    };
    double mean = W.mean();
    double sd = std::sqrt((W.array() - mean).square().sum() / 99.0);
    double sigma_bar = std::min(sd, (quant(0.75) - quant(0.25)) / 1.349);
    CHECK(default_bandwidth(W) ==
          Catch::Approx(1.06 * sigma_bar * std::pow(100.0, -0.2)));

    CHECK_THROWS_AS(default_bandwidth(Matrix::Zero(5, 2)), input_error);
}

TEST_CASE("nw_weights basics") {
    Matrix same = Matrix::Constant(6, 2, 3.0);
    SmootherMatrix S = nw_weights(same, 1.0);
    CHECK((S.weights.array() - 1.0 / 6.0).abs().maxCoeff() <= 1e-14);

    Matrix two(2, 1);
    two << 0.0, 10.0;
    SmootherMatrix S2 = nw_weights(two, 1.0);
    CHECK(S2.weights.isApprox(Matrix::Identity(2, 2), 1e-14));

    // Direct-summation oracle for the column sums.
    Matrix V = random_matrix(20, 1, 41);
    SmootherMatrix S3 = nw_weights(V, 0.7);
    for (Eigen::Index j = 0; j < 20; ++j) {
        CHECK(std::abs(S3.weights.col(j).sum() - 1.0) <= 1e-10);
        for (Eigen::Index i = 0; i < 20; ++i) CHECK(S3.weights(i, j) >= 0.0);
    }
}

TEST_CASE("nw_weights shift invariance and wide-bandwidth limit") {
    Matrix V = random_matrix(15, 3, 51);
    Matrix shifted = V;
    Vector c(3);
    c << 5.0, -2.0, 0.25;
    shifted.rowwise() += c.transpose();
    SmootherMatrix a = nw_weights(V, 0.9);
    SmootherMatrix b = nw_weights(shifted, 0.9);
    CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() <= 1e-14);

    double spread = V.maxCoeff() - V.minCoeff();
    SmootherMatrix wide = nw_weights(V, 1e6 * spread);
    CHECK((wide.weights.array() - 1.0 / 15.0).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("nw_weights handles non-finite values without poisoning columns") {
    Matrix V(4, 1);
    V << 0.0, 0.5, std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity();
    SmootherMatrix S = nw_weights(V, 1.0);
    for (Eigen::Index j = 0; j < 4; ++j)
        CHECK(std::abs(S.weights.col(j).sum() - 1.0) <= 1e-12);
    CHECK(S.weights.allFinite());
}

TEST_CASE("bandwidth specs resolve") {
    Matrix V = random_matrix(30, 1, 61);
    CHECK(resolve_bandwidth(BandwidthSpec::fixed(0.4), V) == 0.4);
    CHECK(resolve_bandwidth(BandwidthSpec::auto_select(), V) == default_bandwidth(V));
    CHECK_THROWS_AS(BandwidthSpec::fixed(-1.0), input_error);
}
