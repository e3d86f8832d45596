#include "gsdr/kernels.hpp"

#include <cmath>

#include "test_support.hpp"

using namespace gsdr;
using test_support::random_matrix;

namespace {

// Explicit feature map of the degree-2 polynomial kernel with offset c:
// (s.t + c)^2 = <phi(s), phi(t)> with phi(x) = (x (x) x, sqrt(2c) x, c).
Matrix poly2_feature_map(const Matrix& X, double offset) {
    const Eigen::Index n = X.rows(), p = X.cols();
    Matrix F(p * p + p + 1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index k = 0;
        for (Eigen::Index a = 0; a < p; ++a)
            for (Eigen::Index b = 0; b < p; ++b) F(k++, i) = X(i, a) * X(i, b);
        for (Eigen::Index a = 0; a < p; ++a) F(k++, i) = std::sqrt(2.0 * offset) * X(i, a);
        F(k, i) = offset;
    }
    return F;
}

}  // namespace

TEST_CASE("kernel_eval closed forms") {
    KernelSpec g;  // gaussian, sigma 1
    Vector s(2), t(2);
    s << 0.3, -1.2;
    CHECK(kernel_eval(g, s, s) == Catch::Approx(1.0));

    Vector a(1), b(1);
    a << 0.0;
    b << 1.0;
    CHECK(kernel_eval(g, a, b) == Catch::Approx(std::exp(-0.5)));

    KernelSpec poly{KernelFamily::polynomial, 1.0, 2, 1.0};
    Vector u(2), v(2);
    u << 1.0, 0.0;
    v << 0.0, 1.0;
    CHECK(kernel_eval(poly, u, v) == Catch::Approx(1.0));

    t.resize(3);
    CHECK_THROWS_AS(kernel_eval(g, s, t), input_error);
}

TEST_CASE("gram construction") {
    KernelSpec g;
    Matrix X(2, 3);
    X.row(0) << 1.0, 2.0, 3.0;
    X.row(1) << 1.0, 2.0, 3.0;
    GramMatrix R = gram(X, g);
    CHECK(R.entries.isApprox(Matrix::Ones(2, 2), 1e-14));
    CHECK_FALSE(R.centered);

    Matrix X2(2, 1);
    X2 << 0.0, 1.0;
    GramMatrix R2 = gram(X2, g);
    CHECK(R2.entries(0, 0) == Catch::Approx(1.0));
    CHECK(R2.entries(0, 1) == Catch::Approx(std::exp(-0.5)));
    CHECK(R2.entries(1, 0) == Catch::Approx(std::exp(-0.5)));

    // Eigensolver oracle: random Gram matrices stay PSD.
    Matrix X3 = random_matrix(5, 2, 101);
    GramMatrix R3 = gram(X3, g);
    Eigen::SelfAdjointEigenSolver<Matrix> es(R3.entries);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("gram symmetry and relative PSD tolerance hold for random inputs") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        Matrix X = random_matrix(40, 3, seed);
        for (auto family : {KernelFamily::gaussian, KernelFamily::polynomial}) {
            KernelSpec k;
            k.family = family;
            k.sigma = 1.7;
            GramMatrix R = gram(X, k);
            CHECK((R.entries - R.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
            Eigen::SelfAdjointEigenSolver<Matrix> es(R.entries);
            CHECK(es.eigenvalues().minCoeff() >=
                  -1e-8 * R.entries.trace() / static_cast<double>(R.n()));
        }
    }
}

TEST_CASE("center_gram") {
    KernelSpec g;
    GramMatrix ones{Matrix::Ones(4, 4), false, g};
    CHECK(center_gram(ones).entries.cwiseAbs().maxCoeff() <= 1e-14);

    GramMatrix eye{Matrix::Identity(2, 2), false, g};
    Matrix expected(2, 2);
    expected << 0.5, -0.5, -0.5, 0.5;
    CHECK(center_gram(eye).entries.isApprox(expected, 1e-14));

    // Direct-summation oracle on a random PSD matrix.
    Matrix A = random_matrix(6, 6, 55);
    GramMatrix psd{Matrix(A * A.transpose()), false, g};
    GramMatrix centered = center_gram(psd);
    for (Eigen::Index i = 0; i < 6; ++i) {
        CHECK(std::abs(centered.entries.row(i).sum()) < 1e-10);
        CHECK(std::abs(centered.entries.col(i).sum()) < 1e-10);
    }
    CHECK(centered.centered);
    CHECK_THROWS_AS(center_gram(centered), input_error);

    // Idempotent in effect: applying the raw formula again changes nothing.
    const Eigen::Index n = 6;
    Matrix H = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
    Matrix twice = H * centered.entries * H;
    CHECK((twice - centered.entries).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("median_heuristic_sigma") {
    Matrix X(2, 1);
    X << 0.0, 2.0;
    CHECK(median_heuristic_sigma(X) == Catch::Approx(2.0));

    Matrix X2(3, 1);
    X2 << 0.0, 1.0, 3.0;
    CHECK(median_heuristic_sigma(X2) == Catch::Approx(2.0));

    // Brute-force oracle over all 1225 pairs.
    Matrix X3 = random_matrix(50, 4, 77);
    std::vector<double> dists;
    for (Eigen::Index i = 0; i < 50; ++i)
        for (Eigen::Index j = i + 1; j < 50; ++j)
            dists.push_back((X3.row(i) - X3.row(j)).norm());
    std::sort(dists.begin(), dists.end());
    double expected = dists.size() % 2 == 1
                          ? dists[dists.size() / 2]
                          : 0.5 * (dists[dists.size() / 2 - 1] + dists[dists.size() / 2]);
    CHECK(median_heuristic_sigma(X3) == Catch::Approx(expected));

    // Even pair count takes the midpoint of the two central distances.
    Matrix X4(4, 1);
    X4 << 0.0, 1.0, 3.0, 7.0;  // pairwise: 1,2,3,4,6,7
    CHECK(median_heuristic_sigma(X4) == Catch::Approx(3.5));

    Matrix same(3, 2);
    same << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
    CHECK_THROWS_AS(median_heuristic_sigma(same), input_error);
}

TEST_CASE("polynomial gram equals the explicit feature map") {
    Matrix X = random_matrix(8, 3, 91);
    KernelSpec poly{KernelFamily::polynomial, 1.0, 2, 1.0};
    GramMatrix R = gram(X, poly);
    Matrix F = poly2_feature_map(X, poly.offset);
    CHECK((R.entries - F.transpose() * F).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("cross_gram agrees with pairwise kernel evaluation") {
    Matrix X = random_matrix(6, 3, 21);
    Matrix Z = random_matrix(4, 3, 22);
    KernelSpec g;
    g.sigma = 0.9;
    Matrix R = cross_gram(X, Z, g);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 4; ++j)
            CHECK(R(i, j) ==
                  Catch::Approx(kernel_eval(g, X.row(i).transpose(), Z.row(j).transpose())));
}
