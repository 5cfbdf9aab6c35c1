#include <catch2/catch_amalgamated.hpp>

#include <Eigen/SVD>

#include "hmx/linalg.hpp"

using namespace hmx;

TEST_CASE("splitmix generator is deterministic and in range") {
    SplitMix64 a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        double x = a.uniform(), y = b.uniform(), z = c.uniform();
        all_equal = all_equal && x == y;
        any_diff = any_diff || x != z;
        REQUIRE(x >= -1.0);
        REQUIRE(x < 1.0);
    }
    REQUIRE(all_equal);
    REQUIRE(any_diff);
}

TEST_CASE("power iteration matches full SVD") {
    for (int trial = 0; trial < 12; ++trial) {
        DenseMatrix a = random_matrix(40 + trial, 30 + (trial % 5), 1000 + uint64_t(trial));
        Eigen::BDCSVD<DenseMatrix> svd(a);
        double exact = svd.singularValues()[0];
        // the stability-based stop needs a tolerance well below the target
        // accuracy: a small sigma_1/sigma_2 gap stalls the estimate long
        // before it reaches the limit
        SpectralNormResult est = spectral_norm(a, 12345, 1e-9, 20000);
        CAPTURE(trial, exact, est.value, est.iterations);
        REQUIRE(est.converged);
        REQUIRE(est.value == Catch::Approx(exact).epsilon(1e-5));
    }
}

TEST_CASE("power iteration handles rank-one and zero maps") {
    DenseMatrix a = DenseMatrix::Zero(8, 8);
    REQUIRE(spectral_norm(a).value == 0.0);
    Vector u = random_unit_vector(10, 7), v = random_unit_vector(12, 8);
    DenseMatrix r1 = 3.5 * u * v.transpose();
    REQUIRE(spectral_norm(r1).value == Catch::Approx(3.5).epsilon(1e-8));
}

TEST_CASE("cholesky: frozen 2x2 factor") {
    DenseMatrix a(2, 2);
    a << 2, 1, 1, 2;
    DenseMatrix l = dense_cholesky(a);
    REQUIRE(l(0, 0) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
    REQUIRE(l(0, 1) == 0.0);
    REQUIRE(l(1, 0) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    REQUIRE(l(1, 1) == Catch::Approx(std::sqrt(1.5)).epsilon(1e-15));
}

TEST_CASE("cholesky reports the first failing pivot") {
    DenseMatrix a(2, 2);
    a << 1, 2, 2, 1;  // indefinite
    try {
        dense_cholesky(a);
        FAIL("expected NotSpdError");
    } catch (const NotSpdError& e) {
        REQUIRE(e.index == 1);
    }
}

TEST_CASE("cholesky and inverse reproduce random spd matrices") {
    DenseMatrix b = random_matrix(30, 30, 5);
    DenseMatrix a = b * b.transpose() + 30.0 * DenseMatrix::Identity(30, 30);
    DenseMatrix l = dense_cholesky(a);
    REQUIRE((l * l.transpose() - a).norm() < 1e-12 * a.norm());
    for (int i = 0; i < 30; ++i)
        for (int j = i + 1; j < 30; ++j) REQUIRE(l(i, j) == 0.0);
    DenseMatrix inv = dense_inverse(a);
    REQUIRE((a * inv - DenseMatrix::Identity(30, 30)).norm() < 1e-12);
    REQUIRE((inv - a.inverse()).norm() < 1e-12 * inv.norm());
}
