#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hmx/assembly.hpp"
#include "hmx/linalg.hpp"

using namespace hmx;

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

TEST_CASE("2d kernel: log of the distance") {
    Vec3 x(0.3, -1.0, 0), y(0.3, 1.0, 0);
    REQUIRE(kernel_eval(2, x, y) == Catch::Approx(-std::log(2.0) / kTwoPi).epsilon(1e-15));
}

TEST_CASE("segment log potential: closed forms") {
    Vec3 a(0, 0, 0), b(1, 0, 0);
    // x at a segment endpoint: int_0^1 log(t) dt = -1
    REQUIRE(log_segment_integral(Vec3(0, 0, 0), a, b) == Catch::Approx(-1.0).epsilon(1e-14));
    // x on the segment at s: int splits into two endpoint pieces,
    // s(log s - 1) + (1-s)(log(1-s) - 1)
    double s = 0.25;
    double expect = s * (std::log(s) - 1.0) + (1 - s) * (std::log(1 - s) - 1.0);
    REQUIRE(log_segment_integral(Vec3(s, 0, 0), a, b) == Catch::Approx(expect).epsilon(1e-14));
    // far away x: integrand nearly constant log|x|
    Vec3 far(0.5, 100.0, 0);
    REQUIRE(log_segment_integral(far, a, b) ==
            Catch::Approx(std::log(100.0)).epsilon(1e-4));
}

TEST_CASE("identical unit panel: hand value 3/(4 pi)") {
    // int_0^1 int_0^1 log|s-t| ds dt = -3/2, so the entry is 1.5/(2 pi)
    BoundaryMesh mesh;
    mesh.dim = 2;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
    mesh.elements = {{0, 1, -1}, {1, 2, -1}, {2, 3, -1}, {3, 0, -1}};
    validate_topology(mesh);
    mesh.finalize();
    double v00 = galerkin_entry(mesh, 0, 0);
    REQUIRE(v00 == Catch::Approx(1.5 / kTwoPi).epsilon(1e-14));
    REQUIRE(v00 == Catch::Approx(0.23873241463784303).epsilon(1e-14));

    // adjacent collinear panels [0,1] x [1,2] on a line:
    // int int log|s-t| = 2 log 2 - 3/2, entry (3/2 - 2 log 2)/(2 pi)
    BoundaryMesh line;
    line.dim = 2;
    line.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(1, -1, 0)};
    line.elements = {{0, 1, -1}, {1, 2, -1}, {2, 3, -1}, {3, 0, -1}};
    validate_topology(line);
    line.finalize();
    REQUIRE(galerkin_entry(line, 0, 1) ==
            Catch::Approx((1.5 - 2.0 * std::log(2.0)) / kTwoPi).epsilon(1e-13));
}

TEST_CASE("2d entries match the adaptive oracle") {
    BoundaryMesh mesh = generate_lshape_boundary(2, 0.5);  // N = 16
    // identical, collinear-adjacent, corner-adjacent, and far pairs
    const int pairs[][2] = {{0, 0}, {0, 1}, {3, 4}, {0, 8}, {2, 13}, {15, 0}};
    for (auto& p : pairs) {
        double assembled = galerkin_entry(mesh, p[0], p[1]);
        double reference = entry_oracle(mesh, p[0], p[1]);
        CAPTURE(p[0], p[1], assembled, reference);
        REQUIRE(assembled == Catch::Approx(reference).epsilon(1e-11));
    }
}

TEST_CASE("assembled matrix is exactly symmetric and thread independent") {
    BoundaryMesh mesh = generate_lshape_boundary(8, 0.5);  // N = 64
    DenseMatrix v1 = assemble_single_layer(mesh, 1);
    REQUIRE((v1 - v1.transpose()).norm() == 0.0);
    DenseMatrix v4 = assemble_single_layer(mesh, 4);
    REQUIRE((v1 - v4).norm() == 0.0);
}

TEST_CASE("scaled lshape matrix is positive definite") {
    BoundaryMesh mesh = generate_lshape_boundary(8, 0.5);
    DenseMatrix v = assemble_single_layer(mesh, 1);
    REQUIRE_NOTHROW(dense_cholesky(v));
}

TEST_CASE("unscaled large domain loses positive definiteness") {
    // domain diameter 4*sqrt(2) > 1: the log kernel changes sign
    BoundaryMesh mesh = generate_lshape_boundary(8, 4.0);
    DenseMatrix v = assemble_single_layer(mesh, 1);
    REQUIRE_THROWS_AS(dense_cholesky(v), NotSpdError);
}

TEST_CASE("rhs assembly integrates exactly for constants and linears") {
    BoundaryMesh mesh = generate_lshape_boundary(2, 0.5);
    Vector ones = assemble_rhs(mesh, [](const Vec3&) { return 1.0; });
    for (int e = 0; e < mesh.n_elements(); ++e)
        REQUIRE(ones[e] == Catch::Approx(mesh.measures[e]).epsilon(1e-15));
    Vector lin = assemble_rhs(mesh, [](const Vec3& p) { return 3.0 * p[0] - p[1]; });
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Vec3 c = mesh.centroids[e];
        REQUIRE(lin[e] ==
                Catch::Approx(mesh.measures[e] * (3.0 * c[0] - c[1])).margin(1e-15));
    }
}

TEST_CASE("matrix snapshot round trip") {
    DenseMatrix m = random_matrix(7, 5, 99);
    save_matrix(m, "matrix_roundtrip_tmp.bin");
    DenseMatrix back = load_matrix("matrix_roundtrip_tmp.bin");
    REQUIRE(back.rows() == 7);
    REQUIRE(back.cols() == 5);
    REQUIRE((m - back).norm() == 0.0);
    std::remove("matrix_roundtrip_tmp.bin");
}
