#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "hmx/mesh.hpp"

using namespace hmx;

namespace {

std::string write_temp(const std::string& text) {
    std::string path = "mesh_test_tmp.txt";
    std::ofstream out(path);
    out << text;
    out.close();
    return path;
}

}  // namespace

TEST_CASE("lshape generator: counts, lengths, corners") {
    BoundaryMesh mesh = generate_lshape_boundary(1, 1.0);
    REQUIRE(mesh.n_elements() == 8);
    double total = 0.0;
    for (int e = 0; e < 8; ++e) {
        REQUIRE(mesh.measures[e] == Catch::Approx(0.5).epsilon(1e-15));
        total += mesh.measures[e];
    }
    REQUIRE(total == Catch::Approx(4.0).epsilon(1e-15));

    // all six corners must be mesh vertices
    const double corners[6][2] = {{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
    for (auto& c : corners) {
        bool found = false;
        for (const Vec3& v : mesh.vertices)
            if (v[0] == c[0] && v[1] == c[1]) found = true;
        REQUIRE(found);
    }
}

TEST_CASE("lshape generator: N = 8 refinement and scaling") {
    REQUIRE(generate_lshape_boundary(2048, 1.0).n_elements() == 16384);

    BoundaryMesh half = generate_lshape_boundary(1, 0.5);
    double diam = 0.0;
    for (const Vec3& a : half.vertices)
        for (const Vec3& b : half.vertices) diam = std::max(diam, (a - b).norm());
    REQUIRE(diam == Catch::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("cube surface: counts, area, element shape") {
    BoundaryMesh one = generate_cube_surface(1, 1.0);
    REQUIRE(one.n_elements() == 12);
    double area = 0.0;
    for (int e = 0; e < one.n_elements(); ++e) area += one.measures[e];
    REQUIRE(area == Catch::Approx(6.0).epsilon(1e-14));

    REQUIRE(generate_cube_surface(5, 1.0).n_elements() == 300);

    BoundaryMesh m2 = generate_cube_surface(2, 0.5);
    for (int e = 0; e < m2.n_elements(); ++e)
        REQUIRE(m2.diameters[e] == Catch::Approx(0.25 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("mesh file round trip is exact") {
    BoundaryMesh mesh = generate_cube_surface(1, 1.0);
    save_mesh(mesh, "mesh_roundtrip_tmp.txt");
    BoundaryMesh back = load_mesh("mesh_roundtrip_tmp.txt");
    REQUIRE(back.dim == mesh.dim);
    REQUIRE(back.elements == mesh.elements);
    REQUIRE(back.n_vertices() == mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v)
        REQUIRE((back.vertices[v] - mesh.vertices[v]).norm() == 0.0);
    std::remove("mesh_roundtrip_tmp.txt");
}

TEST_CASE("mesh loader rejects bad input") {
    SECTION("dangling vertex index") {
        std::string path = write_temp("2 2 1\n0 0\n1 0\n0 7\n");
        REQUIRE_THROWS_WITH(load_mesh(path), Catch::Matchers::ContainsSubstring(
                                                 "invalid element index"));
        std::remove(path.c_str());
    }
    SECTION("empty element list") {
        std::string path = write_temp("2 2 0\n0 0\n1 0\n");
        REQUIRE_THROWS_WITH(load_mesh(path), Catch::Matchers::ContainsSubstring("empty mesh"));
        std::remove(path.c_str());
    }
    SECTION("open curve") {
        // three segments of a square: vertex degree 1 at the ends
        std::string path = write_temp("2 4 3\n0 0\n1 0\n1 1\n0 1\n0 1\n1 2\n2 3\n");
        REQUIRE_THROWS_WITH(load_mesh(path),
                            Catch::Matchers::ContainsSubstring("not closed"));
        std::remove(path.c_str());
    }
}

TEST_CASE("mesh stats: uniform lshape") {
    MeshStats s = mesh_stats(generate_lshape_boundary(1, 1.0));
    REQUIRE(s.n_elements == 8);
    REQUIRE(s.h_min == Catch::Approx(0.5).epsilon(1e-15));
    REQUIRE(s.h_max == Catch::Approx(0.5).epsilon(1e-15));
    REQUIRE(s.quasiuniformity == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mesh stats: cube gamma is shape regular") {
    MeshStats s = mesh_stats(generate_cube_surface(3, 1.0));
    // right triangle with legs L: diam^2 / area = 2 L^2 / (L^2 / 2) = 4
    REQUIRE(s.gamma == Catch::Approx(2.0).epsilon(1e-13));
}
