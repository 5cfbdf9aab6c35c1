#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hmx/quadrature.hpp"

using namespace hmx;

namespace {

// exact unit-simplex moment: int x^a y^b = a! b! / (a+b+2)!
double simplex_moment(int a, int b) {
    double num = 1.0, den = 1.0;
    for (int i = 2; i <= a; ++i) num *= i;
    for (int i = 2; i <= b; ++i) num *= i;
    for (int i = 2; i <= a + b + 2; ++i) den *= i;
    return num / den;
}

}  // namespace

TEST_CASE("gauss rule on [0,1]: weights and polynomial exactness") {
    for (int n : {2, 4, 8, 16}) {
        const Rule1d& rule = gauss_legendre(n);
        REQUIRE(int(rule.nodes.size()) == n);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        REQUIRE(wsum == Catch::Approx(1.0).epsilon(1e-14));
        // degree 2n-1 monomial, exact value 1/(2n)
        double acc = 0.0;
        for (int q = 0; q < n; ++q)
            acc += rule.weights[q] * std::pow(rule.nodes[q], 2 * n - 1);
        REQUIRE(acc == Catch::Approx(1.0 / (2.0 * n)).epsilon(1e-13));
        // nodes symmetric about 1/2
        for (int q = 0; q < n; ++q)
            REQUIRE(rule.nodes[q] + rule.nodes[n - 1 - q] == Catch::Approx(1.0).margin(1e-15));
    }
}

TEST_CASE("gauss rule is not exact one degree past its order") {
    const Rule1d& rule = gauss_legendre(2);
    double acc = 0.0;
    for (int q = 0; q < 2; ++q) acc += rule.weights[q] * std::pow(rule.nodes[q], 4);
    REQUIRE(std::abs(acc - 0.2) > 1e-4);
}

TEST_CASE("triangle rules integrate simplex monomials") {
    const RuleTri& deg5 = triangle_rule_deg5();
    double wsum = 0.0;
    for (double w : deg5.w) wsum += w;
    REQUIRE(wsum == Catch::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a + 0 <= 5; ++a)
        for (int b = 0; a + b <= 5; ++b) {
            double acc = 0.0;
            for (size_t q = 0; q < deg5.w.size(); ++q)
                acc += deg5.w[q] * std::pow(deg5.x[q], a) * std::pow(deg5.y[q], b);
            REQUIRE(acc == Catch::Approx(simplex_moment(a, b)).margin(1e-14));
        }

    const RuleTri& tensor = triangle_rule_tensor_cached(6);
    for (int a = 0; a + 0 <= 5; ++a)
        for (int b = 0; a + b <= 5; ++b) {
            double acc = 0.0;
            for (size_t q = 0; q < tensor.w.size(); ++q)
                acc += tensor.w[q] * std::pow(tensor.x[q], a) * std::pow(tensor.y[q], b);
            REQUIRE(acc == Catch::Approx(simplex_moment(a, b)).margin(1e-14));
        }
}

TEST_CASE("integrate_triangle: area and affine map") {
    Vec3 a(1, 1, 0), b(3, 1, 0), c(1, 4, 0);
    double area = integrate_triangle(triangle_rule_deg5(), a, b, c,
                                     [](const Vec3&) { return 1.0; });
    REQUIRE(area == Catch::Approx(3.0).epsilon(1e-14));

    // linear function: integral = area * value at centroid
    auto f = [](const Vec3& p) { return 2.0 * p[0] - p[1] + 0.5; };
    Vec3 centroid = (a + b + c) / 3.0;
    double val = integrate_triangle(triangle_rule_deg5(), a, b, c, f);
    REQUIRE(val == Catch::Approx(3.0 * f(centroid)).epsilon(1e-14));
}

TEST_CASE("integrate_segment matches closed forms") {
    Vec3 a(0, 0, 0), b(2, 0, 0);
    double val = integrate_segment(gauss_legendre(8), a, b,
                                   [](const Vec3& p) { return p[0] * p[0]; });
    REQUIRE(val == Catch::Approx(8.0 / 3.0).epsilon(1e-14));
}
