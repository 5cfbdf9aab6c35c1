// Gauss-Legendre rules (computed once per order) and triangle quadrature.
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "hmx/geometry.hpp"

namespace hmx {

struct Rule1d {
    std::vector<double> nodes;    // on [0,1]
    std::vector<double> weights;  // sum to 1
};

// Newton iteration on Legendre polynomials; nodes accurate to machine eps.
inline Rule1d make_gauss_legendre(int n) {
    Rule1d rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));  // Chebyshev-like initial guess
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map from [-1,1] to [0,1]
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

inline const Rule1d& gauss_legendre(int n) {
    static std::map<int, Rule1d> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

// Quadrature over the unit simplex {x,y >= 0, x + y <= 1}; weights sum to 1/2.
struct RuleTri {
    std::vector<double> x, y, w;
    int size() const { return int(w.size()); }
};

// Degree-5 rule with 7 points (centroid + two symmetric orbits).
inline const RuleTri& triangle_rule_deg5() {
    static RuleTri rule = [] {
        RuleTri r;
        const double a1 = 0.059715871789769820;  // orbit near vertices
        const double b1 = 0.470142064105115090;
        const double w1 = 0.066197076394253090;
        const double a2 = 0.797426985353087320;
        const double b2 = 0.101286507323456340;
        const double w2 = 0.062969590272413576;
        r.x = {1.0 / 3.0, a1, b1, b1, a2, b2, b2};
        r.y = {1.0 / 3.0, b1, a1, b1, b2, a2, b2};
        r.w = {0.1125, w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

// Collapsed (Duffy) tensor rule of n*n points: exact for polynomials of
// moderate degree, exponentially convergent for analytic integrands.
inline RuleTri triangle_rule_tensor(int n) {
    const Rule1d& g = gauss_legendre(n);
    RuleTri r;
    r.x.reserve(n * n);
    r.y.reserve(n * n);
    r.w.reserve(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double u = g.nodes[i], v = g.nodes[j];
            r.x.push_back(u * (1.0 - v));
            r.y.push_back(u * v);
            r.w.push_back(g.weights[i] * g.weights[j] * u);
        }
    return r;
}

inline const RuleTri& triangle_rule_tensor_cached(int n) {
    static std::map<int, RuleTri> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, triangle_rule_tensor(n)).first;
    return it->second;
}

// Integrate f over a physical triangle given a simplex rule.
template <class F>
double integrate_triangle(const RuleTri& rule, const Vec3& v0, const Vec3& v1, const Vec3& v2,
                          F&& f) {
    Vec3 e1 = v1 - v0, e2 = v2 - v0;
    double jac = e1.cross(e2).norm();  // = 2 * area
    double sum = 0.0;
    for (int q = 0; q < rule.size(); ++q)
        sum += rule.w[q] * f(Vec3(v0 + rule.x[q] * e1 + rule.y[q] * e2));
    return sum * jac;
}

template <class F>
double integrate_segment(const Rule1d& rule, const Vec3& a, const Vec3& b, F&& f) {
    double len = (b - a).norm();
    double sum = 0.0;
    for (size_t q = 0; q < rule.nodes.size(); ++q)
        sum += rule.weights[q] * f(Vec3(a + rule.nodes[q] * (b - a)));
    return sum * len;
}

}  // namespace hmx
