// Laplace single-layer kernel and exact element potentials.
#pragma once

#include <cmath>
#include <stdexcept>

#include "hmx/geometry.hpp"

namespace hmx {

// G(x,y) = -log|x-y| / (2 pi) in 2d, 1 / (4 pi |x-y|) in 3d.
inline double kernel_eval(int dim, const Vec3& x, const Vec3& y) {
    double r = (x - y).norm();
    if (r <= 0.0) throw std::domain_error("kernel_eval: coincident points");
    return dim == 2 ? -std::log(r) / (2.0 * M_PI) : 1.0 / (4.0 * M_PI * r);
}

// ---------------------------------------------------------------------------
// 2d: exact integrals of log|x - y| over segments.

// int_{[a,b]} log|x - y| ds_y, valid for x anywhere including on the segment.
inline double log_segment_integral(const Vec3& x, const Vec3& a, const Vec3& b) {
    Vec3 d = b - a;
    double len = d.norm();
    Vec3 t = d / len;
    Vec3 p = x - a;
    double s0 = p.dot(t);
    double delta2 = std::max(p.squaredNorm() - s0 * s0, 0.0);
    double delta = std::sqrt(delta2);
    auto F = [&](double u) {
        if (delta > 1e-300)
            return 0.5 * u * std::log(u * u + delta2) - u + delta * std::atan(u / delta);
        return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u;
    };
    return F(s0) - F(s0 - len);
}

// Antiderivative with d^2 h / dx dy = log|x - y| for points on a common line.
inline double log_line_antiderivative(double w) {
    return w == 0.0 ? 0.0 : -0.5 * w * w * (std::log(std::abs(w)) - 1.5);
}

// Exact double integral of log|x - y| over two collinear segments (they may
// coincide, touch, or overlap).
inline double log_collinear_double_integral(const Vec3& a1, const Vec3& b1, const Vec3& a2,
                                            const Vec3& b2) {
    Vec3 t = (b1 - a1).normalized();
    double x0 = 0.0, x1 = (b1 - a1).dot(t);
    double y0 = (a2 - a1).dot(t), y1 = (b2 - a1).dot(t);
    auto h = log_line_antiderivative;
    return h(x1 - y1) - h(x1 - y0) - h(x0 - y1) + h(x0 - y0);
}

inline bool segments_collinear(const Vec3& a1, const Vec3& b1, const Vec3& a2, const Vec3& b2,
                               double tol = 1e-12) {
    Vec3 d1 = b1 - a1;
    double scale = d1.norm();
    auto off_line = [&](const Vec3& p) {
        Vec3 r = p - a1;
        return (r - (r.dot(d1) / d1.squaredNorm()) * d1).norm();
    };
    return off_line(a2) <= tol * scale && off_line(b2) <= tol * scale;
}

// ---------------------------------------------------------------------------
// 3d: exact Newton potential of a flat triangle with unit density,
//     int_T 1 / |x - y| dA_y.
//
// Per-edge decomposition: with h the signed height of x over the triangle
// plane and, for each edge, t0 the in-plane distance from the projection of x
// to the edge line, s-+ the arclength coordinates of the edge endpoints and
// R-+ their distances to x,
//   I = sum_e t0 * log((R+ + s+)/(R- + s-))
//     - |h| * sum_e [atan(t0 s+ / (R0^2 + |h| R+)) - atan(t0 s- / (R0^2 + |h| R-))]
// where R0^2 = t0^2 + h^2.  The log quotient is evaluated via
// (R + s)(R - s) = R0^2 to stay stable for s < 0.
inline double triangle_inverse_distance_integral(const Vec3& x, const Vec3& v0, const Vec3& v1,
                                                 const Vec3& v2) {
    Vec3 n = (v1 - v0).cross(v2 - v0);
    double two_area = n.norm();
    if (two_area <= 0.0) throw std::domain_error("degenerate triangle");
    Vec3 nhat = n / two_area;
    double h = (x - v0).dot(nhat);
    double ah = std::abs(h);
    const double tiny = 1e-14 * std::sqrt(two_area);

    const Vec3* verts[4] = {&v0, &v1, &v2, &v0};
    double sum_log = 0.0, sum_atan = 0.0;
    for (int e = 0; e < 3; ++e) {
        const Vec3 &p = *verts[e], &q = *verts[e + 1];
        Vec3 edge = q - p;
        double elen = edge.norm();
        Vec3 ehat = edge / elen;
        Vec3 mhat = ehat.cross(nhat);  // outward in-plane normal of edge e
        double t0 = (p - x).dot(mhat);
        double sm = (p - x).dot(ehat);
        double sp = (q - x).dot(ehat);
        double Rm = (p - x).norm();
        double Rp = (q - x).norm();
        double R0sq = t0 * t0 + h * h;
        auto stable = [&](double R, double s) { return s < 0.0 ? R0sq / (R - s) : R + s; };
        if (std::abs(t0) > tiny) {
            double num = stable(Rp, sp), den = stable(Rm, sm);
            if (num <= 0.0 || den <= 0.0)
                throw std::domain_error("evaluation point on triangle edge");
            sum_log += t0 * std::log(num / den);
        }
        if (ah > tiny)
            sum_atan += std::atan2(t0 * sp, R0sq + ah * Rp) - std::atan2(t0 * sm, R0sq + ah * Rm);
    }
    return sum_log - ah * sum_atan;
}

}  // namespace hmx
