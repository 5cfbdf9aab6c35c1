// Axis-parallel boxes and the admissibility metric used by the cluster tree.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace hmx {

using Vec3 = Eigen::Vector3d;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Minimal axis-parallel bounding box.  Only the first `dim` axes are
// meaningful; unused axes are kept at zero so 2d and 3d share one type.
struct Aabb {
    Vec3 lo{Vec3::Zero()};
    Vec3 hi{Vec3::Zero()};
    int dim = 3;

    static Aabb empty(int dim) {
        Aabb b;
        b.dim = dim;
        for (int a = 0; a < dim; ++a) {
            b.lo[a] = std::numeric_limits<double>::infinity();
            b.hi[a] = -std::numeric_limits<double>::infinity();
        }
        return b;
    }

    void absorb(const Vec3& p) {
        for (int a = 0; a < dim; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }

    void absorb(const Aabb& other) {
        for (int a = 0; a < dim; ++a) {
            lo[a] = std::min(lo[a], other.lo[a]);
            hi[a] = std::max(hi[a], other.hi[a]);
        }
    }

    double extent(int axis) const { return hi[axis] - lo[axis]; }

    int longest_axis() const {
        int best = 0;
        for (int a = 1; a < dim; ++a)
            if (extent(a) > extent(best)) best = a;
        return best;
    }

    Vec3 center() const { return 0.5 * (lo + hi); }
};

// Hypercube used for admissibility checks: center plus a single side length,
// so diam = side * sqrt(dim) and distances are box distances per axis.
struct Box {
    Vec3 center{Vec3::Zero()};
    double side = 0.0;
    int dim = 3;

    static Box cubify(const Aabb& b) {
        Box c;
        c.dim = b.dim;
        c.center = Vec3::Zero();
        for (int a = 0; a < b.dim; ++a) c.center[a] = 0.5 * (b.lo[a] + b.hi[a]);
        c.side = 0.0;
        for (int a = 0; a < b.dim; ++a) c.side = std::max(c.side, b.extent(a));
        return c;
    }

    double diam() const { return side * std::sqrt(double(dim)); }
};

inline double box_distance(const Box& p, const Box& q) {
    double d2 = 0.0;
    for (int a = 0; a < p.dim; ++a) {
        double gap = std::abs(p.center[a] - q.center[a]) - 0.5 * (p.side + q.side);
        if (gap > 0.0) d2 += gap * gap;
    }
    return std::sqrt(d2);
}

// min(diam Bt, diam Bs) <= eta * dist(Bt, Bs)
inline bool is_admissible(const Box& bt, const Box& bs, double eta) {
    return std::min(bt.diam(), bs.diam()) <= eta * box_distance(bt, bs);
}

inline double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& x) {
    Vec3 d = b - a;
    double dd = d.squaredNorm();
    double t = dd > 0.0 ? (x - a).dot(d) / dd : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (x - (a + t * d)).norm();
}

// Euclidean distance between two closed segments.
inline double segment_segment_distance(const Vec3& a1, const Vec3& b1,
                                       const Vec3& a2, const Vec3& b2) {
    Vec3 u = b1 - a1, v = b2 - a2, w = a1 - a2;
    double A = u.dot(u), B = u.dot(v), C = v.dot(v);
    double D = u.dot(w), E = v.dot(w);
    double den = A * C - B * B;
    double s = 0.0, t = 0.0;
    if (den > 1e-14 * std::max(A, C) * std::max(A, C)) {
        s = std::clamp((B * E - C * D) / den, 0.0, 1.0);
    }
    t = C > 0.0 ? (B * s + E) / C : 0.0;
    if (t < 0.0 || t > 1.0) {
        t = std::clamp(t, 0.0, 1.0);
        s = A > 0.0 ? std::clamp((B * t - D) / A, 0.0, 1.0) : 0.0;
    }
    double best = ((a1 + s * u) - (a2 + t * v)).norm();
    // clamped interior solution can miss the optimum; endpoints close the gap
    best = std::min(best, segment_point_distance(a2, b2, a1));
    best = std::min(best, segment_point_distance(a2, b2, b1));
    best = std::min(best, segment_point_distance(a1, b1, a2));
    best = std::min(best, segment_point_distance(a1, b1, b2));
    return best;
}

}  // namespace hmx
