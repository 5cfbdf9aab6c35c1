// Galerkin matrix of the single-layer operator for piecewise-constant
// densities: V[j][k] = int_{T_j} int_{T_k} G(x,y).
//
// 2d entries use the exact inner integral of log|x-y| with an outer
// Gauss rule on subdivided panels (closed form when the panels are
// collinear).  3d entries use Duffy-type reduced formulas for touching
// triangles and the exact triangle potential with an outer rule otherwise.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <queue>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hmx/kernel.hpp"
#include "hmx/mesh.hpp"
#include "hmx/quadrature.hpp"

namespace hmx {

namespace detail {

// ---------------------------------------------------------------- 2d entries

// Outer integral of the exact inner potential over panel [a1,b1]: pieces are
// accepted once they are at least as far from the source panel as they are
// long, which grades the subdivision into shared corners.
inline double outer_log_integral_2d(const Vec3& a1, const Vec3& b1, const Vec3& a2,
                                    const Vec3& b2) {
    const Rule1d& g = gauss_legendre(16);
    const double total_len = (b1 - a1).norm();
    const double min_len = total_len * 0x1p-44;
    double sum = 0.0;
    struct Piece {
        double t0, t1;
    };
    std::vector<Piece> stack{{0.0, 1.0}};
    while (!stack.empty()) {
        Piece p = stack.back();
        stack.pop_back();
        Vec3 pa = a1 + p.t0 * (b1 - a1), pb = a1 + p.t1 * (b1 - a1);
        double len = (p.t1 - p.t0) * total_len;
        if (segment_segment_distance(pa, pb, a2, b2) >= len || len <= min_len) {
            for (size_t q = 0; q < g.nodes.size(); ++q) {
                Vec3 x = pa + g.nodes[q] * (pb - pa);
                sum += g.weights[q] * len * log_segment_integral(x, a2, b2);
            }
        } else {
            double tm = 0.5 * (p.t0 + p.t1);
            stack.push_back({p.t0, tm});
            stack.push_back({tm, p.t1});
        }
    }
    return sum;
}

inline double galerkin_entry_2d(const BoundaryMesh& mesh, int j, int k) {
    const Vec3 &a1 = mesh.corner(j, 0), &b1 = mesh.corner(j, 1);
    const Vec3 &a2 = mesh.corner(k, 0), &b2 = mesh.corner(k, 1);
    double raw = segments_collinear(a1, b1, a2, b2)
                     ? log_collinear_double_integral(a1, b1, a2, b2)
                     : outer_log_integral_2d(a1, b1, a2, b2);
    return -raw / (2.0 * M_PI);
}

// ---------------------------------------------------------------- 3d entries

// Reduced formulas for touching triangles (relative-coordinate Duffy
// transforms with the radial direction integrated analytically).  The
// returned values are int int 1/|x-y|; conventions follow the derivation:
// identical panels take edge vectors u = B-A, v = C-B; edge-sharing pairs
// take the shared edge u = B-A plus v, w pointing to the free vertices; and
// vertex-sharing pairs take both edge chains from the shared vertex.

inline double duffy_identical(const Vec3& A, const Vec3& B, const Vec3& C, int nq = 16) {
    Vec3 u = B - A, v = C - B;
    double jsq = u.cross(v).squaredNorm();
    const Rule1d& g = gauss_legendre(nq);
    double acc = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        double e = g.nodes[i];
        acc += g.weights[i] * (1.0 / (e * u + v).norm() + 1.0 / (e * v + u).norm() +
                               1.0 / (e * (u + v) - v).norm());
    }
    return jsq * acc / 3.0;
}

inline double duffy_common_edge(const Vec3& A, const Vec3& B, const Vec3& Cx, const Vec3& Cy,
                                int nq = 12) {
    Vec3 u = B - A, v = Cx - B, w = Cy - B;
    double jac = u.cross(v).norm() * u.cross(w).norm();
    const Rule1d& g = gauss_legendre(nq);
    double acc = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i)
        for (size_t j = 0; j < g.nodes.size(); ++j) {
            double e2 = g.nodes[i], e3 = g.nodes[j];
            double f = e2 / (e2 * (e3 * (u + w) - w) + v).norm() +
                       e2 / (v - e2 * (u + v + e3 * w)).norm() +
                       e2 / (e2 * (v - e3 * (u + v)) - w).norm() +
                       e2 / (v - e2 * (w + e3 * (u + v))).norm() +
                       1.0 / (e2 * (u + w) + e3 * v - w).norm();
            acc += g.weights[i] * g.weights[j] * f;
        }
    return jac * acc / 6.0;
}

inline double duffy_common_vertex(const Vec3& A, const Vec3& Bx, const Vec3& Cx, const Vec3& By,
                                  const Vec3& Cy, int nq = 10) {
    Vec3 u = Bx - A, v = Cx - Bx, w = By - A, z = Cy - By;
    double jac = u.cross(v).norm() * w.cross(z).norm();
    const Rule1d& g = gauss_legendre(nq);
    double acc = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i)
        for (size_t j = 0; j < g.nodes.size(); ++j)
            for (size_t k = 0; k < g.nodes.size(); ++k) {
                double e1 = g.nodes[i], e2 = g.nodes[j], e3 = g.nodes[k];
                double f = e2 / (u + e1 * v - e2 * (w + e3 * z)).norm() +
                           e2 / (w + e1 * z - e2 * (u + e3 * v)).norm();
                acc += g.weights[i] * g.weights[j] * g.weights[k] * f;
            }
    return jac * acc / 3.0;
}

inline double triangle_diameter(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
    return std::max({(v1 - v0).norm(), (v2 - v1).norm(), (v0 - v2).norm()});
}

inline double triangle_pair_distance(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                                     const Vec3& b0, const Vec3& b1, const Vec3& b2) {
    // segment-based lower bound is exact for non-intersecting triangles
    // whose projections do not overlap; for our disjoint panels the closest
    // points lie on the boundaries, so edge-edge distances suffice.
    const Vec3* ea[3][2] = {{&a0, &a1}, {&a1, &a2}, {&a2, &a0}};
    const Vec3* eb[3][2] = {{&b0, &b1}, {&b1, &b2}, {&b2, &b0}};
    double best = std::numeric_limits<double>::infinity();
    for (auto& i : ea)
        for (auto& j : eb)
            best = std::min(best, segment_segment_distance(*i[0], *i[1], *j[0], *j[1]));
    return best;
}

inline int disjoint_outer_order(double ratio) {
    if (ratio >= 4.0) return 4;
    if (ratio >= 2.0) return 5;
    if (ratio >= 1.0) return 7;
    return 10;
}

// Outer quadrature of the exact source potential; the outer triangle is
// subdivided while it is large relative to its distance from the source.
inline double outer_potential_integral_3d(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                                          const Vec3& b0, const Vec3& b1, const Vec3& b2,
                                          int depth = 0) {
    double dist = triangle_pair_distance(a0, a1, a2, b0, b1, b2);
    double diam = triangle_diameter(a0, a1, a2);
    double ratio = dist / diam;
    if (ratio >= 0.4 || depth >= 6) {
        const RuleTri& rule = triangle_rule_tensor_cached(disjoint_outer_order(ratio));
        return integrate_triangle(rule, a0, a1, a2, [&](const Vec3& x) {
            return triangle_inverse_distance_integral(x, b0, b1, b2);
        });
    }
    Vec3 m01 = 0.5 * (a0 + a1), m12 = 0.5 * (a1 + a2), m20 = 0.5 * (a2 + a0);
    return outer_potential_integral_3d(a0, m01, m20, b0, b1, b2, depth + 1) +
           outer_potential_integral_3d(m01, a1, m12, b0, b1, b2, depth + 1) +
           outer_potential_integral_3d(m20, m12, a2, b0, b1, b2, depth + 1) +
           outer_potential_integral_3d(m01, m12, m20, b0, b1, b2, depth + 1);
}

inline double galerkin_entry_3d(const BoundaryMesh& mesh, int j, int k) {
    const auto &ej = mesh.elements[j], &ek = mesh.elements[k];
    double raw;
    if (j == k) {
        raw = duffy_identical(mesh.corner(j, 0), mesh.corner(j, 1), mesh.corner(j, 2));
    } else {
        int shared_j[3], shared_k[3], n_shared = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (ej[a] == ek[b]) {
                    shared_j[n_shared] = a;
                    shared_k[n_shared] = b;
                    ++n_shared;
                }
        if (n_shared == 2) {
            const Vec3 &A = mesh.corner(j, shared_j[0]), &B = mesh.corner(j, shared_j[1]);
            const Vec3& Cx = mesh.corner(j, 3 - shared_j[0] - shared_j[1]);
            const Vec3& Cy = mesh.corner(k, 3 - shared_k[0] - shared_k[1]);
            raw = duffy_common_edge(A, B, Cx, Cy);
        } else if (n_shared == 1) {
            const Vec3& A = mesh.corner(j, shared_j[0]);
            const Vec3& Bx = mesh.corner(j, (shared_j[0] + 1) % 3);
            const Vec3& Cx = mesh.corner(j, (shared_j[0] + 2) % 3);
            const Vec3& By = mesh.corner(k, (shared_k[0] + 1) % 3);
            const Vec3& Cy = mesh.corner(k, (shared_k[0] + 2) % 3);
            raw = duffy_common_vertex(A, Bx, Cx, By, Cy);
        } else {
            // outer integral over the smaller panel converges fastest
            bool j_outer = mesh.diameters[j] <= mesh.diameters[k];
            int o = j_outer ? j : k, s = j_outer ? k : j;
            raw = outer_potential_integral_3d(mesh.corner(o, 0), mesh.corner(o, 1),
                                              mesh.corner(o, 2), mesh.corner(s, 0),
                                              mesh.corner(s, 1), mesh.corner(s, 2));
        }
    }
    return raw / (4.0 * M_PI);
}

template <class Fn>
inline void parallel_rows(int n, int threads, Fn&& body) {
    if (threads <= 1) {
        for (int j = 0; j < n; ++j) body(j);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int j = t; j < n; j += threads) body(j);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

inline double galerkin_entry(const BoundaryMesh& mesh, int j, int k) {
    return mesh.dim == 2 ? detail::galerkin_entry_2d(mesh, j, k)
                         : detail::galerkin_entry_3d(mesh, j, k);
}

// Dense symmetric Galerkin matrix.  The result does not depend on the thread
// count: every entry is computed independently and written exactly once.
inline DenseMatrix assemble_single_layer(const BoundaryMesh& mesh, int threads = 1) {
    const int n = mesh.n_elements();
    DenseMatrix V(n, n);
    detail::parallel_rows(n, threads, [&](int j) {
        for (int k = j; k < n; ++k) {
            double val = galerkin_entry(mesh, j, k);
            V(j, k) = val;
            V(k, j) = val;
        }
    });
    return V;
}

// Load vector b_j = int_{T_j} f with a fixed order-8 Gauss rule.
inline Vector assemble_rhs(const BoundaryMesh& mesh, const std::function<double(const Vec3&)>& f) {
    const int n = mesh.n_elements();
    Vector b(n);
    for (int e = 0; e < n; ++e) {
        if (mesh.dim == 2)
            b[e] = integrate_segment(gauss_legendre(8), mesh.corner(e, 0), mesh.corner(e, 1), f);
        else
            b[e] = integrate_triangle(triangle_rule_tensor_cached(8), mesh.corner(e, 0),
                                      mesh.corner(e, 1), mesh.corner(e, 2), f);
    }
    return b;
}

// ---------------------------------------------------------------------------
// Independent reference for single entries: adaptive refinement driven by
// local error estimates, no analytic inner integral in 2d and no Duffy
// transform in 3d.  Throws OracleBudgetError (carrying the best estimate)
// when the subdivision budget is exhausted before the tolerance is met.

struct OracleBudgetError : std::runtime_error {
    double best_estimate;
    explicit OracleBudgetError(double estimate)
        : std::runtime_error("entry oracle: tolerance not reached within subdivision budget"),
          best_estimate(estimate) {}
};

namespace detail {

// Worst-interval-first adaptive Gauss on [0,1].  Refines until the summed
// local error estimates drop under tol plus a roundoff floor proportional to
// the accumulated absolute mass (estimates below that floor are noise).
template <class F>
double adaptive_line(F&& f, double tol, long& budget) {
    struct Seg {
        double t0, t1, value, mass, err;
        bool operator<(const Seg& o) const { return err < o.err; }
    };
    const Rule1d& g = gauss_legendre(8);
    auto eval = [&](double t0, double t1) {
        double acc = 0.0;
        for (size_t q = 0; q < g.nodes.size(); ++q)
            acc += g.weights[q] * f(t0 + g.nodes[q] * (t1 - t0));
        return acc * (t1 - t0);
    };
    auto make = [&](double t0, double t1) {
        double tm = 0.5 * (t0 + t1);
        double coarse = eval(t0, t1);
        double fine = eval(t0, tm) + eval(tm, t1);
        return Seg{t0, t1, fine, std::abs(fine), std::abs(fine - coarse)};
    };
    std::priority_queue<Seg> queue;
    queue.push(make(0.0, 1.0));
    double total = queue.top().value, total_err = queue.top().err;
    double total_mass = queue.top().mass;
    while (total_err > tol + 5e-14 * total_mass) {
        if (--budget < 0) throw OracleBudgetError(total);
        Seg worst = queue.top();
        queue.pop();
        total -= worst.value;
        total_err -= worst.err;
        total_mass -= worst.mass;
        double tm = 0.5 * (worst.t0 + worst.t1);
        for (Seg child : {make(worst.t0, tm), make(tm, worst.t1)}) {
            total += child.value;
            total_err += child.err;
            total_mass += child.mass;
            queue.push(child);
        }
    }
    return total;
}

// Same scheme on a triangle with the degree-5 rule and 4-way splits.
template <class F>
double adaptive_triangle(F&& f, const Vec3& v0, const Vec3& v1, const Vec3& v2, double tol,
                         long& budget) {
    struct Cell {
        Vec3 a, b, c;
        double value, mass, err;
        bool operator<(const Cell& o) const { return err < o.err; }
    };
    const RuleTri& rule = triangle_rule_deg5();
    auto eval = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
        return integrate_triangle(rule, a, b, c, f);
    };
    auto refine = [&](const Vec3& a, const Vec3& b, const Vec3& c, double coarse) {
        Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
        double fine = eval(a, ab, ca) + eval(ab, b, bc) + eval(ca, bc, c) + eval(ab, bc, ca);
        return Cell{a, b, c, fine, std::abs(fine), std::abs(fine - coarse)};
    };
    std::priority_queue<Cell> queue;
    queue.push(refine(v0, v1, v2, eval(v0, v1, v2)));
    double total = queue.top().value, total_err = queue.top().err;
    double total_mass = queue.top().mass;
    while (total_err > tol + 5e-14 * total_mass) {
        if (--budget < 0) throw OracleBudgetError(total);
        Cell worst = queue.top();
        queue.pop();
        total -= worst.value;
        total_err -= worst.err;
        total_mass -= worst.mass;
        Vec3 ab = 0.5 * (worst.a + worst.b), bc = 0.5 * (worst.b + worst.c),
             ca = 0.5 * (worst.c + worst.a);
        const Vec3* children[4][3] = {{&worst.a, &ab, &ca},
                                      {&ab, &worst.b, &bc},
                                      {&ca, &bc, &worst.c},
                                      {&ab, &bc, &ca}};
        for (auto& ch : children) {
            Cell cell = refine(*ch[0], *ch[1], *ch[2], eval(*ch[0], *ch[1], *ch[2]));
            total += cell.value;
            total_err += cell.err;
            total_mass += cell.mass;
            queue.push(cell);
        }
    }
    return total;
}

}  // namespace detail

inline double entry_oracle(const BoundaryMesh& mesh, int j, int k, double tol = 1e-12) {
    long budget = 400000;
    if (mesh.dim == 2) {
        const Vec3 &a1 = mesh.corner(j, 0), &b1 = mesh.corner(j, 1);
        const Vec3 &a2 = mesh.corner(k, 0), &b2 = mesh.corner(k, 1);
        const double len1 = mesh.measures[j], len2 = mesh.measures[k];
        // scale-aware absolute tolerances for the nested adaptive passes
        double scale = len1 * len2 * (1.0 + std::abs(std::log(len1 + len2)));
        double outer_tol = 0.5 * std::max(tol * scale, 1e-15 * scale);
        double inner_tol = outer_tol * 1e-3;
        auto inner = [&](const Vec3& x) {
            // Split at the foot of the perpendicular so each side has at most
            // an endpoint singularity.  Distances come from r(t)^2 = dperp^2 +
            // ((t - tfoot) len2)^2 with the parameter offset built from
            // non-negative terms; evaluating |x - y(t)| directly would cancel
            // catastrophically once x sits near the segment.
            Vec3 d2 = b2 - a2;
            Vec3 w = x - a2;
            double tfoot = w.dot(d2) / d2.squaredNorm();
            double dperp = (w - tfoot * d2).norm();
            double tsplit = std::clamp(tfoot, 0.0, 1.0);
            double acc = 0.0;
            long inner_budget = 4000;
            if (tsplit > 0.0) {
                double away = tfoot - tsplit;  // positive only when the foot lies past b2
                acc += tsplit *
                       detail::adaptive_line(
                           [&](double u) {
                               return std::log(std::hypot(dperp, (away + u * tsplit) * len2));
                           },
                           inner_tol / len2, inner_budget);
            }
            if (tsplit < 1.0) {
                double away = tsplit - tfoot;  // positive only when the foot lies before a2
                acc += (1.0 - tsplit) *
                       detail::adaptive_line(
                           [&](double u) {
                               return std::log(
                                   std::hypot(dperp, (away + u * (1.0 - tsplit)) * len2));
                           },
                           inner_tol / len2, inner_budget);
            }
            return acc * len2;
        };
        double outer = detail::adaptive_line(
            [&](double s) { return inner(Vec3(a1 + s * (b1 - a1))); }, outer_tol / len1, budget);
        return -(outer * len1) / (2.0 * M_PI);
    }
    const double scale = mesh.measures[j] * mesh.measures[k] /
                         std::max(mesh.diameters[j], mesh.diameters[k]);
    double outer_tol = std::max(tol * scale, 1e-15 * scale);
    double value = detail::adaptive_triangle(
        [&](const Vec3& x) {
            return triangle_inverse_distance_integral(x, mesh.corner(k, 0), mesh.corner(k, 1),
                                                      mesh.corner(k, 2));
        },
        mesh.corner(j, 0), mesh.corner(j, 1), mesh.corner(j, 2), outer_tol, budget);
    return value / (4.0 * M_PI);
}

// ---------------------------------------------------------------------------
// Binary matrix snapshot: text header "rows cols\n", then row-major
// little-endian IEEE doubles.

inline void save_matrix(const DenseMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << m.rows() << " " << m.cols() << "\n";
    std::vector<double> row(m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index jj = 0; jj < m.cols(); ++jj) row[jj] = m(i, jj);
        out.write(reinterpret_cast<const char*>(row.data()),
                  std::streamsize(sizeof(double) * row.size()));
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline DenseMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    Eigen::Index rows = 0, cols = 0;
    in >> rows >> cols;
    in.get();  // newline
    if (!in || rows < 0 || cols < 0) throw std::runtime_error("bad matrix header in " + path);
    DenseMatrix m(rows, cols);
    std::vector<double> row(size_t(cols), 0.0);
    for (Eigen::Index i = 0; i < rows; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), std::streamsize(sizeof(double) * row.size()));
        if (!in) throw std::runtime_error("truncated matrix data in " + path);
        for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = row[jj];
    }
    return m;
}

}  // namespace hmx
