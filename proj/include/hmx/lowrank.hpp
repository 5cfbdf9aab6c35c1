// Rank-r block representations: truncated SVD and tensor Chebyshev
// interpolation of the kernel in the smaller cluster's box.
#pragma once

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <vector>

#include "hmx/clustering.hpp"
#include "hmx/kernel.hpp"
#include "hmx/quadrature.hpp"

namespace hmx {

struct LowRankFactor {
    DenseMatrix X;  // rows x rank
    DenseMatrix Y;  // cols x rank, block ~= X * Y^T
    double truncation_error = std::numeric_limits<double>::quiet_NaN();
    bool error_known = false;  // true when truncation_error = sigma_{r+1}

    Eigen::Index rank() const { return X.cols(); }
    DenseMatrix to_dense() const { return X * Y.transpose(); }
};

// Best rank-r approximation; X absorbs the singular values and
// truncation_error records sigma_{r+1} (zero when r exhausts the spectrum).
inline LowRankFactor truncated_svd(const DenseMatrix& a, int r) {
    if (r < 0) throw std::invalid_argument("rank must be non-negative");
    Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    int full = int(sigma.size());
    int keep = std::min(r, full);
    LowRankFactor f;
    f.X = svd.matrixU().leftCols(keep) * sigma.head(keep).asDiagonal();
    f.Y = svd.matrixV().leftCols(keep);
    f.truncation_error = keep < full ? sigma[keep] : 0.0;
    f.error_known = true;
    return f;
}

inline Vector singular_value_profile(const DenseMatrix& a) {
    Eigen::BDCSVD<DenseMatrix> svd(a);
    return svd.singularValues();
}

// ---------------------------------------------------------------------------
// Tensor-product Chebyshev interpolation on a hypercube.

// Chebyshev points of the first kind on [-1,1], barycentric weights
// w_i = (-1)^i sin((2i+1) pi / (2n)).
struct ChebInterpolant {
    Box box;
    int degree = 0;  // k; k+1 points per axis

    std::vector<double> axis_nodes;    // k+1 per-axis nodes in [-1,1]
    std::vector<double> axis_weights;  // barycentric weights

    ChebInterpolant(const Box& b, int k) : box(b), degree(k) {
        if (k < 0 || k > 63) throw std::invalid_argument("degree must be in [0, 63]");
        int n = k + 1;
        axis_nodes.resize(n);
        axis_weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double theta = (2.0 * i + 1.0) * M_PI / (2.0 * n);
            axis_nodes[i] = std::cos(theta);
            axis_weights[i] = (i % 2 ? -1.0 : 1.0) * std::sin(theta);
        }
    }

    int points_per_axis() const { return degree + 1; }
    int size() const {  // r = (k+1)^dim
        int r = 1;
        for (int a = 0; a < box.dim; ++a) r *= points_per_axis();
        return r;
    }

    // tensor node for lexicographic index (axis 0 fastest)
    Vec3 node(int index) const {
        Vec3 p = Vec3::Zero();
        int n = points_per_axis();
        for (int a = 0; a < box.dim; ++a) {
            int ia = index % n;
            index /= n;
            p[a] = box.center[a] + 0.5 * box.side * axis_nodes[ia];
        }
        return p;
    }

    // all Lagrange basis values at y, lexicographic order matching node()
    void basis(const Vec3& y, std::vector<double>& out) const {
        int n = points_per_axis();
        double per_axis[3][64];
        for (int a = 0; a < box.dim; ++a) {
            double t = box.side > 0.0 ? 2.0 * (y[a] - box.center[a]) / box.side : 0.0;
            int exact = -1;
            double denom = 0.0;
            for (int i = 0; i < n; ++i) {
                double d = t - axis_nodes[i];
                if (d == 0.0) {
                    exact = i;
                    break;
                }
                denom += axis_weights[i] / d;
            }
            for (int i = 0; i < n; ++i) {
                if (exact >= 0)
                    per_axis[a][i] = i == exact ? 1.0 : 0.0;
                else
                    per_axis[a][i] = axis_weights[i] / (t - axis_nodes[i]) / denom;
            }
        }
        out.resize(size());
        for (int idx = 0; idx < size(); ++idx) {
            int rest = idx;
            double prod = 1.0;
            for (int a = 0; a < box.dim; ++a) {
                prod *= per_axis[a][rest % n];
                rest /= n;
            }
            out[idx] = prod;
        }
    }
};

// Max interpolation error of y -> G(x,y) over box_Y, sampled on a 20^dim grid
// of y and the provided x set.
inline double degenerate_kernel_error(int dim, const Box& box_y, const std::vector<Vec3>& xs,
                                      int k) {
    ChebInterpolant interp(box_y, k);
    const int r = interp.size();
    std::vector<Vec3> ys;
    const int g = 20;
    if (dim == 2) {
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i) {
                Vec3 y = box_y.center;
                y[0] += box_y.side * (double(i) / (g - 1) - 0.5);
                y[1] += box_y.side * (double(j) / (g - 1) - 0.5);
                ys.push_back(y);
            }
    } else {
        for (int l = 0; l < g; ++l)
            for (int j = 0; j < g; ++j)
                for (int i = 0; i < g; ++i) {
                    Vec3 y = box_y.center;
                    y[0] += box_y.side * (double(i) / (g - 1) - 0.5);
                    y[1] += box_y.side * (double(j) / (g - 1) - 0.5);
                    y[2] += box_y.side * (double(l) / (g - 1) - 0.5);
                    ys.push_back(y);
                }
    }
    std::vector<double> basis;
    std::vector<double> at_nodes(r);
    double worst = 0.0;
    for (const Vec3& x : xs) {
        for (int i = 0; i < r; ++i) at_nodes[i] = kernel_eval(dim, x, interp.node(i));
        for (const Vec3& y : ys) {
            interp.basis(y, basis);
            double approx = 0.0;
            for (int i = 0; i < r; ++i) approx += at_nodes[i] * basis[i];
            worst = std::max(worst, std::abs(kernel_eval(dim, x, y) - approx));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Far-field block from the degenerate kernel: interpolation acts in the
// smaller cluster's hypercube (the Y role), the other cluster keeps exact
// kernel integrals.
//
//   X[j][i] = int_{T_j} G(x, xi_i) dx    (exact element potentials)
//   Y[l][i] = int_{T_l} L_i(y) dy        (Gauss of polynomial degree 3k+1)
//
// so block ~= X Y^T after transposing roles when the row cluster is smaller.

namespace detail {

inline double exact_kernel_moment(const BoundaryMesh& mesh, int elem, const Vec3& point) {
    if (mesh.dim == 2)
        return -log_segment_integral(point, mesh.corner(elem, 0), mesh.corner(elem, 1)) /
               (2.0 * M_PI);
    return triangle_inverse_distance_integral(point, mesh.corner(elem, 0), mesh.corner(elem, 1),
                                              mesh.corner(elem, 2)) /
           (4.0 * M_PI);
}

inline Eigen::RowVectorXd basis_moments(const BoundaryMesh& mesh, int elem,
                                        const ChebInterpolant& interp) {
    std::vector<double> basis;
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(interp.size());
    if (mesh.dim == 2) {
        const Rule1d& rule = gauss_legendre(interp.degree + 2);
        const Vec3 &a = mesh.corner(elem, 0), &b = mesh.corner(elem, 1);
        double len = mesh.measures[elem];
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
            interp.basis(Vec3(a + rule.nodes[q] * (b - a)), basis);
            for (int i = 0; i < interp.size(); ++i) out[i] += rule.weights[q] * len * basis[i];
        }
    } else {
        const RuleTri& rule = triangle_rule_tensor_cached((3 * interp.degree) / 2 + 2);
        const Vec3 &v0 = mesh.corner(elem, 0), &v1 = mesh.corner(elem, 1),
                   &v2 = mesh.corner(elem, 2);
        Vec3 e1 = v1 - v0, e2 = v2 - v0;
        double jac = e1.cross(e2).norm();
        for (int q = 0; q < rule.size(); ++q) {
            interp.basis(Vec3(v0 + rule.x[q] * e1 + rule.y[q] * e2), basis);
            for (int i = 0; i < interp.size(); ++i) out[i] += rule.w[q] * jac * basis[i];
        }
    }
    return out;
}

}  // namespace detail

inline LowRankFactor far_block_from_kernel(const BoundaryMesh& mesh, const ClusterTree& tree,
                                           int tau, int sigma, int k) {
    const ClusterNode &nt = tree.node(tau), &ns = tree.node(sigma);
    const bool interp_in_sigma = ns.box.diam() <= nt.box.diam();
    const ClusterNode& moment_side = interp_in_sigma ? nt : ns;  // exact kernel integrals
    const ClusterNode& interp_side = interp_in_sigma ? ns : nt;
    ChebInterpolant interp(interp_side.box, k);
    const int r = interp.size();

    DenseMatrix moments(moment_side.size(), r);
    for (int pos = moment_side.begin; pos < moment_side.end; ++pos)
        for (int i = 0; i < r; ++i)
            moments(pos - moment_side.begin, i) =
                detail::exact_kernel_moment(mesh, tree.perm[pos], interp.node(i));

    DenseMatrix weights(interp_side.size(), r);
    for (int pos = interp_side.begin; pos < interp_side.end; ++pos)
        weights.row(pos - interp_side.begin) = detail::basis_moments(mesh, tree.perm[pos], interp);

    LowRankFactor f;
    f.X = interp_in_sigma ? moments : weights;
    f.Y = interp_in_sigma ? weights : moments;
    f.error_known = false;  // no sigma_{r+1} available from interpolation
    return f;
}

}  // namespace hmx
