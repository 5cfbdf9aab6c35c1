// Schur complements in cluster (elimination) order, recursive and blockwise
// low-rank Cholesky factors, and their error measures.
//
// All matrices in this header live in CLUSTER ordering: row/column i is the
// element tree.perm[i].  Cluster ranges [begin, end) address them directly.
#pragma once

#include <vector>

#include "hmx/hmatrix.hpp"
#include "hmx/linalg.hpp"

namespace hmx {

inline DenseMatrix permute_to_cluster_order(const DenseMatrix& a, const ClusterTree& tree) {
    DenseMatrix out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out(i, j) = a(tree.perm[size_t(i)], tree.perm[size_t(j)]);
    return out;
}

// S(tau, sigma) = V|TxS - V|TxR (V|RxR)^-1 V|RxS with R the elimination
// prefix {i < min(begin_tau, begin_sigma)}.  Uses the leading principal
// Cholesky factor, so V's leading block must be positive definite.
inline DenseMatrix schur_complement(const DenseMatrix& v_ord, int tau_begin, int tau_end,
                                    int sigma_begin, int sigma_end) {
    const int rho = std::min(tau_begin, sigma_begin);
    DenseMatrix s = v_ord.block(tau_begin, sigma_begin, tau_end - tau_begin,
                                sigma_end - sigma_begin);
    if (rho == 0) return s;
    DenseMatrix c_rho = dense_cholesky(v_ord.topLeftCorner(rho, rho));
    // V|TxR (V|RxR)^-1 V|RxS = (C^-1 V|RxT)^T (C^-1 V|RxS)
    DenseMatrix left = v_ord.block(0, tau_begin, rho, tau_end - tau_begin);
    DenseMatrix right = v_ord.block(0, sigma_begin, rho, sigma_end - sigma_begin);
    c_rho.triangularView<Eigen::Lower>().solveInPlace(left);
    c_rho.triangularView<Eigen::Lower>().solveInPlace(right);
    s.noalias() -= left.transpose() * right;
    return s;
}

inline DenseMatrix schur_complement(const DenseMatrix& v_ord, const ClusterTree& tree, int tau,
                                    int sigma) {
    const ClusterNode &nt = tree.node(tau), &ns = tree.node(sigma);
    return schur_complement(v_ord, nt.begin, nt.end, ns.begin, ns.end);
}

inline Vector schur_rank_profile(const DenseMatrix& schur_block) {
    return singular_value_profile(schur_block);
}

// Cholesky factor computed by the cluster-tree recursion
//   C(tau) = [ C(tau1)                 0       ]
//            [ S(tau2,tau1) C(tau1)^-T C(tau2) ]
// with S the Schur complements above; identical to the dense factor up to
// roundoff.
inline DenseMatrix recursive_cholesky(const DenseMatrix& v_ord, const ClusterTree& tree) {
    DenseMatrix c = DenseMatrix::Zero(v_ord.rows(), v_ord.cols());
    struct Worker {
        const ClusterTree& tree;
        DenseMatrix& c;
        // factor the Schur complement s of node tau in place
        void run(int tau, DenseMatrix s) {
            const ClusterNode& node = tree.node(tau);
            if (node.is_leaf()) {
                DenseMatrix l = dense_cholesky(s);
                c.block(node.begin, node.begin, node.size(), node.size()) = l;
                return;
            }
            const ClusterNode &n1 = tree.node(node.left), &n2 = tree.node(node.right);
            const int m1 = n1.size(), m2 = n2.size();
            run(node.left, s.topLeftCorner(m1, m1));
            DenseMatrix c1 = c.block(n1.begin, n1.begin, m1, m1);
            DenseMatrix l21 = s.bottomLeftCorner(m2, m1);
            // L21 = S21 C1^-T
            c1.transpose().triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(l21);
            c.block(n2.begin, n1.begin, m2, m1) = l21;
            DenseMatrix s22 = s.bottomRightCorner(m2, m2);
            s22.noalias() -= l21 * l21.transpose();
            run(node.right, std::move(s22));
        }
    } worker{tree, c};
    worker.run(tree.root(), v_ord);
    return c;
}

// ---------------------------------------------------------------------------
// Blockwise rank-r Cholesky: compress the admissible sub-diagonal blocks of
// the exact factor, keep near blocks dense, zero above the diagonal.

inline HMatrix h_cholesky(const DenseMatrix& c_ord, const BlockPartition& partition, int r,
                          int threads = 1) {
    const ClusterTree& tree = *partition.tree;
    if (c_ord.rows() != tree.n || c_ord.cols() != tree.n)
        throw std::invalid_argument("factor size does not match the cluster tree");
    HMatrix h;
    h.partition = &partition;
    h.n = tree.n;
    h.blocks.resize(partition.blocks.size());
    detail::parallel_blocks(partition.blocks.size(), threads, [&](size_t b) {
        const Block& blk = partition.blocks[b];
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        const bool below = ns.end <= nt.begin;  // strictly left of the diagonal
        if (blk.admissible) {
            h.blocks[b].is_lowrank = true;
            if (below) {
                h.blocks[b].factor =
                    truncated_svd(c_ord.block(nt.begin, ns.begin, nt.size(), ns.size()), r);
            } else {  // upper triangle of the factor is zero
                h.blocks[b].factor.X = DenseMatrix::Zero(nt.size(), 0);
                h.blocks[b].factor.Y = DenseMatrix::Zero(ns.size(), 0);
                h.blocks[b].factor.truncation_error = 0.0;
                h.blocks[b].factor.error_known = true;
            }
        } else {
            if (blk.tau == blk.sigma) {
                h.blocks[b].dense = c_ord.block(nt.begin, ns.begin, nt.size(), ns.size())
                                        .triangularView<Eigen::Lower>();
            } else if (below) {
                h.blocks[b].dense = c_ord.block(nt.begin, ns.begin, nt.size(), ns.size());
            } else {
                h.blocks[b].dense = DenseMatrix::Zero(nt.size(), ns.size());
            }
        }
    });
    return h;
}

struct CholeskyErrors {
    double rel_factor_err = 0.0;   // ||C - C_h||_2 / ||C||_2
    double rel_product_err = 0.0;  // ||V - C_h C_h^T||_2 / ||V||_2
};

inline CholeskyErrors cholesky_errors(const DenseMatrix& v_ord, const DenseMatrix& c_ord,
                                      const HMatrix& c_h, uint64_t seed = 12345,
                                      double rel_tol = 1e-6, int max_iterations = 500) {
    // note: the h-matrix acts in original ordering; feed it cluster-ordered
    // vectors through the permutation identity perm(cluster i) = element
    const ClusterTree& tree = c_h.tree();
    auto to_original = [&](const Vector& x_ord) {
        Vector x(x_ord.size());
        for (Eigen::Index i = 0; i < x_ord.size(); ++i) x[tree.perm[size_t(i)]] = x_ord[i];
        return x;
    };
    auto to_cluster = [&](const Vector& x) {
        Vector x_ord(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) x_ord[i] = x[tree.perm[size_t(i)]];
        return x_ord;
    };
    auto apply_ch = [&](const Vector& x_ord) { return to_cluster(matvec(c_h, to_original(x_ord))); };
    auto apply_ch_t = [&](const Vector& x_ord) {
        return to_cluster(matvec_transpose(c_h, to_original(x_ord)));
    };

    CholeskyErrors errs;
    LinOp diff;
    diff.rows = diff.cols = v_ord.rows();
    diff.apply = [&](const Vector& x) { return Vector(c_ord * x - apply_ch(x)); };
    diff.apply_t = [&](const Vector& x) {
        return Vector(c_ord.transpose() * x - apply_ch_t(x));
    };
    double c_norm = spectral_norm(c_ord, seed, rel_tol, max_iterations);
    errs.rel_factor_err = spectral_norm(diff, seed, rel_tol, max_iterations).value / c_norm;

    LinOp prod;
    prod.rows = prod.cols = v_ord.rows();
    prod.apply = [&](const Vector& x) { return Vector(v_ord * x - apply_ch(apply_ch_t(x))); };
    prod.apply_t = prod.apply;  // both V and C_h C_h^T are symmetric
    double v_norm = spectral_norm(v_ord, seed, rel_tol, max_iterations);
    errs.rel_product_err = spectral_norm(prod, seed, rel_tol, max_iterations).value / v_norm;
    return errs;
}

// ||(C|tau x tau)^-1||_2 for every tree node; the diagonal blocks of the
// factor are the factors of the diagonal Schur complements, and the maximum
// over the tree is attained at the root.
inline std::vector<double> inverse_factor_norm_profile(const DenseMatrix& c_ord,
                                                       const ClusterTree& tree) {
    std::vector<double> norms(tree.nodes.size(), 0.0);
    for (size_t id = 0; id < tree.nodes.size(); ++id) {
        const ClusterNode& node = tree.nodes[id];
        DenseMatrix block = c_ord.block(node.begin, node.begin, node.size(), node.size());
        DenseMatrix inv = DenseMatrix::Identity(node.size(), node.size());
        block.triangularView<Eigen::Lower>().solveInPlace(inv);
        norms[id] = singular_value_profile(inv)[0];
    }
    return norms;
}

}  // namespace hmx
