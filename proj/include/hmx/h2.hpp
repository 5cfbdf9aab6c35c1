// Nested cluster bases and the H^2 format: one shared basis per cluster,
// transfer matrices between levels, small coupling matrices per far block.
#pragma once

#include <vector>

#include "hmx/hmatrix.hpp"

namespace hmx {

// Far-block column partners of tau itself and of all its ancestors; their
// union of column ranges (the "total cluster rows") is what the basis of tau
// must approximate.  Containment is monotone: a child sees a superset.
inline std::vector<int> total_cluster_rows(const BlockPartition& partition, int tau) {
    const ClusterTree& tree = *partition.tree;
    std::vector<std::vector<int>> partners(tree.nodes.size());
    for (const Block& b : partition.blocks)
        if (b.admissible) partners[b.tau].push_back(b.sigma);
    std::vector<int> result;
    for (int node = tau; node >= 0; node = tree.node(node).parent)
        result.insert(result.end(), partners[node].begin(), partners[node].end());
    return result;
}

struct ClusterBasis {
    const ClusterTree* tree = nullptr;
    int requested_rank = 0;
    std::vector<int> rank;                   // per node
    std::vector<DenseMatrix> leaf_basis;     // |tau| x rank, leaves only
    std::vector<DenseMatrix> transfer_left;  // rank(child) x rank, internal only
    std::vector<DenseMatrix> transfer_right;

    // Explicit |tau| x rank basis, assembled through the transfers.
    DenseMatrix expand(int tau) const {
        const ClusterNode& node = tree->node(tau);
        if (node.is_leaf()) return leaf_basis[tau];
        DenseMatrix up(node.size(), rank[tau]);
        DenseMatrix ul = expand(node.left) * transfer_left[tau];
        DenseMatrix ur = expand(node.right) * transfer_right[tau];
        up.topRows(ul.rows()) = ul;
        up.bottomRows(ur.rows()) = ur;
        return up;
    }
};

// Bottom-up construction from a dense matrix in cluster ordering: each
// cluster takes the leading left singular vectors of its total cluster rows,
// internal clusters work on the children's coefficients so the result is
// nested by construction.
inline ClusterBasis build_nested_basis(const DenseMatrix& a_ord, const ClusterTree& tree,
                                       const BlockPartition& partition, int r) {
    if (r < 1) throw std::invalid_argument("rank must be positive");
    ClusterBasis basis;
    basis.tree = &tree;
    basis.requested_rank = r;
    basis.rank.assign(tree.nodes.size(), 0);
    basis.leaf_basis.resize(tree.nodes.size());
    basis.transfer_left.resize(tree.nodes.size());
    basis.transfer_right.resize(tree.nodes.size());

    std::vector<std::vector<int>> partners(tree.nodes.size());
    for (const Block& b : partition.blocks)
        if (b.admissible) partners[b.tau].push_back(b.sigma);

    struct Builder {
        const DenseMatrix& a;
        const ClusterTree& tree;
        const std::vector<std::vector<int>>& partners;
        ClusterBasis& basis;
        int r;

        DenseMatrix gather_rows(int tau, const std::vector<int>& sigmas) const {
            const ClusterNode& node = tree.node(tau);
            int cols = 0;
            for (int s : sigmas) cols += tree.node(s).size();
            DenseMatrix rows(node.size(), cols);
            int off = 0;
            for (int s : sigmas) {
                const ClusterNode& ns = tree.node(s);
                rows.middleCols(off, ns.size()) =
                    a.block(node.begin, ns.begin, node.size(), ns.size());
                off += ns.size();
            }
            return rows;
        }

        std::vector<int> row_set(int tau) const {
            std::vector<int> set;
            for (int node = tau; node >= 0; node = tree.node(node).parent)
                set.insert(set.end(), partners[node].begin(), partners[node].end());
            return set;
        }

        void run(int tau) {
            const ClusterNode& node = tree.node(tau);
            if (!node.is_leaf()) {
                run(node.left);
                run(node.right);
            }
            std::vector<int> sigmas = row_set(tau);
            int m = 0;
            for (int s : sigmas) m += tree.node(s).size();
            if (node.is_leaf()) {
                if (m == 0) {
                    basis.leaf_basis[tau] = DenseMatrix::Zero(node.size(), 0);
                    return;
                }
                DenseMatrix rows = gather_rows(tau, sigmas);
                Eigen::BDCSVD<DenseMatrix> svd(rows, Eigen::ComputeThinU);
                int keep = std::min<int>(r, int(svd.singularValues().size()));
                basis.leaf_basis[tau] = svd.matrixU().leftCols(keep);
                basis.rank[tau] = keep;
                return;
            }
            int r1 = basis.rank[node.left], r2 = basis.rank[node.right];
            if (m == 0 || r1 + r2 == 0) {
                basis.transfer_left[tau] = DenseMatrix::Zero(r1, 0);
                basis.transfer_right[tau] = DenseMatrix::Zero(r2, 0);
                return;
            }
            DenseMatrix coeff(r1 + r2, m);
            coeff.topRows(r1) = basis.expand(node.left).transpose() * gather_rows(node.left, sigmas);
            coeff.bottomRows(r2) =
                basis.expand(node.right).transpose() * gather_rows(node.right, sigmas);
            Eigen::BDCSVD<DenseMatrix> svd(coeff, Eigen::ComputeThinU);
            int keep = std::min<int>(r, int(svd.singularValues().size()));
            basis.rank[tau] = keep;
            basis.transfer_left[tau] = svd.matrixU().topRows(r1).leftCols(keep);
            basis.transfer_right[tau] = svd.matrixU().bottomRows(r2).leftCols(keep);
        }
    } builder{a_ord, tree, partners, basis, r};
    builder.run(tree.root());
    return basis;
}

// ---------------------------------------------------------------------------

struct H2Matrix {
    const BlockPartition* partition = nullptr;
    const ClusterBasis* basis = nullptr;  // used for rows and columns
    int n = 0;
    std::vector<DenseMatrix> coupling;  // per far block, rank(tau) x rank(sigma)
    std::vector<DenseMatrix> near;      // per near block

    const ClusterTree& tree() const { return *partition->tree; }
};

// W_h2 restricted to a far block tau x sigma is U_tau S_b U_sigma^T with
// S_b = U_tau^T A|b U_sigma; near blocks stay dense.
inline H2Matrix h2_compress(const DenseMatrix& a_ord, const ClusterBasis& basis,
                            const BlockPartition& partition) {
    const ClusterTree& tree = *partition.tree;
    H2Matrix h2;
    h2.partition = &partition;
    h2.basis = &basis;
    h2.n = tree.n;
    h2.coupling.resize(partition.blocks.size());
    h2.near.resize(partition.blocks.size());
    for (size_t b = 0; b < partition.blocks.size(); ++b) {
        const Block& blk = partition.blocks[b];
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        DenseMatrix sub = a_ord.block(nt.begin, ns.begin, nt.size(), ns.size());
        if (blk.admissible)
            h2.coupling[b] = basis.expand(blk.tau).transpose() * sub * basis.expand(blk.sigma);
        else
            h2.near[b] = std::move(sub);
    }
    return h2;
}

struct H2MatvecStats {
    size_t upward_ops = 0;    // multiply-adds in the leaf/transfer sweep
    size_t coupling_ops = 0;  // multiply-adds applying the couplings
    size_t downward_ops = 0;
    size_t near_ops = 0;
    size_t total() const { return upward_ops + coupling_ops + downward_ops + near_ops; }
};

// y = W_h2 x in original ordering: upward pass (coefficients of x in each
// cluster basis), coupling pass, downward pass, plus the dense near part.
inline Vector h2_matvec(const H2Matrix& h2, const Vector& x, H2MatvecStats* stats = nullptr) {
    const ClusterTree& tree = h2.tree();
    const ClusterBasis& basis = *h2.basis;
    Vector xo(tree.n);
    for (int pos = 0; pos < tree.n; ++pos) xo[pos] = x[tree.perm[pos]];
    Vector yo = Vector::Zero(tree.n);
    H2MatvecStats local;

    std::vector<Vector> xhat(tree.nodes.size());
    std::vector<Vector> yhat(tree.nodes.size());
    for (size_t id = 0; id < tree.nodes.size(); ++id) {
        xhat[id] = Vector::Zero(basis.rank[id]);
        yhat[id] = Vector::Zero(basis.rank[id]);
    }

    // nodes are stored parent-before-children, so a reverse sweep is upward
    for (size_t id = tree.nodes.size(); id-- > 0;) {
        const ClusterNode& node = tree.nodes[id];
        if (basis.rank[id] == 0) continue;
        if (node.is_leaf()) {
            xhat[id].noalias() = basis.leaf_basis[id].transpose() * xo.segment(node.begin, node.size());
            local.upward_ops += size_t(basis.rank[id]) * size_t(node.size());
        } else {
            xhat[id].noalias() = basis.transfer_left[id].transpose() * xhat[node.left];
            xhat[id].noalias() += basis.transfer_right[id].transpose() * xhat[node.right];
            local.upward_ops += size_t(basis.rank[id]) *
                                size_t(basis.rank[node.left] + basis.rank[node.right]);
        }
    }

    for (size_t b = 0; b < h2.partition->blocks.size(); ++b) {
        const Block& blk = h2.partition->blocks[b];
        if (!blk.admissible) continue;
        if (basis.rank[blk.tau] == 0 || basis.rank[blk.sigma] == 0) continue;
        yhat[blk.tau].noalias() += h2.coupling[b] * xhat[blk.sigma];
        local.coupling_ops += size_t(basis.rank[blk.tau]) * size_t(basis.rank[blk.sigma]);
    }

    for (size_t id = 0; id < tree.nodes.size(); ++id) {
        const ClusterNode& node = tree.nodes[id];
        if (basis.rank[id] == 0) continue;
        if (node.is_leaf()) {
            yo.segment(node.begin, node.size()).noalias() += basis.leaf_basis[id] * yhat[id];
            local.downward_ops += size_t(basis.rank[id]) * size_t(node.size());
        } else {
            yhat[node.left].noalias() += basis.transfer_left[id] * yhat[id];
            yhat[node.right].noalias() += basis.transfer_right[id] * yhat[id];
            local.downward_ops += size_t(basis.rank[id]) *
                                  size_t(basis.rank[node.left] + basis.rank[node.right]);
        }
    }

    for (size_t b = 0; b < h2.partition->blocks.size(); ++b) {
        const Block& blk = h2.partition->blocks[b];
        if (blk.admissible) continue;
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        yo.segment(nt.begin, nt.size()).noalias() += h2.near[b] * xo.segment(ns.begin, ns.size());
        local.near_ops += size_t(nt.size()) * size_t(ns.size());
    }

    Vector y(tree.n);
    for (int pos = 0; pos < tree.n; ++pos) y[tree.perm[pos]] = yo[pos];
    if (stats) *stats = local;
    return y;
}

inline LinOp h2_op(const H2Matrix& h2) {
    // symmetric by construction when built from a symmetric matrix with one
    // shared basis: couplings satisfy S(tau,sigma) = S(sigma,tau)^T and the
    // partition is symmetric, so apply_t = apply.
    return LinOp{h2.n, h2.n, [&h2](const Vector& x) { return h2_matvec(h2, x); },
                 [&h2](const Vector& x) { return h2_matvec(h2, x); }};
}

struct H2StorageReport {
    size_t bytes_leaf_bases = 0;
    size_t bytes_transfers = 0;
    size_t bytes_couplings = 0;
    size_t bytes_near = 0;
    size_t bytes_total = 0;
    double compression_pct = 0.0;
};

inline H2StorageReport h2_storage_report(const H2Matrix& h2) {
    const ClusterTree& tree = h2.tree();
    const ClusterBasis& basis = *h2.basis;
    H2StorageReport rep;
    for (size_t id = 0; id < tree.nodes.size(); ++id) {
        const ClusterNode& node = tree.nodes[id];
        if (node.is_leaf())
            rep.bytes_leaf_bases += 8 * size_t(node.size()) * size_t(basis.rank[id]);
        else
            rep.bytes_transfers +=
                8 * size_t(basis.rank[id]) *
                size_t(basis.rank[node.left] + basis.rank[node.right]);
    }
    for (size_t b = 0; b < h2.partition->blocks.size(); ++b) {
        const Block& blk = h2.partition->blocks[b];
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        if (blk.admissible)
            rep.bytes_couplings += 8 * size_t(basis.rank[blk.tau]) * size_t(basis.rank[blk.sigma]);
        else
            rep.bytes_near += 8 * size_t(nt.size()) * size_t(ns.size());
    }
    rep.bytes_total =
        rep.bytes_leaf_bases + rep.bytes_transfers + rep.bytes_couplings + rep.bytes_near;
    rep.compression_pct =
        100.0 * double(rep.bytes_total) / (8.0 * double(tree.n) * double(tree.n));
    return rep;
}

}  // namespace hmx
