// Blockwise rank-r matrices over a block partition: compression of dense
// matrices by per-block truncated SVD, kernel-interpolation compression of
// the operator itself, matvec, storage and error reporting.
#pragma once

#include <optional>
#include <thread>
#include <vector>

#include "hmx/assembly.hpp"
#include "hmx/clustering.hpp"
#include "hmx/linalg.hpp"
#include "hmx/lowrank.hpp"

namespace hmx {

struct HBlock {
    bool is_lowrank = false;
    DenseMatrix dense;  // near blocks
    LowRankFactor factor;
};

// Payloads are aligned with partition->blocks; tree and partition must
// outlive the matrix.
struct HMatrix {
    const BlockPartition* partition = nullptr;
    int n = 0;
    std::vector<HBlock> blocks;

    const ClusterTree& tree() const { return *partition->tree; }

    Vector permute_forward(const Vector& x) const {
        const auto& perm = tree().perm;
        Vector out(x.size());
        for (Eigen::Index pos = 0; pos < x.size(); ++pos) out[pos] = x[perm[pos]];
        return out;
    }

    Vector permute_back(const Vector& x) const {
        const auto& perm = tree().perm;
        Vector out(x.size());
        for (Eigen::Index pos = 0; pos < x.size(); ++pos) out[perm[pos]] = x[pos];
        return out;
    }
};

namespace detail {

template <class Body>
void parallel_blocks(size_t count, int threads, Body&& body) {
    if (threads <= 1) {
        for (size_t b = 0; b < count; ++b) body(b);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (size_t b = size_t(t); b < count; b += size_t(threads)) body(b);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Compress a dense matrix given in original (mesh) ordering: far blocks are
// replaced by their best rank-r approximation, near blocks are copied.
inline HMatrix compress_dense(const DenseMatrix& a, const BlockPartition& partition, int r,
                              int threads = 1) {
    const ClusterTree& tree = *partition.tree;
    if (a.rows() != tree.n || a.cols() != tree.n)
        throw std::invalid_argument("matrix size does not match the cluster tree");
    HMatrix h;
    h.partition = &partition;
    h.n = tree.n;
    h.blocks.resize(partition.blocks.size());
    detail::parallel_blocks(partition.blocks.size(), threads, [&](size_t b) {
        const Block& blk = partition.blocks[b];
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        DenseMatrix sub(nt.size(), ns.size());
        for (int i = 0; i < nt.size(); ++i)
            for (int j = 0; j < ns.size(); ++j)
                sub(i, j) = a(tree.perm[nt.begin + i], tree.perm[ns.begin + j]);
        if (blk.admissible) {
            h.blocks[b].is_lowrank = true;
            h.blocks[b].factor = truncated_svd(sub, r);
        } else {
            h.blocks[b].dense = std::move(sub);
        }
    });
    return h;
}

// Compress the operator directly: near blocks are assembled exactly, far
// blocks come from degree-k kernel interpolation (rank (k+1)^dim).
inline HMatrix compress_forward(const BoundaryMesh& mesh, const BlockPartition& partition, int k,
                                int threads = 1) {
    const ClusterTree& tree = *partition.tree;
    HMatrix h;
    h.partition = &partition;
    h.n = tree.n;
    h.blocks.resize(partition.blocks.size());
    detail::parallel_blocks(partition.blocks.size(), threads, [&](size_t b) {
        const Block& blk = partition.blocks[b];
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        if (blk.admissible) {
            h.blocks[b].is_lowrank = true;
            h.blocks[b].factor = far_block_from_kernel(mesh, tree, blk.tau, blk.sigma, k);
        } else {
            DenseMatrix sub(nt.size(), ns.size());
            for (int i = 0; i < nt.size(); ++i)
                for (int j = 0; j < ns.size(); ++j)
                    sub(i, j) = galerkin_entry(mesh, tree.perm[nt.begin + i],
                                               tree.perm[ns.begin + j]);
            h.blocks[b].dense = std::move(sub);
        }
    });
    return h;
}

// y = H x in the original ordering; blocks are applied in partition order so
// the result is independent of the thread count (and bitwise reproducible).
inline Vector matvec(const HMatrix& h, const Vector& x) {
    const ClusterTree& tree = h.tree();
    Vector xo = h.permute_forward(x);
    Vector yo = Vector::Zero(h.n);
    for (size_t b = 0; b < h.blocks.size(); ++b) {
        const Block& blk = h.partition->blocks[b];
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        auto xs = xo.segment(ns.begin, ns.size());
        auto ys = yo.segment(nt.begin, nt.size());
        if (h.blocks[b].is_lowrank) {
            const LowRankFactor& f = h.blocks[b].factor;
            ys.noalias() += f.X * (f.Y.transpose() * xs);
        } else {
            ys.noalias() += h.blocks[b].dense * xs;
        }
    }
    return h.permute_back(yo);
}

inline Vector matvec_transpose(const HMatrix& h, const Vector& x) {
    const ClusterTree& tree = h.tree();
    Vector xo = h.permute_forward(x);
    Vector yo = Vector::Zero(h.n);
    for (size_t b = 0; b < h.blocks.size(); ++b) {
        const Block& blk = h.partition->blocks[b];
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        auto xs = xo.segment(nt.begin, nt.size());
        auto ys = yo.segment(ns.begin, ns.size());
        if (h.blocks[b].is_lowrank) {
            const LowRankFactor& f = h.blocks[b].factor;
            ys.noalias() += f.Y * (f.X.transpose() * xs);
        } else {
            ys.noalias() += h.blocks[b].dense.transpose() * xs;
        }
    }
    return h.permute_back(yo);
}

inline LinOp hmatrix_op(const HMatrix& h) {
    return LinOp{h.n, h.n, [&h](const Vector& x) { return matvec(h, x); },
                 [&h](const Vector& x) { return matvec_transpose(h, x); }};
}

// Dense reconstruction in the original ordering (small problems only).
inline DenseMatrix to_dense(const HMatrix& h) {
    const ClusterTree& tree = h.tree();
    DenseMatrix a = DenseMatrix::Zero(h.n, h.n);
    for (size_t b = 0; b < h.blocks.size(); ++b) {
        const Block& blk = h.partition->blocks[b];
        const ClusterNode &nt = tree.node(blk.tau), &ns = tree.node(blk.sigma);
        DenseMatrix sub =
            h.blocks[b].is_lowrank ? h.blocks[b].factor.to_dense() : h.blocks[b].dense;
        for (int i = 0; i < nt.size(); ++i)
            for (int j = 0; j < ns.size(); ++j)
                a(tree.perm[nt.begin + i], tree.perm[ns.begin + j]) = sub(i, j);
    }
    return a;
}

// ---------------------------------------------------------------------------

struct StorageReport {
    size_t bytes_near = 0;
    size_t bytes_far = 0;
    size_t bytes_total = 0;
    size_t bytes_dense = 0;     // 8 N^2 baseline
    double compression_pct = 0.0;
    double megabytes() const { return double(bytes_total) / (1024.0 * 1024.0); }
};

// 8 bytes per stored real: near blocks keep |tau||sigma| entries, far blocks
// keep r (|tau| + |sigma|).
inline StorageReport storage_report(const HMatrix& h) {
    const ClusterTree& tree = h.tree();
    StorageReport rep;
    for (size_t b = 0; b < h.blocks.size(); ++b) {
        const Block& blk = h.partition->blocks[b];
        size_t rows = size_t(tree.node(blk.tau).size());
        size_t cols = size_t(tree.node(blk.sigma).size());
        if (h.blocks[b].is_lowrank)
            rep.bytes_far += 8 * size_t(h.blocks[b].factor.rank()) * (rows + cols);
        else
            rep.bytes_near += 8 * rows * cols;
    }
    rep.bytes_total = rep.bytes_near + rep.bytes_far;
    rep.bytes_dense = 8 * size_t(h.n) * size_t(h.n);
    rep.compression_pct = 100.0 * double(rep.bytes_total) / double(rep.bytes_dense);
    return rep;
}

// Same formula from the partition alone (rank fixed per far block), so large
// instances can be sized without assembling anything.
inline StorageReport storage_report(const BlockPartition& partition, int r) {
    const ClusterTree& tree = *partition.tree;
    StorageReport rep;
    for (const Block& blk : partition.blocks) {
        size_t rows = size_t(tree.node(blk.tau).size());
        size_t cols = size_t(tree.node(blk.sigma).size());
        if (blk.admissible)
            rep.bytes_far += 8 * size_t(r) * (rows + cols);
        else
            rep.bytes_near += 8 * rows * cols;
    }
    rep.bytes_total = rep.bytes_near + rep.bytes_far;
    rep.bytes_dense = 8 * size_t(tree.n) * size_t(tree.n);
    rep.compression_pct = 100.0 * double(rep.bytes_total) / double(rep.bytes_dense);
    return rep;
}

// || I - V * W_h ||_2, matrix-free.
inline SpectralNormResult inverse_error(const DenseMatrix& v, const HMatrix& w,
                                        uint64_t seed = 12345, double rel_tol = 1e-6,
                                        int max_iterations = 500) {
    LinOp op;
    op.rows = v.rows();
    op.cols = v.cols();
    op.apply = [&](const Vector& x) { return Vector(x - v * matvec(w, x)); };
    op.apply_t = [&](const Vector& x) {
        return Vector(x - matvec_transpose(w, Vector(v.transpose() * x)));
    };
    return spectral_norm(op, seed, rel_tol, max_iterations);
}

// Level-aggregated bound on the global spectral error of a blockwise
// approximation: C_sp * sum over levels of the worst block error at that
// level.  Requires per-block errors (sigma_{r+1}) to be known.
inline double aggregate_error_bound(const HMatrix& h) {
    const ClusterTree& tree = h.tree();
    std::vector<double> level_max(size_t(tree.depth) + 1, 0.0);
    for (size_t b = 0; b < h.blocks.size(); ++b) {
        if (!h.blocks[b].is_lowrank) continue;
        const LowRankFactor& f = h.blocks[b].factor;
        if (!f.error_known)
            throw std::invalid_argument("aggregate_error_bound needs SVD truncation errors");
        int level = tree.node(h.partition->blocks[b].tau).level;
        level_max[level] = std::max(level_max[level], f.truncation_error);
    }
    double sum = 0.0;
    for (double m : level_max) sum += m;
    return sparsity_constant(*h.partition) * sum;
}

}  // namespace hmx
