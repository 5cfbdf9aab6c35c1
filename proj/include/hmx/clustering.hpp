// Geometric cluster trees over mesh elements and eta-admissible block
// partitions of the index set.
#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "hmx/geometry.hpp"
#include "hmx/mesh.hpp"

namespace hmx {

struct ClusterNode {
    int begin = 0, end = 0;  // contiguous range of positions in the permutation
    int left = -1, right = -1;
    int parent = -1;
    int level = 0;
    Aabb bounds;  // minimal box around the element closures
    Box box;      // cubified hypercube used for admissibility

    int size() const { return end - begin; }
    bool is_leaf() const { return left < 0; }
};

struct ClusterTree {
    int dim = 2;
    int n_leaf = 25;
    int n = 0;
    int depth = 0;                  // deepest level, root = 0
    std::vector<int> perm;          // perm[pos] = original index
    std::vector<int> inv_perm;      // inv_perm[original index] = pos
    std::vector<ClusterNode> nodes; // nodes[0] is the root

    int root() const { return 0; }
    const ClusterNode& node(int id) const { return nodes[id]; }
};

// Geometry per index: a representative point (the centroid) that decides the
// side of a split, and the closure box absorbed into cluster bounds.
struct IndexGeometry {
    int dim = 2;
    std::vector<Vec3> centroids;
    std::vector<Aabb> closures;
};

inline IndexGeometry index_geometry(const BoundaryMesh& mesh) {
    IndexGeometry g;
    g.dim = mesh.dim;
    g.centroids = mesh.centroids;
    g.closures.reserve(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) g.closures.push_back(mesh.element_bounds(e));
    return g;
}

namespace detail {

struct TreeBuilder {
    const IndexGeometry& geo;
    int n_leaf;
    ClusterTree tree;

    explicit TreeBuilder(const IndexGeometry& g, int n_leaf_) : geo(g), n_leaf(n_leaf_) {
        tree.dim = g.dim;
        tree.n_leaf = n_leaf_;
        tree.n = int(g.centroids.size());
        tree.perm.resize(tree.n);
        std::iota(tree.perm.begin(), tree.perm.end(), 0);
    }

    Aabb range_bounds(int begin, int end) const {
        Aabb b = Aabb::empty(geo.dim);
        for (int pos = begin; pos < end; ++pos) b.absorb(geo.closures[tree.perm[pos]]);
        return b;
    }

    int build(int begin, int end, int level, int parent) {
        int id = int(tree.nodes.size());
        tree.nodes.push_back({});
        ClusterNode node;
        node.begin = begin;
        node.end = end;
        node.parent = parent;
        node.level = level;
        node.bounds = range_bounds(begin, end);
        node.box = Box::cubify(node.bounds);
        tree.depth = std::max(tree.depth, level);
        if (end - begin > n_leaf) {
            int mid = split(begin, end, node.bounds);
            tree.nodes[id] = node;  // children are appended after the parent
            int left = build(begin, mid, level + 1, id);
            int right = build(mid, end, level + 1, id);
            tree.nodes[id].left = left;
            tree.nodes[id].right = right;
            return id;
        }
        tree.nodes[id] = node;
        return id;
    }

    // Midpoint split on the longest axis of the minimal box; axes with equal
    // extents are tried in increasing order.  An axis whose midpoint split
    // leaves one side empty is discarded in favour of the next-longest axis,
    // and a median split on the longest axis is the final fallback.
    int split(int begin, int end, const Aabb& bounds) {
        int axes[3] = {0, 1, 2};
        std::stable_sort(axes, axes + geo.dim,
                         [&](int a, int b) { return bounds.extent(a) > bounds.extent(b); });
        auto begin_it = tree.perm.begin() + begin, end_it = tree.perm.begin() + end;
        for (int t = 0; t < geo.dim; ++t) {
            int axis = axes[t];
            double mid = 0.5 * (bounds.lo[axis] + bounds.hi[axis]);
            auto it = std::stable_partition(begin_it, end_it, [&](int original) {
                return geo.centroids[original][axis] <= mid;
            });
            int cut = int(it - tree.perm.begin());
            if (cut > begin && cut < end) return cut;
        }
        int axis = axes[0];
        std::stable_sort(begin_it, end_it, [&](int a, int b) {
            double ca = geo.centroids[a][axis], cb = geo.centroids[b][axis];
            return ca != cb ? ca < cb : a < b;
        });
        return begin + (end - begin) / 2;
    }
};

}  // namespace detail

inline ClusterTree build_cluster_tree(const IndexGeometry& geometry, int n_leaf) {
    if (geometry.centroids.empty()) throw MeshError("cannot cluster an empty index set");
    if (n_leaf < 1) throw MeshError("n_leaf must be >= 1");
    detail::TreeBuilder builder(geometry, n_leaf);
    builder.build(0, builder.tree.n, 0, -1);
    builder.tree.inv_perm.resize(builder.tree.n);
    for (int pos = 0; pos < builder.tree.n; ++pos)
        builder.tree.inv_perm[builder.tree.perm[pos]] = pos;
    return builder.tree;
}

inline ClusterTree build_cluster_tree(const BoundaryMesh& mesh, int n_leaf) {
    return build_cluster_tree(index_geometry(mesh), n_leaf);
}

// ---------------------------------------------------------------------------

struct Block {
    int tau = -1, sigma = -1;  // node ids, tau = row cluster
    bool admissible = false;
};

struct BlockPartition {
    const ClusterTree* tree = nullptr;
    double eta = 2.0;
    std::vector<Block> blocks;
    int n_far = 0, n_near = 0;
};

// Far blocks are maximal admissible pairs; pairs of leaves that are still
// inadmissible become near blocks; otherwise only non-leaf sides are split.
inline BlockPartition build_block_partition(const ClusterTree& tree, double eta) {
    if (!(eta > 0.0)) throw MeshError("eta must be positive");
    BlockPartition part;
    part.tree = &tree;
    part.eta = eta;

    std::vector<std::pair<int, int>> stack{{tree.root(), tree.root()}};
    // depth-first with an explicit stack; children pushed in reverse so the
    // emitted block order matches the natural recursion
    while (!stack.empty()) {
        auto [t, s] = stack.back();
        stack.pop_back();
        const ClusterNode &nt = tree.node(t), &ns = tree.node(s);
        if (is_admissible(nt.box, ns.box, eta)) {
            part.blocks.push_back({t, s, true});
            ++part.n_far;
            continue;
        }
        if (nt.is_leaf() && ns.is_leaf()) {
            part.blocks.push_back({t, s, false});
            ++part.n_near;
            continue;
        }
        if (nt.is_leaf()) {
            stack.emplace_back(t, ns.right);
            stack.emplace_back(t, ns.left);
        } else if (ns.is_leaf()) {
            stack.emplace_back(nt.right, s);
            stack.emplace_back(nt.left, s);
        } else {
            stack.emplace_back(nt.right, ns.right);
            stack.emplace_back(nt.right, ns.left);
            stack.emplace_back(nt.left, ns.right);
            stack.emplace_back(nt.left, ns.left);
        }
    }
    return part;
}

// Maximum number of far partners any cluster has, in row or column role.
inline int sparsity_constant(const BlockPartition& part) {
    std::vector<int> row_count(part.tree->nodes.size(), 0);
    std::vector<int> col_count(part.tree->nodes.size(), 0);
    for (const Block& b : part.blocks)
        if (b.admissible) {
            ++row_count[b.tau];
            ++col_count[b.sigma];
        }
    int best = 0;
    for (size_t i = 0; i < row_count.size(); ++i)
        best = std::max({best, row_count[i], col_count[i]});
    return best;
}

}  // namespace hmx
