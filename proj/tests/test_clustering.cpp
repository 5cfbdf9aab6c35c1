#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "hmx/clustering.hpp"
#include "hmx/mesh.hpp"

using namespace hmx;

namespace {

// 100 equispaced points on a segment: the tree and partition are small
// enough to enumerate by hand.
IndexGeometry line_points(int n = 100, double h = 0.1) {
    IndexGeometry g;
    g.dim = 2;
    for (int i = 0; i < n; ++i) {
        Vec3 p(i * h, 0.0, 0.0);
        g.centroids.push_back(p);
        Aabb box = Aabb::empty(2);
        box.absorb(p);
        g.closures.push_back(box);
    }
    return g;
}

void check_tree_invariants(const ClusterTree& tree, int n_leaf) {
    REQUIRE(tree.node(tree.root()).begin == 0);
    REQUIRE(tree.node(tree.root()).end == tree.n);
    std::vector<int> seen(size_t(tree.n), 0);
    for (const ClusterNode& node : tree.nodes) {
        REQUIRE(node.begin < node.end);
        if (node.is_leaf()) {
            REQUIRE(node.size() <= n_leaf);
            for (int i = node.begin; i < node.end; ++i) ++seen[size_t(i)];
        } else {
            const ClusterNode &l = tree.node(node.left), &r = tree.node(node.right);
            REQUIRE(l.begin == node.begin);
            REQUIRE(l.end == r.begin);
            REQUIRE(r.end == node.end);
            REQUIRE(l.level == node.level + 1);
        }
    }
    for (int c : seen) REQUIRE(c == 1);  // leaves tile the index range
    // perm and inv_perm are inverse permutations
    for (int i = 0; i < tree.n; ++i) REQUIRE(tree.inv_perm[size_t(tree.perm[size_t(i)])] == i);
}

}  // namespace

TEST_CASE("box admissibility: hand cases") {
    Box bt, bs;
    bt.dim = bs.dim = 2;
    bt.center = Vec3(0, 0, 0);
    bt.side = 1.0;
    bs.center = Vec3(3, 0, 0);
    bs.side = 1.0;
    REQUIRE(box_distance(bt, bs) == Catch::Approx(2.0).epsilon(1e-15));
    REQUIRE(bt.diam() == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
    REQUIRE(is_admissible(bt, bs, 2.0));         // sqrt(2) <= 2 * 2
    REQUIRE_FALSE(is_admissible(bt, bs, 0.5));   // sqrt(2) >  0.5 * 2
    bs.center = Vec3(1, 1, 0);                   // touching corners: distance 0
    REQUIRE(box_distance(bt, bs) == 0.0);
    REQUIRE_FALSE(is_admissible(bt, bs, 100.0));
}

TEST_CASE("cluster tree on the hand line: shape and ordering") {
    IndexGeometry g = line_points();
    ClusterTree tree = build_cluster_tree(g, 25);
    REQUIRE(tree.n == 100);
    REQUIRE(tree.depth == 2);
    REQUIRE(tree.nodes.size() == 7);
    check_tree_invariants(tree, 25);
    // geometric bisection of equispaced points keeps the natural order
    for (int i = 0; i < 100; ++i) REQUIRE(tree.perm[size_t(i)] == i);
    // four leaves of 25 at level 2
    int leaves = 0;
    for (const ClusterNode& node : tree.nodes)
        if (node.is_leaf()) {
            ++leaves;
            REQUIRE(node.size() == 25);
            REQUIRE(node.level == 2);
        }
    REQUIRE(leaves == 4);
}

TEST_CASE("block partition on the hand line: far/near enumeration") {
    IndexGeometry g = line_points();
    ClusterTree tree = build_cluster_tree(g, 25);
    BlockPartition part = build_block_partition(tree, 2.0);
    REQUIRE(part.n_far == 6);
    REQUIRE(part.n_near == 10);
    REQUIRE(sparsity_constant(part) == 2);

    // far pairs by leading index ranges: exactly the hand enumeration
    std::set<std::pair<int, int>> far;
    for (const Block& b : part.blocks)
        if (b.admissible)
            far.insert({tree.node(b.tau).begin, tree.node(b.sigma).begin});
    std::set<std::pair<int, int>> expect = {{0, 50}, {0, 75}, {25, 75},
                                            {50, 0}, {75, 0}, {75, 25}};
    REQUIRE(far == expect);
}

TEST_CASE("partition tiles the index square exactly") {
    BoundaryMesh mesh = generate_lshape_boundary(16, 0.5);  // N = 128
    ClusterTree tree = build_cluster_tree(mesh, 25);
    BlockPartition part = build_block_partition(tree, 2.0);
    std::vector<int> mask(size_t(tree.n) * size_t(tree.n), 0);
    for (const Block& b : part.blocks) {
        const ClusterNode &nt = tree.node(b.tau), &ns = tree.node(b.sigma);
        for (int i = nt.begin; i < nt.end; ++i)
            for (int j = ns.begin; j < ns.end; ++j) ++mask[size_t(i) * size_t(tree.n) + size_t(j)];
    }
    for (int c : mask) REQUIRE(c == 1);
}

TEST_CASE("far blocks satisfy the admissibility they were selected by") {
    BoundaryMesh mesh = generate_lshape_boundary(32, 0.5);  // N = 256
    ClusterTree tree = build_cluster_tree(mesh, 25);
    const double eta = 2.0;
    BlockPartition part = build_block_partition(tree, eta);
    for (const Block& b : part.blocks) {
        const ClusterNode &nt = tree.node(b.tau), &ns = tree.node(b.sigma);
        if (b.admissible) {
            REQUIRE(is_admissible(nt.box, ns.box, eta));
        } else {
            REQUIRE((nt.is_leaf() && ns.is_leaf()));
            REQUIRE_FALSE(is_admissible(nt.box, ns.box, eta));
        }
    }
}

TEST_CASE("tree boxes contain their cluster closures") {
    BoundaryMesh mesh = generate_cube_surface(3, 1.0);  // N = 108
    IndexGeometry g = index_geometry(mesh);
    ClusterTree tree = build_cluster_tree(g, 10);
    check_tree_invariants(tree, 10);
    for (const ClusterNode& node : tree.nodes)
        for (int pos = node.begin; pos < node.end; ++pos) {
            const Vec3& c = g.centroids[size_t(tree.perm[size_t(pos)])];
            for (int a = 0; a < 3; ++a) {
                REQUIRE(c[a] >= node.bounds.lo[a] - 1e-14);
                REQUIRE(c[a] <= node.bounds.hi[a] + 1e-14);
                REQUIRE(c[a] >= node.box.center[a] - node.box.side / 2 - 1e-14);
                REQUIRE(c[a] <= node.box.center[a] + node.box.side / 2 + 1e-14);
            }
        }
}

TEST_CASE("duplicate points fall back to a median split") {
    IndexGeometry g;
    g.dim = 2;
    for (int i = 0; i < 64; ++i) {
        Vec3 p(1.0, 2.0, 0.0);  // all identical
        g.centroids.push_back(p);
        Aabb box = Aabb::empty(2);
        box.absorb(p);
        g.closures.push_back(box);
    }
    ClusterTree tree = build_cluster_tree(g, 16);
    check_tree_invariants(tree, 16);
}
