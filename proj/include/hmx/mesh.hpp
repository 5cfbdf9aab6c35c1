// Boundary meshes: polygonal curves in 2d, triangulated surfaces in 3d.
#pragma once

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmx/geometry.hpp"

namespace hmx {

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Element = segment (2d, third index unused = -1) or triangle (3d).
struct BoundaryMesh {
    int dim = 2;
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> elements;

    // derived quantities, filled by finalize()
    std::vector<double> measures;   // length / area
    std::vector<double> diameters;  // longest edge
    std::vector<Vec3> centroids;

    int n_vertices() const { return int(vertices.size()); }
    int n_elements() const { return int(elements.size()); }
    int verts_per_element() const { return dim == 2 ? 2 : 3; }

    const Vec3& corner(int elem, int local) const { return vertices[elements[elem][local]]; }

    void finalize() {
        const int ne = n_elements();
        measures.resize(ne);
        diameters.resize(ne);
        centroids.resize(ne);
        for (int e = 0; e < ne; ++e) {
            if (dim == 2) {
                const Vec3 &a = corner(e, 0), &b = corner(e, 1);
                measures[e] = (b - a).norm();
                diameters[e] = measures[e];
                centroids[e] = 0.5 * (a + b);
            } else {
                const Vec3 &a = corner(e, 0), &b = corner(e, 1), &c = corner(e, 2);
                measures[e] = 0.5 * (b - a).cross(c - a).norm();
                diameters[e] = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
                centroids[e] = (a + b + c) / 3.0;
            }
            if (!(measures[e] > 0.0)) throw MeshError("degenerate element " + std::to_string(e));
        }
    }

    Aabb element_bounds(int e) const {
        Aabb b = Aabb::empty(dim);
        for (int v = 0; v < verts_per_element(); ++v) b.absorb(corner(e, v));
        return b;
    }
};

// Every vertex of a closed curve has exactly two incident segments; every
// edge of a closed surface has exactly two incident triangles.
inline void validate_topology(const BoundaryMesh& mesh) {
    if (mesh.n_elements() == 0) throw MeshError("empty mesh");
    const int nv = mesh.n_vertices();
    for (int e = 0; e < mesh.n_elements(); ++e)
        for (int v = 0; v < mesh.verts_per_element(); ++v) {
            int idx = mesh.elements[e][v];
            if (idx < 0 || idx >= nv)
                throw MeshError("invalid element index in element " + std::to_string(e));
        }
    if (mesh.dim == 2) {
        std::vector<int> degree(nv, 0);
        for (const auto& el : mesh.elements) {
            if (el[0] == el[1]) throw MeshError("degenerate element (repeated vertex)");
            ++degree[el[0]];
            ++degree[el[1]];
        }
        for (int v = 0; v < nv; ++v)
            if (degree[v] != 2)
                throw MeshError("mesh not closed: vertex " + std::to_string(v) + " has degree " +
                                std::to_string(degree[v]));
    } else {
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& el : mesh.elements) {
            if (el[0] == el[1] || el[1] == el[2] || el[0] == el[2])
                throw MeshError("degenerate element (repeated vertex)");
            for (int i = 0; i < 3; ++i) {
                int a = el[i], b = el[(i + 1) % 3];
                ++edge_count[{std::min(a, b), std::max(a, b)}];
            }
        }
        for (const auto& [edge, count] : edge_count)
            if (count != 2)
                throw MeshError("mesh not closed: edge (" + std::to_string(edge.first) + "," +
                                std::to_string(edge.second) + ") has " + std::to_string(count) +
                                " incident triangles");
    }
}

// L-shaped hexagon scaled by `scale`, walked counter-clockwise starting at the
// origin.  Each of the two long edges carries 2*refinement segments and each
// short edge carries refinement, so N = 8 * refinement.
inline BoundaryMesh generate_lshape_boundary(int refinement, double scale = 0.5) {
    if (refinement < 1) throw MeshError("refinement must be >= 1");
    if (!(scale > 0.0)) throw MeshError("scale must be positive");
    const double corners[6][2] = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.5},
                                  {0.5, 0.5}, {0.5, 1.0}, {0.0, 1.0}};
    BoundaryMesh mesh;
    mesh.dim = 2;
    for (int edge = 0; edge < 6; ++edge) {
        Vec3 a(corners[edge][0] * scale, corners[edge][1] * scale, 0.0);
        Vec3 b(corners[(edge + 1) % 6][0] * scale, corners[(edge + 1) % 6][1] * scale, 0.0);
        int pieces = ((b - a).norm() > 0.75 * scale) ? 2 * refinement : refinement;
        for (int j = 0; j < pieces; ++j)
            mesh.vertices.push_back(a + (double(j) / pieces) * (b - a));
    }
    const int n = int(mesh.vertices.size());
    for (int v = 0; v < n; ++v) mesh.elements.push_back({v, (v + 1) % n, -1});
    validate_topology(mesh);
    mesh.finalize();
    return mesh;
}

// Surface of the cube [0,scale]^3 with an m x m grid per face, each cell split
// into two triangles.  Faces are emitted in the order x=0, x=max, y=0, y=max,
// z=0, z=max, cells in row-major (lexicographic) order; triangles are oriented
// with outward normals.  N = 12 m^2.
inline BoundaryMesh generate_cube_surface(int m, double scale = 1.0) {
    if (m < 1) throw MeshError("refinement must be >= 1");
    if (!(scale > 0.0)) throw MeshError("scale must be positive");
    BoundaryMesh mesh;
    mesh.dim = 3;
    const double h = scale / m;

    std::vector<int> grid_id((m + 1) * (m + 1) * (m + 1), -1);
    auto vertex_at = [&](int i, int j, int k) {
        int key = (i * (m + 1) + j) * (m + 1) + k;
        if (grid_id[key] < 0) {
            grid_id[key] = int(mesh.vertices.size());
            mesh.vertices.push_back(Vec3(i * h, j * h, k * h));
        }
        return grid_id[key];
    };

    // axis = face normal direction, fixed = 0 or m; (u,v) run over the two
    // remaining axes in increasing order.
    auto emit_face = [&](int axis, int fixed) {
        int ua = (axis + 1) % 3, va = (axis + 2) % 3;
        if (ua > va) std::swap(ua, va);
        Vec3 outward = Vec3::Zero();
        outward[axis] = fixed == 0 ? -1.0 : 1.0;
        auto at = [&](int u, int v) {
            int ijk[3];
            ijk[axis] = fixed;
            ijk[ua] = u;
            ijk[va] = v;
            return vertex_at(ijk[0], ijk[1], ijk[2]);
        };
        auto push_oriented = [&](int a, int b, int c) {
            const Vec3 &pa = mesh.vertices[a], &pb = mesh.vertices[b], &pc = mesh.vertices[c];
            if ((pb - pa).cross(pc - pa).dot(outward) > 0.0)
                mesh.elements.push_back({a, b, c});
            else
                mesh.elements.push_back({a, c, b});
        };
        for (int u = 0; u < m; ++u)
            for (int v = 0; v < m; ++v) {
                int p00 = at(u, v), p10 = at(u + 1, v), p01 = at(u, v + 1), p11 = at(u + 1, v + 1);
                push_oriented(p00, p10, p11);
                push_oriented(p00, p11, p01);
            }
    };

    for (int axis = 0; axis < 3; ++axis)
        for (int fixed : {0, m}) emit_face(axis, fixed);
    validate_topology(mesh);
    mesh.finalize();
    return mesh;
}

struct MeshStats {
    int n_elements = 0;
    double h_min = 0.0;
    double h_max = 0.0;
    double quasiuniformity = 0.0;  // max over adjacent pairs of diam ratio (2d)
    double gamma = 0.0;            // max diam / sqrt(area) (3d shape regularity)
};

inline MeshStats mesh_stats(const BoundaryMesh& mesh) {
    MeshStats s;
    s.n_elements = mesh.n_elements();
    s.h_min = std::numeric_limits<double>::infinity();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        s.h_min = std::min(s.h_min, mesh.diameters[e]);
        s.h_max = std::max(s.h_max, mesh.diameters[e]);
    }
    if (mesh.dim == 2) {
        std::vector<std::vector<int>> at_vertex(mesh.n_vertices());
        for (int e = 0; e < mesh.n_elements(); ++e) {
            at_vertex[mesh.elements[e][0]].push_back(e);
            at_vertex[mesh.elements[e][1]].push_back(e);
        }
        double worst = 1.0;
        for (const auto& elems : at_vertex)
            for (size_t i = 0; i < elems.size(); ++i)
                for (size_t j = i + 1; j < elems.size(); ++j) {
                    double a = mesh.diameters[elems[i]], b = mesh.diameters[elems[j]];
                    worst = std::max(worst, std::max(a / b, b / a));
                }
        s.quasiuniformity = worst;
        s.gamma = 0.0;
    } else {
        double worst = 0.0;
        for (int e = 0; e < mesh.n_elements(); ++e)
            worst = std::max(worst, mesh.diameters[e] / std::sqrt(mesh.measures[e]));
        s.gamma = worst;
        s.quasiuniformity = s.h_max / s.h_min;
    }
    return s;
}

// Text format: "dim N_vertices N_elements", vertex lines, element lines.
// '#' starts a comment; doubles are written with 17 significant digits.
inline void save_mesh(const BoundaryMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot open " + path + " for writing");
    char buf[96];
    out << mesh.dim << " " << mesh.n_vertices() << " " << mesh.n_elements() << "\n";
    for (const auto& v : mesh.vertices) {
        if (mesh.dim == 2)
            std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v[0], v[1]);
        else
            std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
        out << buf;
    }
    for (const auto& el : mesh.elements) {
        out << el[0] << " " << el[1];
        if (mesh.dim == 3) out << " " << el[2];
        out << "\n";
    }
    if (!out) throw MeshError("write failed for " + path);
}

inline BoundaryMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open " + path);
    int line_no = 0;
    auto next_data_line = [&](std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            bool blank = line.find_first_not_of(" \t\r\n") == std::string::npos;
            if (!blank) return true;
        }
        return false;
    };
    auto parse_fail = [&](const std::string& what) -> MeshError {
        return MeshError("parse error at line " + std::to_string(line_no) + ": " + what);
    };

    std::string line;
    if (!next_data_line(line)) throw parse_fail("missing header");
    BoundaryMesh mesh;
    int nv = 0, ne = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> mesh.dim >> nv >> ne)) throw parse_fail("bad header");
        if (mesh.dim != 2 && mesh.dim != 3) throw parse_fail("dim must be 2 or 3");
        if (nv < 0 || ne < 0) throw parse_fail("negative count");
    }
    for (int v = 0; v < nv; ++v) {
        if (!next_data_line(line)) throw parse_fail("missing vertex " + std::to_string(v));
        std::istringstream vs(line);
        Vec3 p = Vec3::Zero();
        for (int a = 0; a < mesh.dim; ++a)
            if (!(vs >> p[a])) throw parse_fail("bad vertex coordinates");
        mesh.vertices.push_back(p);
    }
    for (int e = 0; e < ne; ++e) {
        if (!next_data_line(line)) throw parse_fail("missing element " + std::to_string(e));
        std::istringstream es(line);
        std::array<int, 3> el{-1, -1, -1};
        for (int a = 0; a < mesh.verts_per_element(); ++a)
            if (!(es >> el[a])) throw parse_fail("bad element indices");
        mesh.elements.push_back(el);
    }
    validate_topology(mesh);
    mesh.finalize();
    return mesh;
}

}  // namespace hmx
