// Command-line driver: each library module exposed as a subcommand emitting
// plot-ready CSV (comma separated, header row, 17-significant-digit floats).
// Output is bit-identical across runs with the same seed unless --timing is
// given (wall_seconds columns are zero by default for that reason).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hmx/hmx.hpp"

namespace {

using namespace hmx;
using Clock = std::chrono::steady_clock;

struct Options {
    std::string geometry = "lshape";
    int refinement = 64;
    double scale = -1.0;  // <= 0: geometry default (lshape 0.5, cube 1.0)
    std::string mesh_path;
    double eta = 2.0;
    int n_leaf = 25;
    std::string ranks = "2..9";
    std::uint64_t seed = 12345;
    std::string out;  // empty: stdout
    int threads = 1;
    int max_dense_n = 4096;
    bool timing = false;
};

void add_common_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--geometry", o.geometry, "boundary geometry: lshape, cube, or file")
        ->check(CLI::IsMember({"lshape", "cube", "file"}));
    cmd->add_option("--refinement", o.refinement,
                    "mesh refinement (lshape: N = 8*refinement; cube: m with N = 12 m^2)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--scale", o.scale, "geometry scale (default 0.5 for lshape, 1.0 for cube)");
    cmd->add_option("--mesh", o.mesh_path, "mesh file to load when --geometry file");
    cmd->add_option("--eta", o.eta, "admissibility parameter")->check(CLI::PositiveNumber);
    cmd->add_option("--n-leaf", o.n_leaf, "cluster tree leaf size")->check(CLI::PositiveNumber);
    cmd->add_option("--ranks", o.ranks, "block ranks, e.g. 2..9 or 2,3,5,7,9");
    cmd->add_option("--seed", o.seed, "seed for power-iteration start vectors");
    cmd->add_option("--out", o.out, "CSV output path (default: stdout)");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--max-dense-n", o.max_dense_n, "cap for the dense reference pipeline");
    cmd->add_flag("--timing", o.timing,
                  "measure wall_seconds columns (default off: zeros, reproducible bytes)");
}

double effective_scale(const Options& o) {
    if (o.scale > 0.0) return o.scale;
    return o.geometry == "cube" ? 1.0 : 0.5;
}

BoundaryMesh make_mesh(const Options& o) {
    if (o.geometry == "lshape") return generate_lshape_boundary(o.refinement, effective_scale(o));
    if (o.geometry == "cube") return generate_cube_surface(o.refinement, effective_scale(o));
    if (o.mesh_path.empty()) throw std::runtime_error("--geometry file requires --mesh <path>");
    return load_mesh(o.mesh_path);
}

std::vector<int> parse_rank_list(const std::string& spec) {
    std::vector<int> out;
    auto parse_int = [](const std::string& s) {
        size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::runtime_error("bad rank list entry '" + s + "'");
        return v;
    };
    size_t dots = spec.find("..");
    if (dots != std::string::npos) {
        int lo = parse_int(spec.substr(0, dots));
        int hi = parse_int(spec.substr(dots + 2));
        if (lo > hi) throw std::runtime_error("empty rank range '" + spec + "'");
        for (int r = lo; r <= hi; ++r) out.push_back(r);
        return out;
    }
    size_t start = 0;
    while (start <= spec.size()) {
        size_t comma = spec.find(',', start);
        size_t end = comma == std::string::npos ? spec.size() : comma;
        out.push_back(parse_int(spec.substr(start, end - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw std::runtime_error("empty rank list");
    for (int r : out)
        if (r < 0) throw std::runtime_error("ranks must be non-negative");
    return out;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double cov = 0.0, var = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cov += (xs[i] - mx) * (ys[i] - my);
        var += (xs[i] - mx) * (xs[i] - mx);
    }
    return cov / var;
}

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void emit(const CsvTable& table, const std::string& out) {
    if (out.empty())
        std::fputs(table.to_string().c_str(), stdout);
    else
        table.write(out);
}

void require_dense_feasible(int n, const Options& o) {
    if (n > o.max_dense_n)
        throw std::runtime_error("dense reference pipeline refused: N=" + std::to_string(n) +
                                 " exceeds --max-dense-n=" + std::to_string(o.max_dense_n));
}

DenseMatrix invert_spd(const DenseMatrix& v, const Options& o) {
    try {
        return dense_inverse(v);
    } catch (const NotSpdError& e) {
        if (o.geometry != "cube")
            throw std::runtime_error(std::string(e.what()) +
                                     " (2D single-layer matrices are positive definite only for "
                                     "domain diameter < 1; pass --scale 0.5 or smaller)");
        throw;
    }
}

int run_mesh(const Options& o, const std::string& save_path) {
    BoundaryMesh mesh = make_mesh(o);
    if (!save_path.empty()) save_mesh(mesh, save_path);
    MeshStats stats = mesh_stats(mesh);
    CsvTable table({"N", "h_min", "h_max", "quasiuniformity", "gamma"});
    table.add_row({static_cast<long long>(stats.n_elements), stats.h_min, stats.h_max,
                   stats.quasiuniformity, stats.gamma});
    emit(table, o.out);
    return 0;
}

int run_cluster(const Options& o) {
    BoundaryMesh mesh = make_mesh(o);
    ClusterTree tree = build_cluster_tree(mesh, o.n_leaf);
    BlockPartition partition = build_block_partition(tree, o.eta);
    CsvTable table({"N", "n_leaf", "eta", "depth", "C_sp", "n_far", "n_near"});
    table.add_row({static_cast<long long>(tree.n), static_cast<long long>(o.n_leaf), o.eta,
                   static_cast<long long>(tree.depth),
                   static_cast<long long>(sparsity_constant(partition)),
                   static_cast<long long>(partition.n_far),
                   static_cast<long long>(partition.n_near)});
    emit(table, o.out);
    return 0;
}

int run_assemble(const Options& o, const std::string& matrix_out) {
    BoundaryMesh mesh = make_mesh(o);
    Clock::time_point start = Clock::now();
    DenseMatrix v = assemble_single_layer(mesh, o.threads);
    double seconds = o.timing ? elapsed_seconds(start) : 0.0;
    if (!matrix_out.empty()) save_matrix(v, matrix_out);
    CsvTable table({"N", "frobenius_norm", "wall_seconds"});
    table.add_row({static_cast<long long>(v.rows()), v.norm(), seconds});
    emit(table, o.out);
    return 0;
}

int run_kernel_decay(const Options& o, int dim, const std::string& degrees, double dist_ratio) {
    if (dim != 2 && dim != 3) throw std::runtime_error("--dim must be 2 or 3");
    if (dist_ratio <= 0.0) throw std::runtime_error("--dist-ratio must be positive");
    // Two unit boxes separated along the first axis so that
    // dist(B_x, B_y) = dist_ratio * diam(B_y); x samples on a grid of B_x.
    Box box_y;
    box_y.dim = dim;
    box_y.center = Vec3::Zero();
    box_y.side = 1.0;
    Box box_x = box_y;
    box_x.center[0] = 1.0 + dist_ratio * box_y.diam();
    std::vector<Vec3> xs;
    const int g = 12;
    for (int k3 = 0; k3 < (dim == 3 ? g : 1); ++k3)
        for (int k2 = 0; k2 < g; ++k2)
            for (int k1 = 0; k1 < g; ++k1) {
                Vec3 x = box_x.center;
                x[0] += box_x.side * (double(k1) / (g - 1) - 0.5);
                x[1] += box_x.side * (double(k2) / (g - 1) - 0.5);
                if (dim == 3) x[2] += box_x.side * (double(k3) / (g - 1) - 0.5);
                xs.push_back(x);
            }
    CsvTable table({"dim", "k", "r", "dist_ratio", "max_error"});
    for (int k : parse_rank_list(degrees)) {
        double err = degenerate_kernel_error(dim, box_y, xs, k);
        long long rank = 1;
        for (int d = 0; d < dim; ++d) rank *= k + 1;
        table.add_row({static_cast<long long>(dim), static_cast<long long>(k), rank, dist_ratio,
                       err});
    }
    emit(table, o.out);
    return 0;
}

int run_inverse(const Options& o) {
    BoundaryMesh mesh = make_mesh(o);
    const int n = mesh.n_elements();
    require_dense_feasible(n, o);
    if (o.geometry == "cube" && n > 1200)
        throw std::runtime_error("cube experiment capped at N=1200; lower --refinement");
    DenseMatrix v = assemble_single_layer(mesh, o.threads);
    DenseMatrix w = invert_spd(v, o);
    ClusterTree tree = build_cluster_tree(mesh, o.n_leaf);
    BlockPartition partition = build_block_partition(tree, o.eta);
    double v_norm = spectral_norm(v, o.seed).value;

    CsvTable table({"N", "eta", "n_leaf", "r", "err_spectral", "bound_lemma42", "bytes",
                    "compression_pct", "wall_seconds"});
    std::vector<double> fit_x, fit_y;
    for (int r : parse_rank_list(o.ranks)) {
        Clock::time_point start = Clock::now();
        HMatrix wh = compress_dense(w, partition, r, o.threads);
        double err = inverse_error(v, wh, o.seed).value;
        double bound = v_norm * aggregate_error_bound(wh);
        double seconds = o.timing ? elapsed_seconds(start) : 0.0;
        StorageReport storage = storage_report(wh);
        table.add_row({static_cast<long long>(n), o.eta, static_cast<long long>(o.n_leaf),
                       static_cast<long long>(r), err, bound,
                       static_cast<long long>(storage.bytes_total), storage.compression_pct,
                       seconds});
        fit_x.push_back(o.geometry == "cube" ? std::sqrt(double(r)) : double(r));
        fit_y.push_back(std::log(err));
    }
    emit(table, o.out);
    if (fit_x.size() >= 2)
        std::fprintf(stderr, "fit: log(err_spectral) vs %s slope = %.6g\n",
                     o.geometry == "cube" ? "sqrt(r)" : "r", fit_slope(fit_x, fit_y));
    return 0;
}

int run_cholesky(const Options& o) {
    BoundaryMesh mesh = make_mesh(o);
    const int n = mesh.n_elements();
    require_dense_feasible(n, o);
    DenseMatrix v = assemble_single_layer(mesh, o.threads);
    ClusterTree tree = build_cluster_tree(mesh, o.n_leaf);
    BlockPartition partition = build_block_partition(tree, o.eta);
    DenseMatrix v_ord = permute_to_cluster_order(v, tree);
    DenseMatrix c_ord;
    try {
        c_ord = recursive_cholesky(v_ord, tree);
    } catch (const NotSpdError& e) {
        if (mesh.dim == 2)
            throw std::runtime_error(std::string(e.what()) +
                                     " (2D single-layer matrices are positive definite only for "
                                     "domain diameter < 1; pass --scale 0.5 or smaller)");
        throw;
    }
    double v_norm = spectral_norm(v_ord, o.seed).value;
    LinOp vinv;
    vinv.rows = vinv.cols = n;
    vinv.apply = [&](const Vector& x) {
        Vector y = x;
        c_ord.triangularView<Eigen::Lower>().solveInPlace(y);
        c_ord.transpose().triangularView<Eigen::Upper>().solveInPlace(y);
        return y;
    };
    vinv.apply_t = vinv.apply;
    double kappa = v_norm * spectral_norm(vinv, o.seed).value;

    CsvTable table({"N", "r", "rel_factor_err", "rel_product_err", "kappa2_estimate"});
    std::vector<double> fit_x, fit_f, fit_p;
    for (int r : parse_rank_list(o.ranks)) {
        HMatrix ch = h_cholesky(c_ord, partition, r, o.threads);
        CholeskyErrors errs = cholesky_errors(v_ord, c_ord, ch, o.seed);
        table.add_row({static_cast<long long>(n), static_cast<long long>(r), errs.rel_factor_err,
                       errs.rel_product_err, kappa});
        fit_x.push_back(double(r));
        fit_f.push_back(std::log(errs.rel_factor_err));
        fit_p.push_back(std::log(errs.rel_product_err));
    }
    emit(table, o.out);
    if (fit_x.size() >= 2)
        std::fprintf(stderr, "fit: log(rel_factor_err) slope = %.6g, log(rel_product_err) slope = %.6g\n",
                     fit_slope(fit_x, fit_f), fit_slope(fit_x, fit_p));
    return 0;
}

int run_schur(const Options& o, int max_sigma) {
    BoundaryMesh mesh = make_mesh(o);
    const int n = mesh.n_elements();
    require_dense_feasible(n, o);
    DenseMatrix v = assemble_single_layer(mesh, o.threads);
    ClusterTree tree = build_cluster_tree(mesh, o.n_leaf);
    BlockPartition partition = build_block_partition(tree, o.eta);
    DenseMatrix v_ord = permute_to_cluster_order(v, tree);
    CsvTable table({"block_id", "level", "k", "sigma_k"});
    long long block_id = 0;
    for (const Block& blk : partition.blocks) {
        if (!blk.admissible) continue;
        DenseMatrix s = schur_complement(v_ord, tree, blk.tau, blk.sigma);
        Vector sv = schur_rank_profile(s);
        const long long level = tree.node(blk.tau).level;
        const int kmax = int(std::min<Eigen::Index>(max_sigma, sv.size()));
        for (int k = 1; k <= kmax; ++k)
            table.add_row({block_id, level, static_cast<long long>(k), sv[k - 1]});
        ++block_id;
    }
    emit(table, o.out);
    return 0;
}

int run_h2(const Options& o) {
    BoundaryMesh mesh = make_mesh(o);
    const int n = mesh.n_elements();
    require_dense_feasible(n, o);
    DenseMatrix v = assemble_single_layer(mesh, o.threads);
    DenseMatrix w = invert_spd(v, o);
    ClusterTree tree = build_cluster_tree(mesh, o.n_leaf);
    BlockPartition partition = build_block_partition(tree, o.eta);
    DenseMatrix w_ord = permute_to_cluster_order(w, tree);

    CsvTable table({"N", "r", "err_spectral_h", "err_spectral_h2", "bytes_h", "bytes_h2"});
    for (int r : parse_rank_list(o.ranks)) {
        HMatrix wh = compress_dense(w, partition, r, o.threads);
        LinOp diff_h;
        diff_h.rows = diff_h.cols = n;
        diff_h.apply = [&](const Vector& x) { return Vector(w * x - matvec(wh, x)); };
        diff_h.apply_t = [&](const Vector& x) {
            return Vector(w.transpose() * x - matvec_transpose(wh, x));
        };
        double err_h = spectral_norm(diff_h, o.seed).value;

        ClusterBasis basis = build_nested_basis(w_ord, tree, partition, r);
        H2Matrix wh2 = h2_compress(w_ord, basis, partition);
        LinOp diff_h2;
        diff_h2.rows = diff_h2.cols = n;
        diff_h2.apply = [&](const Vector& x) { return Vector(w * x - h2_matvec(wh2, x)); };
        diff_h2.apply_t = diff_h2.apply;  // both terms symmetric
        double err_h2 = spectral_norm(diff_h2, o.seed).value;

        table.add_row({static_cast<long long>(n), static_cast<long long>(r), err_h, err_h2,
                       static_cast<long long>(storage_report(wh).bytes_total),
                       static_cast<long long>(h2_storage_report(wh2).bytes_total)});
    }
    emit(table, o.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"H-matrix compression laboratory for Galerkin BEM matrices"};
    app.require_subcommand(1);

    Options o;
    std::string save_mesh_path, matrix_out;
    int dim = 2, max_sigma = 20;
    std::string degrees = "1..8";
    double dist_ratio = 1.0;

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "generate or load a mesh; emit stats");
    add_common_options(mesh_cmd, o);
    mesh_cmd->add_option("--save-mesh", save_mesh_path, "also write the mesh to this path");

    CLI::App* cluster_cmd =
        app.add_subcommand("cluster", "cluster tree + block partition statistics");
    add_common_options(cluster_cmd, o);

    CLI::App* assemble_cmd = app.add_subcommand("assemble", "dense Galerkin matrix assembly");
    add_common_options(assemble_cmd, o);
    assemble_cmd->add_option("--matrix-out", matrix_out, "write the matrix in binary form");

    CLI::App* kernel_cmd = app.add_subcommand(
        "kernel-decay", "Chebyshev degenerate-kernel error on an admissible box pair");
    add_common_options(kernel_cmd, o);
    kernel_cmd->add_option("--dim", dim, "kernel dimension, 2 or 3");
    kernel_cmd->add_option("--k", degrees, "interpolation degrees, e.g. 1..8");
    kernel_cmd->add_option("--dist-ratio", dist_ratio, "box distance as multiple of diameter");

    CLI::App* inverse_cmd = app.add_subcommand(
        "inverse", "compress the dense inverse blockwise; emit spectral errors and storage");
    add_common_options(inverse_cmd, o);

    CLI::App* cholesky_cmd =
        app.add_subcommand("cholesky", "blockwise low-rank Cholesky factor errors");
    add_common_options(cholesky_cmd, o);

    CLI::App* schur_cmd =
        app.add_subcommand("schur", "singular value profiles of admissible Schur complements");
    add_common_options(schur_cmd, o);
    schur_cmd->add_option("--max-sigma", max_sigma, "singular values emitted per block");

    CLI::App* h2_cmd = app.add_subcommand("h2", "nested-basis compression of the inverse");
    add_common_options(h2_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (mesh_cmd->parsed()) return run_mesh(o, save_mesh_path);
        if (cluster_cmd->parsed()) return run_cluster(o);
        if (assemble_cmd->parsed()) return run_assemble(o, matrix_out);
        if (kernel_cmd->parsed()) return run_kernel_decay(o, dim, degrees, dist_ratio);
        if (inverse_cmd->parsed()) return run_inverse(o);
        if (cholesky_cmd->parsed()) return run_cholesky(o);
        if (schur_cmd->parsed()) return run_schur(o, max_sigma);
        if (h2_cmd->parsed()) return run_h2(o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
