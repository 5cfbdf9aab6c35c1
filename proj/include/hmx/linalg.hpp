// Dense Cholesky, matrix-free spectral norms, deterministic random vectors.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "hmx/geometry.hpp"

namespace hmx {

// splitmix64: identical streams on every platform, unlike <random>
// distributions.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [-1, 1)
    double uniform() { return double(next() >> 11) * 0x1p-52 - 1.0; }
};

inline Vector random_unit_vector(Eigen::Index n, uint64_t seed) {
    SplitMix64 rng(seed);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform();
    double norm = v.norm();
    if (norm == 0.0) {
        v.setZero();
        v[0] = 1.0;
        return v;
    }
    return v / norm;
}

inline DenseMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, uint64_t seed) {
    SplitMix64 rng(seed);
    DenseMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform();
    return m;
}

// Matrix-free operator; apply_t must implement the exact transpose.
struct LinOp {
    Eigen::Index rows = 0, cols = 0;
    std::function<Vector(const Vector&)> apply;
    std::function<Vector(const Vector&)> apply_t;
};

inline LinOp dense_op(const DenseMatrix& a) {
    return LinOp{a.rows(), a.cols(), [&a](const Vector& x) { return Vector(a * x); },
                 [&a](const Vector& x) { return Vector(a.transpose() * x); }};
}

struct SpectralNormResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    operator double() const { return value; }
};

// Power iteration on A^T A; stops when the singular-value estimate is stable
// to rel_tol or after max_iterations.
inline SpectralNormResult spectral_norm(const LinOp& op, uint64_t seed = 12345,
                                        double rel_tol = 1e-6, int max_iterations = 500) {
    SpectralNormResult result;
    if (op.rows == 0 || op.cols == 0) {
        result.converged = true;
        return result;
    }
    Vector v = random_unit_vector(op.cols, seed);
    double prev = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        Vector w = op.apply(v);
        double sigma = w.norm();
        result.value = sigma;
        result.iterations = it;
        if (sigma == 0.0) {
            result.converged = true;
            return result;
        }
        Vector z = op.apply_t(w);
        double zn = z.norm();
        if (zn == 0.0) {
            result.converged = true;
            return result;
        }
        v = z / zn;
        if (it > 1 && std::abs(sigma - prev) <= rel_tol * sigma) {
            result.converged = true;
            return result;
        }
        prev = sigma;
    }
    return result;  // converged stays false at the iteration cap
}

inline SpectralNormResult spectral_norm(const DenseMatrix& a, uint64_t seed = 12345,
                                        double rel_tol = 1e-6, int max_iterations = 500) {
    return spectral_norm(dense_op(a), seed, rel_tol, max_iterations);
}

// ---------------------------------------------------------------------------

struct NotSpdError : std::runtime_error {
    int index;
    explicit NotSpdError(int idx)
        : std::runtime_error("matrix not positive definite at index " + std::to_string(idx)),
          index(idx) {}
};

// Lower-triangular factor, A = L L^T; reports the first failing pivot.
inline DenseMatrix dense_cholesky(const DenseMatrix& a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("cholesky needs a square matrix");
    DenseMatrix l = DenseMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double diag = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(diag > 0.0) || !std::isfinite(diag)) throw NotSpdError(int(j));
        diag = std::sqrt(diag);
        l(j, j) = diag;
        if (j + 1 < n) {
            auto tail = l.block(j + 1, 0, n - j - 1, j);
            l.col(j).tail(n - j - 1) =
                (a.col(j).tail(n - j - 1) - tail * l.row(j).head(j).transpose()) / diag;
        }
    }
    return l;
}

// Inverse of an SPD matrix through its Cholesky factor.
inline DenseMatrix dense_inverse(const DenseMatrix& a) {
    DenseMatrix l = dense_cholesky(a);
    DenseMatrix inv = DenseMatrix::Identity(a.rows(), a.cols());
    l.triangularView<Eigen::Lower>().solveInPlace(inv);
    l.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
    return inv;
}

}  // namespace hmx
