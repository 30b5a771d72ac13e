#pragma once

#include <vector>

#include "syntens/embedding.hpp"
#include "syntens/linalg.hpp"
#include "syntens/rng.hpp"

namespace testutil {

using syntens::CpTensor;
using syntens::Matrix;
using syntens::Vector;

/// A d x d x d array filled by explicit loops from the CP factors. This is the
/// independent oracle the factored operations are checked against.
struct DenseTensor {
    int d = 0;
    std::vector<double> cells; // cells[(i*d + j)*d + k]

    double& at(int i, int j, int k) { return cells[static_cast<std::size_t>((i * d + j) * d + k)]; }
    double at(int i, int j, int k) const {
        return cells[static_cast<std::size_t>((i * d + j) * d + k)];
    }
};

inline DenseTensor densify(const CpTensor& t) {
    DenseTensor dt;
    dt.d = t.dim;
    dt.cells.assign(static_cast<std::size_t>(t.dim) * t.dim * t.dim, 0.0);
    for (int r = 0; r < t.rank(); ++r) {
        for (int i = 0; i < t.dim; ++i)
            for (int j = 0; j < t.dim; ++j)
                for (int k = 0; k < t.dim; ++k)
                    dt.at(i, j, k) +=
                        t.weights[r] * t.factor_a(r, i) * t.factor_b(r, j) * t.factor_c(r, k);
    }
    return dt;
}

inline double dense_trilinear(const DenseTensor& dt, const Vector& x, const Vector& y,
                              const Vector& z) {
    double acc = 0.0;
    for (int i = 0; i < dt.d; ++i)
        for (int j = 0; j < dt.d; ++j)
            for (int k = 0; k < dt.d; ++k) acc += dt.at(i, j, k) * x[i] * y[j] * z[k];
    return acc;
}

inline Vector dense_contract_two(const DenseTensor& dt, const Vector& x, const Vector& y) {
    Vector out = Vector::Zero(dt.d);
    for (int i = 0; i < dt.d; ++i)
        for (int j = 0; j < dt.d; ++j)
            for (int k = 0; k < dt.d; ++k) out[k] += dt.at(i, j, k) * x[i] * y[j];
    return out;
}

/// Dense slice matrix M with M(j,k) = sum_i T_ijk x_i (+ identity).
inline Matrix dense_slice(const DenseTensor& dt, const Vector& x, bool add_identity) {
    Matrix m = Matrix::Zero(dt.d, dt.d);
    for (int i = 0; i < dt.d; ++i)
        for (int j = 0; j < dt.d; ++j)
            for (int k = 0; k < dt.d; ++k) m(j, k) += dt.at(i, j, k) * x[i];
    if (add_identity) m += Matrix::Identity(dt.d, dt.d);
    return m;
}

inline CpTensor random_tensor(int d, int rank, syntens::Rng& rng, double scale = 1.0) {
    CpTensor t = CpTensor::zero(d);
    if (rank == 0) return t;
    t.weights = Eigen::VectorXd(rank);
    t.factor_a = Matrix(rank, d);
    t.factor_b = Matrix(rank, d);
    t.factor_c = Matrix(rank, d);
    for (int r = 0; r < rank; ++r) {
        t.weights[r] = scale * (0.5 + rng.uniform());
        for (int j = 0; j < d; ++j) {
            t.factor_a(r, j) = rng.normal();
            t.factor_b(r, j) = rng.normal();
            t.factor_c(r, j) = rng.normal();
        }
    }
    return t;
}

inline Vector random_vector(int d, syntens::Rng& rng) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    return v;
}

inline syntens::EmbeddingMatrix random_embeddings(int n, int d, syntens::Rng& rng,
                                                  double scale = 1.0) {
    syntens::EmbeddingMatrix emb(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) emb.vectors(i, j) = scale * rng.normal();
    return emb;
}

inline double rel_err(double got, double want) {
    const double denom = std::max({std::abs(got), std::abs(want), 1e-300});
    return std::abs(got - want) / denom;
}

} // namespace testutil
