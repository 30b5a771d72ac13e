#pragma once

#include <cstdint>

#include "syntens/linalg.hpp"

namespace syntens {

/// Word vectors for one vocabulary, row w = v_w. `global_log_partition` is the
/// learned constant that absorbs the log normalizers in the embedding
/// objective; `word_bias` is a reserved per-word constant for bias-augmented
/// objective variants and stays zero under the stock objective.
struct EmbeddingMatrix {
    Matrix vectors; // n x d
    Eigen::VectorXd word_bias;
    double global_log_partition = 0.0;

    EmbeddingMatrix() = default;
    EmbeddingMatrix(int n, int d)
        : vectors(Matrix::Zero(n, d)), word_bias(Eigen::VectorXd::Zero(n)) {}

    int n() const { return static_cast<int>(vectors.rows()); }
    int d() const { return static_cast<int>(vectors.cols()); }

    Vector row(std::uint32_t w) const { return vectors.row(w).transpose(); }
};

/// Rescales each row of `target` to the norm of the matching row in
/// `reference` (rows with zero norm on either side are left unchanged).
/// Used to make externally produced vectors norm-compatible before tensor
/// training.
void match_norms(EmbeddingMatrix& target, const EmbeddingMatrix& reference);

} // namespace syntens
