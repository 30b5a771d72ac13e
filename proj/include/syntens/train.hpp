#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "syntens/counts.hpp"
#include "syntens/embedding.hpp"
#include "syntens/errors.hpp"
#include "syntens/linalg.hpp"
#include "syntens/rng.hpp"

namespace syntens {

struct TrainConfig {
    int dim = 300;
    int cp_rank = 1000;
    double cap = 100.0;        // ceiling of the count weight f(x) = min(x, cap)
    double learning_rate = 1e-3;
    int epochs = 5;
    int batch_size = 4096;     // 0 = full batch
    std::uint64_t seed = 0;
    double init_scale = 0.1;

    // adaptive-moment optimizer
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    int threads = 1;           // 1 = deterministic mode
    bool joint = false;        // tensor training also updates the embeddings

    void validate() const;
};

/// Count weight f(x) = min(x, cap). Rejects negative x.
double loss_weight(double x, double cap);

/// Observed cells pulled out of the sparse accumulators, in key order so a
/// given table always yields the same cell sequence.
struct PairCell {
    std::uint32_t i, j;
    double count;
};
struct TripleCell {
    std::uint32_t a, b, w;
    double count;
};
std::vector<PairCell> pair_cells(const PairCounts& counts);
std::vector<TripleCell> triple_cells(const TripleCounts& counts);

/// Seeded random split into (kept, held_out) with `holdout_frac` of cells held out.
std::pair<std::vector<TripleCell>, std::vector<TripleCell>>
split_cells(const std::vector<TripleCell>& cells, double holdout_frac, Rng& rng);

/// Weighted squared error of log counts against the additive-composite norm:
///   sum over observed cells f(X_ij) * (log X_ij - |v_i + v_j|^2 - C)^2
/// with C the embedding's global log-partition constant. Cells with count <= 0
/// are skipped.
double embedding_loss(const EmbeddingMatrix& emb, std::span<const PairCell> cells, double cap);
double embedding_loss(const EmbeddingMatrix& emb, const PairCounts& counts, double cap = 100.0);

struct EmbeddingGradient {
    Matrix vectors;       // n x d
    double global = 0.0;  // d loss / d C
};
EmbeddingGradient embedding_gradient(const EmbeddingMatrix& emb, std::span<const PairCell> batch,
                                     double cap);

/// Weighted squared error of log triple counts against the tensor-composite norm:
///   sum f(X_abw) * (log X_abw - |v_w + v_a + v_b + T(v_a,v_b,.)|^2 - C_a - C)^2.
/// Root biases never touched by training read as 0.
double tensor_loss(const CpTensor& tensor, const EmbeddingMatrix& emb,
                   std::span<const TripleCell> cells, double cap);
double tensor_loss(const CpTensor& tensor, const EmbeddingMatrix& emb,
                   const TripleCounts& counts, double cap = 100.0);

struct TensorGradient {
    Eigen::VectorXd weights;
    Matrix factor_a, factor_b, factor_c;
    Eigen::VectorXd root_bias; // dense over the vocabulary
    double global_bias = 0.0;
    Matrix embeddings; // n x d; filled only when `joint`
    bool joint = false;
};
TensorGradient tensor_gradient(const CpTensor& tensor, const EmbeddingMatrix& emb,
                               std::span<const TripleCell> batch, double cap,
                               bool joint = false);

struct EpochStat {
    int epoch = 0;
    double loss = 0.0;
    double seconds = 0.0;
};
void write_train_log(const std::string& path, const std::vector<EpochStat>& log);

/// Thrown when the loss stops being finite; carries the last finite state.
class EmbeddingTrainingDivergence : public NumericError {
public:
    EmbeddingTrainingDivergence(std::string msg, EmbeddingMatrix checkpoint)
        : NumericError(std::move(msg)), checkpoint(std::move(checkpoint)) {}
    EmbeddingMatrix checkpoint;
};
class TensorTrainingDivergence : public NumericError {
public:
    TensorTrainingDivergence(std::string msg, CpTensor checkpoint)
        : NumericError(std::move(msg)), checkpoint(std::move(checkpoint)) {}
    CpTensor checkpoint;
};

struct EmbeddingTrainResult {
    EmbeddingMatrix embeddings;
    std::vector<EpochStat> log;
};

struct TensorTrainResult {
    CpTensor tensor;
    std::vector<EpochStat> log;
    EmbeddingMatrix embeddings; // updated copy when config.joint, else input copy
};

/// Mini-batched adaptive-moment descent on embedding_loss. Full-batch runs
/// (batch_size == 0) keep the per-epoch loss non-increasing by rolling back a
/// worsening step and halving the learning rate.
EmbeddingTrainResult train_embeddings(const PairCounts& counts, const TrainConfig& config);

/// Trains the CP tensor and biases against frozen embeddings (or jointly when
/// config.joint). cp_rank 0 trains the biases only and leaves T == 0.
TensorTrainResult train_tensor(const TripleCounts& counts, const EmbeddingMatrix& emb,
                               const TrainConfig& config);
TensorTrainResult train_tensor_cells(std::span<const TripleCell> cells, std::uint32_t vocab_size,
                                     const EmbeddingMatrix& emb, const TrainConfig& config);

} // namespace syntens
