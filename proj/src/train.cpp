#include "syntens/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "syntens/io_util.hpp"

namespace syntens {

void TrainConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("TrainConfig: dim must be >= 1");
    if (cp_rank < 0) throw std::invalid_argument("TrainConfig: cp_rank must be >= 0");
    if (cap <= 0.0) throw std::invalid_argument("TrainConfig: cap must be positive");
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (batch_size < 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 0");
    if (init_scale <= 0.0) throw std::invalid_argument("TrainConfig: init_scale must be positive");
    if (threads < 1) throw std::invalid_argument("TrainConfig: threads must be >= 1");
}

double loss_weight(double x, double cap) {
    if (x < 0.0) throw std::invalid_argument("loss_weight: negative count");
    return std::min(x, cap);
}

std::vector<PairCell> pair_cells(const PairCounts& counts) {
    std::vector<PairCell> cells;
    cells.reserve(counts.cells.size());
    for (const auto& [k, v] : counts.cells.sorted_entries()) {
        const auto [i, j] = unpack_pair(k);
        cells.push_back(PairCell{i, j, v});
    }
    return cells;
}

std::vector<TripleCell> triple_cells(const TripleCounts& counts) {
    std::vector<TripleCell> cells;
    cells.reserve(counts.cells.size());
    for (const auto& [k, v] : counts.cells.sorted_entries()) {
        const auto [a, b, w] = unpack_triple(k);
        cells.push_back(TripleCell{a, b, w, v});
    }
    return cells;
}

std::pair<std::vector<TripleCell>, std::vector<TripleCell>>
split_cells(const std::vector<TripleCell>& cells, double holdout_frac, Rng& rng) {
    if (holdout_frac < 0.0 || holdout_frac >= 1.0)
        throw std::invalid_argument("split_cells: holdout_frac must be in [0,1)");
    std::vector<TripleCell> kept, held;
    kept.reserve(cells.size());
    for (const TripleCell& c : cells) {
        (rng.uniform() < holdout_frac ? held : kept).push_back(c);
    }
    return {std::move(kept), std::move(held)};
}

// ---------------------------------------------------------------------------
// Losses and gradients

double embedding_loss(const EmbeddingMatrix& emb, std::span<const PairCell> cells, double cap) {
    double loss = 0.0;
    for (const PairCell& cell : cells) {
        if (cell.count <= 0.0) continue;
        const double f = loss_weight(cell.count, cap);
        const double norm_sq = (emb.vectors.row(cell.i) + emb.vectors.row(cell.j)).squaredNorm();
        const double r = std::log(cell.count) - norm_sq - emb.global_log_partition;
        loss += f * r * r;
    }
    return loss;
}

double embedding_loss(const EmbeddingMatrix& emb, const PairCounts& counts, double cap) {
    const auto cells = pair_cells(counts);
    return embedding_loss(emb, cells, cap);
}

EmbeddingGradient embedding_gradient(const EmbeddingMatrix& emb, std::span<const PairCell> batch,
                                     double cap) {
    EmbeddingGradient g;
    g.vectors = Matrix::Zero(emb.n(), emb.d());
    for (const PairCell& cell : batch) {
        if (cell.count <= 0.0) continue;
        const double f = loss_weight(cell.count, cap);
        const Eigen::RowVectorXd sum = emb.vectors.row(cell.i) + emb.vectors.row(cell.j);
        const double r = std::log(cell.count) - sum.squaredNorm() - emb.global_log_partition;
        const double coef = -4.0 * f * r;
        g.vectors.row(cell.i) += coef * sum;
        g.vectors.row(cell.j) += coef * sum;
        g.global += -2.0 * f * r;
    }
    return g;
}

double tensor_loss(const CpTensor& tensor, const EmbeddingMatrix& emb,
                   std::span<const TripleCell> cells, double cap) {
    double loss = 0.0;
    Vector u(emb.d());
    for (const TripleCell& cell : cells) {
        if (cell.count <= 0.0) continue;
        const double f = loss_weight(cell.count, cap);
        u = emb.row(cell.w) + emb.row(cell.a) + emb.row(cell.b);
        if (tensor.rank() > 0) u += contract_two(tensor, emb.row(cell.a), emb.row(cell.b));
        const double r = std::log(cell.count) - u.squaredNorm() -
                         tensor.root_bias_or_zero(cell.a) - tensor.global_bias;
        loss += f * r * r;
    }
    return loss;
}

double tensor_loss(const CpTensor& tensor, const EmbeddingMatrix& emb,
                   const TripleCounts& counts, double cap) {
    const auto cells = triple_cells(counts);
    return tensor_loss(tensor, emb, cells, cap);
}

TensorGradient tensor_gradient(const CpTensor& tensor, const EmbeddingMatrix& emb,
                               std::span<const TripleCell> batch, double cap, bool joint) {
    const int rank = tensor.rank();
    const int d = emb.d();
    TensorGradient g;
    g.weights = Eigen::VectorXd::Zero(rank);
    g.factor_a = Matrix::Zero(rank, d);
    g.factor_b = Matrix::Zero(rank, d);
    g.factor_c = Matrix::Zero(rank, d);
    g.root_bias = Eigen::VectorXd::Zero(emb.n());
    g.joint = joint;
    if (joint) g.embeddings = Matrix::Zero(emb.n(), d);

    Vector u(d);
    for (const TripleCell& cell : batch) {
        if (cell.count <= 0.0) continue;
        const double f = loss_weight(cell.count, cap);
        const Vector va = emb.row(cell.a);
        const Vector vb = emb.row(cell.b);
        const Vector vw = emb.row(cell.w);

        Eigen::VectorXd ax, by, gamma;
        u = vw + va + vb;
        if (rank > 0) {
            ax = tensor.factor_a * va;
            by = tensor.factor_b * vb;
            gamma = tensor.weights.cwiseProduct(ax).cwiseProduct(by);
            u += tensor.factor_c.transpose() * gamma;
        }
        const double r = std::log(cell.count) - u.squaredNorm() -
                         tensor.root_bias_or_zero(cell.a) - tensor.global_bias;
        const double coef = -4.0 * f * r; // d loss / d u, direction u

        if (rank > 0) {
            const Eigen::VectorXd cu = tensor.factor_c * u;
            g.weights += coef * ax.cwiseProduct(by).cwiseProduct(cu);
            const Eigen::VectorXd wa = tensor.weights.cwiseProduct(by).cwiseProduct(cu);
            const Eigen::VectorXd wb = tensor.weights.cwiseProduct(ax).cwiseProduct(cu);
            g.factor_a += coef * wa * va.transpose();
            g.factor_b += coef * wb * vb.transpose();
            g.factor_c += coef * gamma * u.transpose();
            if (joint) {
                g.embeddings.row(cell.a) += coef * (tensor.factor_a.transpose() * wa).transpose();
                g.embeddings.row(cell.b) += coef * (tensor.factor_b.transpose() * wb).transpose();
            }
        }
        g.root_bias[cell.a] += -2.0 * f * r;
        g.global_bias += -2.0 * f * r;
        if (joint) {
            g.embeddings.row(cell.w) += coef * u.transpose();
            g.embeddings.row(cell.a) += coef * u.transpose();
            g.embeddings.row(cell.b) += coef * u.transpose();
        }
    }
    return g;
}

void write_train_log(const std::string& path, const std::vector<EpochStat>& log) {
    atomic_write(path, [&](std::ostream& out) {
        out << "epoch\tloss\twallclock_s\n";
        for (const EpochStat& e : log) {
            out << e.epoch << '\t' << format_double(e.loss) << '\t' << format_double(e.seconds)
                << '\n';
        }
    });
}

// ---------------------------------------------------------------------------
// Flat-vector adaptive-moment optimizer

namespace {

class Adam {
public:
    Adam(Eigen::Index size, const TrainConfig& cfg)
        : m_(Eigen::ArrayXd::Zero(size)), v_(Eigen::ArrayXd::Zero(size)), cfg_(cfg) {}

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
        ++t_;
        m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad.array();
        v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.array().square();
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        params.array() -= lr * (m_ / bc1) / ((v_ / bc2).sqrt() + cfg_.adam_eps);
    }

    void snapshot() { m_snap_ = m_; v_snap_ = v_; t_snap_ = t_; }
    void rollback() { m_ = m_snap_; v_ = v_snap_; t_ = t_snap_; }

private:
    Eigen::ArrayXd m_, v_, m_snap_, v_snap_;
    int t_ = 0, t_snap_ = 0;
    TrainConfig cfg_;
};

std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }
double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(now() - t0).count();
}

/// Parallel sum of per-thread batch gradients; the reduction order is fixed by
/// thread index so a given thread count always produces the same bytes.
template <typename Cell, typename GradFn>
Eigen::VectorXd batched_gradient(std::span<const Cell> batch, int threads, Eigen::Index psize,
                                 const GradFn& grad_fn) {
    if (threads <= 1 || batch.size() < 2 * static_cast<std::size_t>(threads)) {
        return grad_fn(batch);
    }
    std::vector<Eigen::VectorXd> partials(threads);
    std::vector<std::thread> workers;
    const std::size_t n = batch.size();
    for (int k = 0; k < threads; ++k) {
        workers.emplace_back([&, k] {
            const std::size_t lo = n * k / threads;
            const std::size_t hi = n * (k + 1) / threads;
            partials[k] = grad_fn(batch.subspan(lo, hi - lo));
        });
    }
    for (auto& w : workers) w.join();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(psize);
    for (const auto& p : partials) out += p;
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Embedding training

namespace {

void unpack_embedding_params(const Eigen::VectorXd& params, EmbeddingMatrix& emb) {
    const int n = emb.n(), d = emb.d();
    emb.vectors = Eigen::Map<const Matrix>(params.data(), n, d);
    emb.global_log_partition = params[n * d];
}

Eigen::VectorXd pack_embedding_params(const EmbeddingMatrix& emb) {
    const int n = emb.n(), d = emb.d();
    Eigen::VectorXd params(n * d + 1);
    Eigen::Map<Matrix>(params.data(), n, d) = emb.vectors;
    params[n * d] = emb.global_log_partition;
    return params;
}

Eigen::VectorXd pack_embedding_grad(const EmbeddingGradient& g) {
    const Eigen::Index n = g.vectors.rows(), d = g.vectors.cols();
    Eigen::VectorXd flat(n * d + 1);
    Eigen::Map<Matrix>(flat.data(), n, d) = g.vectors;
    flat[n * d] = g.global;
    return flat;
}

} // namespace

EmbeddingTrainResult train_embeddings(const PairCounts& counts, const TrainConfig& config) {
    config.validate();
    const auto cells = pair_cells(counts);
    if (cells.empty()) throw std::invalid_argument("train_embeddings: no observed cells");

    const int n = static_cast<int>(counts.vocab_size);
    const int d = config.dim;
    Rng rng(config.seed);

    EmbeddingMatrix emb(n, d);
    const double sigma = config.init_scale / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) emb.vectors(i, j) = sigma * rng.normal();
    emb.global_log_partition = 0.0;

    const bool full_batch =
        config.batch_size == 0 || static_cast<std::size_t>(config.batch_size) >= cells.size();
    const std::size_t bsize = full_batch ? cells.size() : static_cast<std::size_t>(config.batch_size);

    Eigen::VectorXd params = pack_embedding_params(emb);
    Adam adam(params.size(), config);
    double lr = config.learning_rate;

    std::vector<std::uint32_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<PairCell> batch(bsize);

    EmbeddingTrainResult result;
    EmbeddingMatrix scratch(n, d);
    double prev_loss = embedding_loss(emb, cells, config.cap);
    Eigen::VectorXd prev_params = params;
    EmbeddingMatrix checkpoint = emb;

    const auto grad_fn = [&](std::span<const PairCell> span) {
        return pack_embedding_grad(embedding_gradient(scratch, span, config.cap));
    };

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = now();
        // shuffle per epoch; full-batch order is irrelevant to the gradient
        if (!full_batch) {
            for (std::size_t k = order.size(); k > 1; --k) {
                std::swap(order[k - 1], order[rng.integer(k)]);
            }
        }
        if (full_batch) adam.snapshot();

        for (std::size_t start = 0; start < cells.size(); start += bsize) {
            const std::size_t len = std::min(bsize, cells.size() - start);
            for (std::size_t k = 0; k < len; ++k) batch[k] = cells[order[start + k]];
            unpack_embedding_params(params, scratch);
            const Eigen::VectorXd grad = batched_gradient<PairCell>(
                std::span<const PairCell>(batch.data(), len), config.threads, params.size(),
                grad_fn);
            adam.step(params, grad, lr);
        }

        unpack_embedding_params(params, scratch);
        double loss = embedding_loss(scratch, cells, config.cap);
        if (!std::isfinite(loss)) {
            throw EmbeddingTrainingDivergence(
                "embedding training diverged at epoch " + std::to_string(epoch), checkpoint);
        }
        if (full_batch && loss > prev_loss) {
            // roll the worsening step back and retry more cautiously
            params = prev_params;
            adam.rollback();
            lr *= 0.5;
            loss = prev_loss;
        } else {
            prev_params = params;
            prev_loss = loss;
            unpack_embedding_params(params, checkpoint);
        }
        result.log.push_back(EpochStat{epoch, loss, seconds_since(t0)});
    }

    unpack_embedding_params(prev_params, emb);
    result.embeddings = std::move(emb);
    return result;
}

// ---------------------------------------------------------------------------
// Tensor training

namespace {

struct TensorLayout {
    int rank = 0, d = 0, n = 0;
    bool joint = false;
    Eigen::Index size() const {
        return static_cast<Eigen::Index>(rank) +
               3 * static_cast<Eigen::Index>(rank) * d + n + 1 +
               (joint ? static_cast<Eigen::Index>(n) * d : 0);
    }
};

Eigen::VectorXd pack_tensor_params(const CpTensor& t, const EmbeddingMatrix& emb,
                                   const TensorLayout& lay) {
    Eigen::VectorXd p(lay.size());
    Eigen::Index off = 0;
    p.segment(off, lay.rank) = t.weights;
    off += lay.rank;
    auto put = [&](const Matrix& f) {
        Eigen::Map<Matrix>(p.data() + off, lay.rank, lay.d) = f;
        off += static_cast<Eigen::Index>(lay.rank) * lay.d;
    };
    put(t.factor_a);
    put(t.factor_b);
    put(t.factor_c);
    for (int i = 0; i < lay.n; ++i) p[off + i] = t.root_bias_or_zero(static_cast<std::uint32_t>(i));
    off += lay.n;
    p[off++] = t.global_bias;
    if (lay.joint) {
        Eigen::Map<Matrix>(p.data() + off, lay.n, lay.d) = emb.vectors;
    }
    return p;
}

void unpack_tensor_params(const Eigen::VectorXd& p, const TensorLayout& lay, CpTensor& t,
                          EmbeddingMatrix& emb) {
    Eigen::Index off = 0;
    t.weights = p.segment(off, lay.rank);
    off += lay.rank;
    auto take = [&](Matrix& f) {
        f = Eigen::Map<const Matrix>(p.data() + off, lay.rank, lay.d);
        off += static_cast<Eigen::Index>(lay.rank) * lay.d;
    };
    take(t.factor_a);
    take(t.factor_b);
    take(t.factor_c);
    t.root_bias.clear();
    for (int i = 0; i < lay.n; ++i) {
        if (p[off + i] != 0.0) t.root_bias[static_cast<std::uint32_t>(i)] = p[off + i];
    }
    off += lay.n;
    t.global_bias = p[off++];
    if (lay.joint) {
        emb.vectors = Eigen::Map<const Matrix>(p.data() + off, lay.n, lay.d);
    }
}

Eigen::VectorXd pack_tensor_grad(const TensorGradient& g, const TensorLayout& lay) {
    Eigen::VectorXd p(lay.size());
    Eigen::Index off = 0;
    p.segment(off, lay.rank) = g.weights;
    off += lay.rank;
    auto put = [&](const Matrix& f) {
        Eigen::Map<Matrix>(p.data() + off, lay.rank, lay.d) = f;
        off += static_cast<Eigen::Index>(lay.rank) * lay.d;
    };
    put(g.factor_a);
    put(g.factor_b);
    put(g.factor_c);
    p.segment(off, lay.n) = g.root_bias;
    off += lay.n;
    p[off++] = g.global_bias;
    if (lay.joint) {
        Eigen::Map<Matrix>(p.data() + off, lay.n, lay.d) = g.embeddings;
    }
    return p;
}

} // namespace

TensorTrainResult train_tensor_cells(std::span<const TripleCell> cells, std::uint32_t vocab_size,
                                     const EmbeddingMatrix& emb, const TrainConfig& config) {
    config.validate();
    if (static_cast<std::uint32_t>(emb.n()) != vocab_size)
        throw std::invalid_argument("train_tensor: embeddings do not match vocabulary size");
    const int d = emb.d();
    const int rank = config.cp_rank;
    Rng rng(config.seed);

    CpTensor tensor = CpTensor::zero(d);
    if (rank > 0) {
        tensor.weights = Eigen::VectorXd::Ones(rank);
        const double sigma =
            config.init_scale / std::pow(static_cast<double>(d) * rank, 0.25);
        auto init = [&](Matrix& f) {
            f = Matrix(rank, d);
            for (int r = 0; r < rank; ++r)
                for (int j = 0; j < d; ++j) f(r, j) = sigma * rng.normal();
        };
        init(tensor.factor_a);
        init(tensor.factor_b);
        init(tensor.factor_c);
    }

    TensorTrainResult result;
    result.embeddings = emb;
    if (cells.empty()) {
        // nothing to fit; return the zero-initialized tensor unchanged
        result.tensor = std::move(tensor);
        return result;
    }

    const bool full_batch =
        config.batch_size == 0 || static_cast<std::size_t>(config.batch_size) >= cells.size();
    const std::size_t bsize = full_batch ? cells.size() : static_cast<std::size_t>(config.batch_size);

    TensorLayout lay{rank, d, static_cast<int>(vocab_size), config.joint};
    Eigen::VectorXd params = pack_tensor_params(tensor, emb, lay);
    Adam adam(params.size(), config);
    double lr = config.learning_rate;

    std::vector<std::uint32_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<TripleCell> batch(bsize);

    CpTensor scratch_t = tensor;
    EmbeddingMatrix scratch_e = emb;
    double prev_loss = tensor_loss(tensor, emb, cells, config.cap);
    Eigen::VectorXd prev_params = params;
    CpTensor checkpoint = tensor;

    const auto grad_fn = [&](std::span<const TripleCell> span) {
        return pack_tensor_grad(
            tensor_gradient(scratch_t, scratch_e, span, config.cap, config.joint), lay);
    };

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = now();
        if (!full_batch) {
            for (std::size_t k = order.size(); k > 1; --k) {
                std::swap(order[k - 1], order[rng.integer(k)]);
            }
        }
        if (full_batch) adam.snapshot();

        for (std::size_t start = 0; start < cells.size(); start += bsize) {
            const std::size_t len = std::min(bsize, cells.size() - start);
            for (std::size_t k = 0; k < len; ++k) batch[k] = cells[order[start + k]];
            unpack_tensor_params(params, lay, scratch_t, scratch_e);
            const Eigen::VectorXd grad = batched_gradient<TripleCell>(
                std::span<const TripleCell>(batch.data(), len), config.threads, params.size(),
                grad_fn);
            adam.step(params, grad, lr);
        }

        unpack_tensor_params(params, lay, scratch_t, scratch_e);
        double loss = tensor_loss(scratch_t, scratch_e, cells, config.cap);
        if (!std::isfinite(loss)) {
            throw TensorTrainingDivergence(
                "tensor training diverged at epoch " + std::to_string(epoch), checkpoint);
        }
        if (full_batch && loss > prev_loss) {
            params = prev_params;
            adam.rollback();
            lr *= 0.5;
            loss = prev_loss;
        } else {
            prev_params = params;
            prev_loss = loss;
            checkpoint = scratch_t;
        }
        result.log.push_back(EpochStat{epoch, loss, seconds_since(t0)});
    }

    unpack_tensor_params(prev_params, lay, result.tensor, result.embeddings);
    result.tensor.dim = d;
    return result;
}

TensorTrainResult train_tensor(const TripleCounts& counts, const EmbeddingMatrix& emb,
                               const TrainConfig& config) {
    const auto cells = triple_cells(counts);
    return train_tensor_cells(cells, counts.vocab_size, emb, config);
}

} // namespace syntens
