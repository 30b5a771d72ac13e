#include "syntens/compose.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "syntens/errors.hpp"

namespace syntens {

const char* composition_kind_name(CompositionKind k) {
    switch (k) {
        case CompositionKind::Additive: return "additive";
        case CompositionKind::WeightedAdditive: return "weighted";
        case CompositionKind::Tensor: return "tensor";
        case CompositionKind::Sif: return "sif";
        case CompositionKind::SifTensor: return "sif+tensor";
    }
    return "?";
}

CompositionKind composition_kind_from_name(const std::string& name) {
    if (name == "additive") return CompositionKind::Additive;
    if (name == "weighted") return CompositionKind::WeightedAdditive;
    if (name == "tensor") return CompositionKind::Tensor;
    if (name == "sif") return CompositionKind::Sif;
    if (name == "sif+tensor" || name == "sif-tensor") return CompositionKind::SifTensor;
    throw DataError("unknown composition method '" + name +
                    "' (want additive|weighted|tensor|sif|sif+tensor)");
}

double sif_weight(std::uint32_t word, const Vocabulary& vocab, double a_param) {
    if (a_param <= 0.0) throw std::invalid_argument("sif_weight: a_param must be positive");
    if (word >= vocab.size()) throw std::invalid_argument("sif_weight: word id out of range");
    const double total = static_cast<double>(vocab.total_tokens());
    const double p = total > 0.0 ? static_cast<double>(vocab.count[word]) / total : 0.0;
    return a_param / (a_param + p);
}

Vector compose(std::uint32_t a, std::uint32_t b, const EmbeddingMatrix& emb,
               const CpTensor* tensor, const CompositionMethod& method,
               const Vocabulary* vocab) {
    const auto n = static_cast<std::uint32_t>(emb.n());
    if (a >= n || b >= n) throw std::invalid_argument("compose: word id out of range");
    const Vector va = emb.row(a);
    const Vector vb = emb.row(b);

    const bool needs_tensor =
        method.kind == CompositionKind::Tensor || method.kind == CompositionKind::SifTensor;
    if (needs_tensor && tensor == nullptr)
        throw std::invalid_argument("compose: method needs a composition tensor");
    const bool needs_vocab =
        method.kind == CompositionKind::Sif || method.kind == CompositionKind::SifTensor;
    if (needs_vocab && vocab == nullptr)
        throw std::invalid_argument("compose: sif methods need vocabulary frequencies");

    switch (method.kind) {
        case CompositionKind::Additive:
            return va + vb;
        case CompositionKind::WeightedAdditive:
            return method.weight_root ? Vector(method.beta * va + vb)
                                      : Vector(va + method.beta * vb);
        case CompositionKind::Tensor: {
            Vector out = va + vb;
            if (method.alpha != 0.0 && tensor->rank() > 0)
                out += method.alpha * contract_two(*tensor, va, vb);
            return out;
        }
        case CompositionKind::Sif: {
            const double oa = sif_weight(a, *vocab, method.sif_a);
            const double ob = sif_weight(b, *vocab, method.sif_a);
            return oa * va + ob * vb;
        }
        case CompositionKind::SifTensor: {
            const double oa = sif_weight(a, *vocab, method.sif_a);
            const double ob = sif_weight(b, *vocab, method.sif_a);
            Vector out = oa * va + ob * vb;
            if (method.gamma != 0.0 && tensor->rank() > 0)
                out += method.gamma * oa * ob * contract_two(*tensor, va, vb);
            return out;
        }
    }
    throw std::invalid_argument("compose: unknown method");
}

Vector fit_common_direction(const std::vector<Vector>& batch) {
    if (batch.empty()) throw std::invalid_argument("fit_common_direction: empty batch");
    const Eigen::Index d = batch.front().size();
    Matrix second_moment = Matrix::Zero(d, d);
    for (const Vector& v : batch) {
        if (v.size() != d) throw std::invalid_argument("fit_common_direction: mixed dimensions");
        second_moment.noalias() += v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(second_moment);
    if (solver.info() != Eigen::Success)
        throw NumericError("fit_common_direction: eigen decomposition failed");
    return solver.eigenvectors().col(d - 1); // eigenvalues ascending
}

void remove_component(Vector& v, const Vector& unit_dir) {
    if (v.size() != unit_dir.size())
        throw std::invalid_argument("remove_component: dimension mismatch");
    v -= v.dot(unit_dir) * unit_dir;
}

std::vector<ScoredWord> nearest_neighbors(const Vector& query, const EmbeddingMatrix& emb, int k,
                                          const std::unordered_set<std::uint32_t>& exclude) {
    if (k < 1) throw std::invalid_argument("nearest_neighbors: k must be >= 1");
    const double qn = query.norm();
    if (qn <= 0.0) throw std::invalid_argument("nearest_neighbors: zero query vector");
    if (query.size() != emb.d())
        throw std::invalid_argument("nearest_neighbors: dimension mismatch");

    std::vector<ScoredWord> scored;
    scored.reserve(static_cast<std::size_t>(emb.n()));
    const Eigen::VectorXd dots = emb.vectors * (query / qn);
    for (std::uint32_t w = 0; w < static_cast<std::uint32_t>(emb.n()); ++w) {
        if (exclude.count(w)) continue;
        const double wn = emb.vectors.row(w).norm();
        scored.push_back(ScoredWord{w, wn > 0.0 ? dots[w] / wn : 0.0});
    }
    const auto better = [](const ScoredWord& x, const ScoredWord& y) {
        if (x.cosine != y.cosine) return x.cosine > y.cosine;
        return x.id < y.id;
    };
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), better);
    scored.resize(keep);
    return scored;
}

} // namespace syntens
