#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "syntens/embedding.hpp"
#include "syntens/linalg.hpp"
#include "syntens/vocab.hpp"

namespace syntens {

enum class CompositionKind : std::uint8_t {
    Additive,         // v_a + v_b
    WeightedAdditive, // beta v_a + v_b (side configurable)
    Tensor,           // v_a + v_b + alpha T(v_a, v_b, .)
    Sif,              // om_a v_a + om_b v_b, common component removed per batch
    SifTensor,        // sif + gamma om_a om_b T(v_a, v_b, .)
};

const char* composition_kind_name(CompositionKind k);
CompositionKind composition_kind_from_name(const std::string& name);

struct CompositionMethod {
    CompositionKind kind = CompositionKind::Additive;
    double alpha = 0.4;   // tensor term weight (reference value for the stock embeddings)
    double beta = 1.0;    // weighted-additive weight
    double gamma = 0.1;   // sif+tensor term weight
    double sif_a = 1e-3;  // sif smoothing parameter
    bool weight_root = true; // whether beta scales the root word or the dependent

    static CompositionMethod additive() { return {CompositionKind::Additive}; }
    static CompositionMethod tensor(double alpha) {
        CompositionMethod m{CompositionKind::Tensor};
        m.alpha = alpha;
        return m;
    }
    static CompositionMethod weighted_additive(double beta, bool weight_root = true) {
        CompositionMethod m{CompositionKind::WeightedAdditive};
        m.beta = beta;
        m.weight_root = weight_root;
        return m;
    }
    static CompositionMethod sif(double a_param = 1e-3) {
        CompositionMethod m{CompositionKind::Sif};
        m.sif_a = a_param;
        return m;
    }
    static CompositionMethod sif_tensor(double gamma, double a_param = 1e-3) {
        CompositionMethod m{CompositionKind::SifTensor};
        m.gamma = gamma;
        m.sif_a = a_param;
        return m;
    }
};

/// Smoothed inverse frequency weight a / (a + p(w)), p(w) = count(w) / total tokens.
double sif_weight(std::uint32_t word, const Vocabulary& vocab, double a_param);

/// Composite phrase vector for the pair (a, b) with a the root word. Tensor
/// kinds need `tensor`; sif kinds need `vocab` for the frequency weights.
/// Single-phrase sif composition skips the batch-level common-component
/// removal (see fit_common_direction).
Vector compose(std::uint32_t a, std::uint32_t b, const EmbeddingMatrix& emb,
               const CpTensor* tensor, const CompositionMethod& method,
               const Vocabulary* vocab = nullptr);

/// First principal direction (unit) of a batch of vectors, via the top
/// eigenvector of the uncentered second-moment matrix.
Vector fit_common_direction(const std::vector<Vector>& batch);

/// v -= <v, dir> dir.
void remove_component(Vector& v, const Vector& unit_dir);

struct ScoredWord {
    std::uint32_t id;
    double cosine;
};

/// Top-k vocabulary words by cosine similarity to the query, descending, ties
/// broken by ascending id. Zero-norm embedding rows score 0.
std::vector<ScoredWord> nearest_neighbors(const Vector& query, const EmbeddingMatrix& emb, int k,
                                          const std::unordered_set<std::uint32_t>& exclude = {});

} // namespace syntens
