#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "syntens/conll.hpp"
#include "syntens/embedding.hpp"
#include "syntens/linalg.hpp"
#include "syntens/rng.hpp"

namespace syntens {

/// Ground-truth parameters for sampling a synthetic corpus from the
/// log-linear discourse model: a slow random walk on the unit sphere emits a
/// word per step, or with probability p_syn a (root, dependent) pair whose
/// dependent logits get the trilinear tensor adjustment.
struct ModelParams {
    EmbeddingMatrix embeddings;
    CpTensor tensor;
    double p_syn = 0.0;
    double eps_w = 1.0;  // walk step bound is eps_w / sqrt(d)
    double kappa = 1.0;  // upper bound on the embedding scale s
    double tau = 1.0;    // E[s]
    Relation relation = Relation::AdjNoun;
    int sentence_steps = 20; // discourse steps per emitted sentence

    int n() const { return embeddings.n(); }
    int d() const { return embeddings.d(); }
};

/// Latent discourse state: a unit vector.
struct DiscourseState {
    Vector c;
};

/// Each vector is s * g with g standard Gaussian and s uniform on
/// [max(0, 2*tau - kappa), kappa], so E[s] = tau whenever tau >= kappa/2 and
/// s <= kappa always.
EmbeddingMatrix init_embeddings(int n, int d, double kappa, double tau, Rng& rng);

/// One step of the walk: a Gaussian proposal renormalized to the sphere, then
/// pulled back along the great circle so the chord bound eps_w/sqrt(d) holds
/// exactly. The kernel depends on the start point only through the angle
/// travelled, so the uniform distribution is stationary.
DiscourseState walk_step(const DiscourseState& state, double eps_w, Rng& rng);

/// Exact softmax sample over the vocabulary with logits <v_w, c>.
std::uint32_t emit_word(const Vector& c, const EmbeddingMatrix& emb, Rng& rng);

/// Samples the root by emit_word's law, then the dependent by softmax over
/// <v_b, c> + T(v_root, v_b, c).
std::pair<std::uint32_t, std::uint32_t> emit_pair(const Vector& c, const EmbeddingMatrix& emb,
                                                  const CpTensor& tensor, Rng& rng);

/// A generated corpus: sentences of token ids plus the gold syntactic pairs,
/// already in the shape the counting layer consumes.
struct SyntheticCorpus {
    std::vector<IdSentence> sentences;
    std::vector<std::vector<SyntacticPair>> pairs_per_sentence;
    std::uint32_t vocab_size = 0;

    std::size_t num_tokens() const;
    std::size_t num_pairs() const;

    /// Token name for an id ("w000042"); the corpus writer and the identity
    /// vocabulary use the same naming.
    static std::string word_name(std::uint32_t id);

    /// Identity-id vocabulary (word w<i> has id i) with counts tallied from
    /// the generated sentences.
    Vocabulary vocabulary() const;

    /// Unigram occurrence counts per id.
    std::vector<double> unigram_counts() const;
};

/// Runs `num_steps` discourse steps. Sentences are closed every
/// params.sentence_steps steps; the walk continues across sentences. For pair
/// steps the dependent token is emitted first, then the root, with gold HEAD
/// and DEPREL labels so ingestion reproduces the pairs without a parser.
SyntheticCorpus generate_corpus(const ModelParams& params, std::int64_t num_steps, Rng& rng);

/// Token-record corpus file (FORM HEAD DEPREL, blank-line sentence breaks).
void write_corpus(const std::string& path, const SyntheticCorpus& corpus);

/// Sidecar gold pairs: sentence index, root position, dep position, relation.
void write_gold_pairs(const std::string& path, const SyntheticCorpus& corpus);

} // namespace syntens
