#include "syntens/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "syntens/errors.hpp"
#include "syntens/io_util.hpp"

namespace syntens {

EmbeddingMatrix init_embeddings(int n, int d, double kappa, double tau, Rng& rng) {
    if (n < 1 || d < 1) throw std::invalid_argument("init_embeddings: n and d must be >= 1");
    if (kappa <= 0.0 || tau <= 0.0 || tau > kappa)
        throw std::invalid_argument("init_embeddings: need 0 < tau <= kappa");
    const double lo = std::max(0.0, 2.0 * tau - kappa);
    EmbeddingMatrix emb(n, d);
    for (int i = 0; i < n; ++i) {
        const double s = lo + (kappa - lo) * rng.uniform();
        for (int j = 0; j < d; ++j) emb.vectors(i, j) = s * rng.normal();
    }
    return emb;
}

DiscourseState walk_step(const DiscourseState& state, double eps_w, Rng& rng) {
    const int d = static_cast<int>(state.c.size());
    if (d < 1) throw std::invalid_argument("walk_step: empty state");
    if (eps_w < 0.0) throw std::invalid_argument("walk_step: eps_w must be >= 0");
    if (eps_w == 0.0) return state;

    const double bound = eps_w / std::sqrt(static_cast<double>(d));
    const double step_scale = bound / std::sqrt(static_cast<double>(d));

    Vector g(d);
    for (int i = 0; i < d; ++i) g[i] = rng.normal();
    Vector proposal = state.c + step_scale * g;
    const double pn = proposal.norm();
    if (pn < 1e-12) return state; // degenerate proposal, stay put
    proposal /= pn;

    const double chord = (proposal - state.c).norm();
    if (chord <= bound) return DiscourseState{proposal};

    // pull back along the great circle to land exactly at the bound
    Vector tangent = proposal - proposal.dot(state.c) * state.c;
    const double tn = tangent.norm();
    if (tn < 1e-14) return state; // antipodal proposal; no usable direction
    tangent /= tn;
    // chord 2*sin(theta/2) == bound  =>  theta = 2*asin(bound/2)
    const double theta = 2.0 * std::asin(std::min(1.0, bound / 2.0));
    Vector out = std::cos(theta) * state.c + std::sin(theta) * tangent;
    return DiscourseState{out / out.norm()};
}

namespace {

/// Softmax sample given precomputed logits. Linear scan over the cumulative
/// mass with one uniform draw; logits are max-stabilized in place.
std::uint32_t softmax_sample(Eigen::VectorXd& logits, Rng& rng) {
    const int n = static_cast<int>(logits.size());
    const double m = logits.maxCoeff();
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        logits[i] = std::exp(logits[i] - m);
        z += logits[i];
    }
    const double u = rng.uniform() * z;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += logits[i];
        if (u < acc) return static_cast<std::uint32_t>(i);
    }
    return static_cast<std::uint32_t>(n - 1);
}

} // namespace

std::uint32_t emit_word(const Vector& c, const EmbeddingMatrix& emb, Rng& rng) {
    if (c.size() != emb.d()) throw std::invalid_argument("emit_word: dimension mismatch");
    Eigen::VectorXd logits = emb.vectors * c;
    return softmax_sample(logits, rng);
}

std::pair<std::uint32_t, std::uint32_t> emit_pair(const Vector& c, const EmbeddingMatrix& emb,
                                                  const CpTensor& tensor, Rng& rng) {
    if (c.size() != emb.d()) throw std::invalid_argument("emit_pair: dimension mismatch");
    const Eigen::VectorXd base = emb.vectors * c;
    Eigen::VectorXd logits = base;
    const std::uint32_t root = softmax_sample(logits, rng);

    logits = base;
    if (tensor.rank() > 0) {
        // T(v_root, v_b, c) for all b at once: coefficients over ranks, then
        // one n x R product against the precomputable <b_r, v_b> table. Here
        // computed directly; the corpus generator below caches the table.
        const Eigen::VectorXd beta =
            tensor.weights.cwiseProduct(tensor.factor_a * emb.row(root))
                .cwiseProduct(tensor.factor_c * c);
        logits += emb.vectors * (tensor.factor_b.transpose() * beta);
    }
    const std::uint32_t dep = softmax_sample(logits, rng);
    return {root, dep};
}

std::size_t SyntheticCorpus::num_tokens() const {
    std::size_t t = 0;
    for (const IdSentence& s : sentences) t += s.ids.size();
    return t;
}

std::size_t SyntheticCorpus::num_pairs() const {
    std::size_t t = 0;
    for (const auto& p : pairs_per_sentence) t += p.size();
    return t;
}

std::string SyntheticCorpus::word_name(std::uint32_t id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%06u", id);
    return buf;
}

Vocabulary SyntheticCorpus::vocabulary() const {
    Vocabulary v;
    v.min_count = 1;
    v.word_of.reserve(vocab_size);
    v.count.assign(vocab_size, 0);
    for (std::uint32_t i = 0; i < vocab_size; ++i) {
        v.word_of.push_back(word_name(i));
        v.id_of.emplace(v.word_of.back(), i);
    }
    for (const IdSentence& s : sentences) {
        for (std::int32_t id : s.ids) {
            if (id >= 0) ++v.count[static_cast<std::size_t>(id)];
        }
    }
    return v;
}

std::vector<double> SyntheticCorpus::unigram_counts() const {
    std::vector<double> counts(vocab_size, 0.0);
    for (const IdSentence& s : sentences) {
        for (std::int32_t id : s.ids) {
            if (id >= 0) counts[static_cast<std::size_t>(id)] += 1.0;
        }
    }
    return counts;
}

SyntheticCorpus generate_corpus(const ModelParams& params, std::int64_t num_steps, Rng& rng) {
    if (num_steps < 1) throw std::invalid_argument("generate_corpus: num_steps must be >= 1");
    if (params.p_syn < 0.0 || params.p_syn > 1.0)
        throw std::invalid_argument("generate_corpus: p_syn must be in [0,1]");
    if (params.sentence_steps < 1)
        throw std::invalid_argument("generate_corpus: sentence_steps must be >= 1");
    const int n = params.n();
    const int d = params.d();
    if (params.tensor.rank() > 0 && params.tensor.dim != d)
        throw std::invalid_argument("generate_corpus: tensor dim != embedding dim");

    // Rank tables reused across steps: logits for all words are
    // base + VB * beta with beta an R-vector per (root, c).
    const bool with_tensor = params.tensor.rank() > 0;
    Matrix va_t, vb_t; // n x R
    if (with_tensor) {
        va_t = params.embeddings.vectors * params.tensor.factor_a.transpose();
        vb_t = params.embeddings.vectors * params.tensor.factor_b.transpose();
    }

    SyntheticCorpus corpus;
    corpus.vocab_size = static_cast<std::uint32_t>(n);

    DiscourseState state{sample_unit_sphere(d, rng)};
    IdSentence sentence;
    std::vector<SyntacticPair> sentence_pairs;
    int steps_in_sentence = 0;

    Eigen::VectorXd logits(n);
    auto flush_sentence = [&]() {
        if (sentence.ids.empty()) return;
        corpus.sentences.push_back(std::move(sentence));
        corpus.pairs_per_sentence.push_back(std::move(sentence_pairs));
        sentence = IdSentence{};
        sentence_pairs.clear();
        steps_in_sentence = 0;
    };

    for (std::int64_t step = 0; step < num_steps; ++step) {
        state = walk_step(state, params.eps_w, rng);
        const bool pair_step = rng.bernoulli(params.p_syn);
        const Eigen::VectorXd base = params.embeddings.vectors * state.c;

        if (!pair_step) {
            logits = base;
            const std::uint32_t w = softmax_sample(logits, rng);
            sentence.ids.push_back(static_cast<std::int32_t>(w));
        } else {
            logits = base;
            const std::uint32_t root = softmax_sample(logits, rng);
            logits = base;
            if (with_tensor) {
                const Eigen::VectorXd beta =
                    params.tensor.weights
                        .cwiseProduct(va_t.row(root).transpose())
                        .cwiseProduct(params.tensor.factor_c * state.c);
                logits += vb_t * beta;
            }
            const std::uint32_t dep = softmax_sample(logits, rng);

            // dependent token first, root second (adjective before noun,
            // verb before object); windows anchor at the root position
            const int dep_pos = static_cast<int>(sentence.ids.size());
            sentence.ids.push_back(static_cast<std::int32_t>(dep));
            sentence.ids.push_back(static_cast<std::int32_t>(root));
            SyntacticPair p;
            p.root_id = root;
            p.dep_id = dep;
            p.root_pos = dep_pos + 1;
            p.dep_pos = dep_pos;
            p.relation = params.relation;
            sentence_pairs.push_back(p);
        }
        if (++steps_in_sentence >= params.sentence_steps) flush_sentence();
    }
    flush_sentence();
    return corpus;
}

void write_corpus(const std::string& path, const SyntheticCorpus& corpus) {
    atomic_write(path, [&](std::ostream& out) {
        for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
            const IdSentence& sent = corpus.sentences[s];
            // position -> (head, deprel) for gold pair tokens
            std::vector<int> head(sent.ids.size(), 0);
            std::vector<const char*> deprel(sent.ids.size(), "root");
            for (const SyntacticPair& p : corpus.pairs_per_sentence[s]) {
                if (p.relation == Relation::AdjNoun) {
                    // adjective depends on the noun (the root word)
                    head[p.dep_pos] = p.root_pos + 1;
                    deprel[p.dep_pos] = "amod";
                } else {
                    // object (the root word) depends on the verb
                    head[p.root_pos] = p.dep_pos + 1;
                    deprel[p.root_pos] = "dobj";
                }
            }
            for (std::size_t i = 0; i < sent.ids.size(); ++i) {
                out << SyntheticCorpus::word_name(static_cast<std::uint32_t>(sent.ids[i])) << '\t'
                    << head[i] << '\t' << deprel[i] << '\n';
            }
            out << '\n';
        }
    });
}

void write_gold_pairs(const std::string& path, const SyntheticCorpus& corpus) {
    atomic_write(path, [&](std::ostream& out) {
        for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
            for (const SyntacticPair& p : corpus.pairs_per_sentence[s]) {
                out << s << '\t' << p.root_pos << '\t' << p.dep_pos << '\t'
                    << relation_name(p.relation) << '\n';
            }
        }
    });
}

} // namespace syntens
