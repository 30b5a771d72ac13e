#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "syntens/counts.hpp"
#include "syntens/embedding.hpp"
#include "syntens/linalg.hpp"
#include "syntens/rng.hpp"
#include "syntens/vocab.hpp"

namespace syntens {

/// log of Z_c = sum_w exp(<v_w, c>), max-stabilized. Always finite.
double log_partition(const Vector& c, const EmbeddingMatrix& emb);

/// Z_c itself. Throws NumericError when the value exceeds the double range;
/// use log_partition for such regimes.
double partition(const Vector& c, const EmbeddingMatrix& emb);

/// log of Z_{c,a} = sum_w exp(<v_w, c> + T(v_a, v_w, c)). The tensor term for
/// all words at once reduces to one extra matrix-vector product, so the cost
/// stays O(nd + Rd).
double log_partition_syntactic(const Vector& c, std::uint32_t a, const EmbeddingMatrix& emb,
                               const CpTensor& tensor);
double partition_syntactic(const Vector& c, std::uint32_t a, const EmbeddingMatrix& emb,
                           const CpTensor& tensor);

/// Monte Carlo concentration summary of a partition function over uniformly
/// sampled discourse vectors. The histogram buckets value/mean into 40 bins on
/// [0.5, 1.5] plus an underflow and an overflow bin at the ends.
struct ConcentrationReport {
    double mean = 0.0;             // may overflow to inf for extreme scales; see log_mean
    double log_mean = 0.0;
    double coeff_variation = 0.0;
    int num_samples = 0;
    std::optional<std::uint32_t> word; // set when reporting Z_{c,a}

    static constexpr int kBuckets = 40;
    static constexpr double kLo = 0.5, kHi = 1.5;
    std::vector<std::int64_t> histogram; // kBuckets + 2: [underflow, bins..., overflow]

    std::string to_json() const;
    void save_histogram_tsv(const std::string& path) const;
};

/// Samples num_samples unit vectors; reports Z_c, or Z_{c,a} when `a` is set
/// (a set requires a tensor).
ConcentrationReport concentration_report(const EmbeddingMatrix& emb, const CpTensor* tensor,
                                         std::optional<std::uint32_t> a, int num_samples,
                                         Rng& rng);

/// Slice-operator norm statistics over a list of (root, dep) pairs:
///   spectral:  |T(v_a,.,.) + I|^2   / d
///   frobenius: |T(v_a,.,.) + I|_F^2 / d
///   vec:       |T(v_a,v_b,.)|^2     / d
/// K is inferred as the smallest integer covering the Frobenius and vector
/// maxima; eps as sqrt(spectral_max / K), log factors ignored.
struct BoundednessReport {
    struct Stat {
        double mean = 0.0;
        double max = 0.0;
    };
    Stat spectral, frobenius, vec;
    double inferred_k = 0.0;
    double inferred_eps = 0.0;
    std::size_t num_pairs = 0;

    std::string to_json() const;
};

BoundednessReport boundedness_report(const CpTensor& tensor, const EmbeddingMatrix& emb,
                                     std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs);

/// Unigram occurrence counts with their total, the plug-in source for p(w).
struct UnigramCounts {
    std::vector<double> counts;
    double total = 0.0;

    static UnigramCounts from_vocab(const Vocabulary& vocab);
    static UnigramCounts from_counts(std::vector<double> counts);

    double prob(std::uint32_t w) const { return counts[w] / total; }
};

/// log( p(w,a) / (p(w) p(a)) ) with all probabilities read off the symmetric
/// expansion of the canonical pair table. Throws UndefinedValueError when any
/// involved count is zero.
double pmi2(const PairCounts& counts, std::uint32_t a, std::uint32_t w);

/// Three-way pointwise mutual information
///   log[ p(w,[a,b]) p(a) p(b) p(w) / ( p(w,a) p(w,b) p([a,b]) ) ]
/// with each probability estimated from its own table: triples for the
/// bracketed events, window pairs for p(w,a) and p(w,b), unigrams for the
/// singletons. Invariant under separate rescaling of any table.
class Pmi3Context {
public:
    Pmi3Context(const PairCounts& pairs, const TripleCounts& triples,
                const UnigramCounts& unigrams);

    std::optional<double> try_pmi3(std::uint32_t a, std::uint32_t b, std::uint32_t w) const;

private:
    const PairCounts& pairs_;
    const TripleCounts& triples_;
    const UnigramCounts& unigrams_;
    double pair_grand_total_; // symmetric-expansion mass of the pair table
};

double pmi3(const PairCounts& pairs, const TripleCounts& triples, const UnigramCounts& unigrams,
            std::uint32_t a, std::uint32_t b, std::uint32_t w);

/// Compares empirical PMI3 against the model prediction T(v_a, v_b, v_w) / d
/// over every triple with count >= min_count and defined PMI3.
struct TuckerResidual {
    double pearson_r = 0.0;
    double rmse = 0.0;
    std::size_t num_triples = 0;

    std::string to_json() const;
};

TuckerResidual tucker_residual_check(const CpTensor& tensor, const EmbeddingMatrix& emb,
                                     const TripleCounts& triples, const PairCounts& pairs,
                                     const UnigramCounts& unigrams, double min_count);

} // namespace syntens
