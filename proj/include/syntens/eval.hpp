#pragma once

#include <array>
#include <string>
#include <vector>

#include "syntens/compose.hpp"
#include "syntens/conll.hpp"
#include "syntens/correlation.hpp"
#include "syntens/embedding.hpp"

namespace syntens {

/// One human judgment row: a subject rated the similarity of two phrases.
/// Each phrase lists its root word first (noun for adjective-noun phrases,
/// object for verb-object phrases), matching compose()'s argument order.
struct PhraseRecord {
    std::string subject;
    std::array<std::string, 4> words; // root1 dep1 root2 dep2
    double rating = 0.0;
    Relation type = Relation::AdjNoun;
};

struct PhraseSimDataset {
    std::vector<PhraseRecord> records;

    /// TSV: subject<TAB>root1<TAB>dep1<TAB>root2<TAB>dep2<TAB>rating<TAB>an|vo
    static PhraseSimDataset load(const std::string& path);
    void save(const std::string& path) const;

    /// Sorted unique subject labels.
    std::vector<std::string> subjects() const;

    /// Records of one phrase type only.
    PhraseSimDataset filter(Relation type) const;
};

struct FoldSpec {
    int num_folds = 3;
    bool cheat = false;           // select the weight on the test rows (upper bound)
    bool subject_average = false; // correlate per-phrase mean ratings instead of raw rows
};

struct EvalResult {
    double spearman = 0.0; // averages over rotations
    double pearson = 0.0;
    double chosen_weight = 0.0; // mean of per-rotation choices

    struct Fold {
        int dev_fold = 0;
        double weight = 0.0;
        double test_spearman = 0.0;
        double test_pearson = 0.0;
    };
    std::vector<Fold> per_fold;

    std::size_t used_records = 0;
    std::size_t skipped_records = 0; // out-of-vocabulary phrases

    std::string to_json() const;
};

/// Grid of candidate weights for the tunable composition families; always
/// contains 0 so a tensor family can fall back to plain addition.
std::vector<double> default_weight_grid();

/// Fold-rotated protocol: subjects split into `num_folds` groups (sizes as
/// equal as possible, subjects in sorted order); each rotation selects the
/// family's weight on the dev fold by Spearman and scores on the remaining
/// folds; reported correlations are the averages across rotations. Similarity
/// of a phrase pair is the cosine of the composed vectors.
EvalResult evaluate(const PhraseSimDataset& dataset, const EmbeddingMatrix& emb,
                    const CpTensor* tensor, const Vocabulary& vocab,
                    const CompositionMethod& family, const FoldSpec& folds = {},
                    const std::vector<double>& grid = default_weight_grid());

} // namespace syntens
