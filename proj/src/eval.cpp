#include "syntens/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "syntens/errors.hpp"
#include "syntens/io_util.hpp"

namespace syntens {

// ---------------------------------------------------------------------------
// Correlations

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("pearson: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw UndefinedValueError("pearson: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("spearman: need at least 2 points");
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    return pearson(rx, ry);
}

// ---------------------------------------------------------------------------
// Dataset

PhraseSimDataset PhraseSimDataset::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    PhraseSimDataset ds;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        PhraseRecord rec;
        std::string rating_s, type_s;
        if (!std::getline(ss, rec.subject, '\t') || !std::getline(ss, rec.words[0], '\t') ||
            !std::getline(ss, rec.words[1], '\t') || !std::getline(ss, rec.words[2], '\t') ||
            !std::getline(ss, rec.words[3], '\t') || !std::getline(ss, rating_s, '\t') ||
            !std::getline(ss, type_s, '\t')) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected subject, 4 words, rating, type");
        }
        try {
            rec.rating = std::stod(rating_s);
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad rating '" + rating_s + "'");
        }
        if (!std::isfinite(rec.rating))
            throw DataError(path + ":" + std::to_string(lineno) + ": non-finite rating");
        rec.type = relation_from_name(type_s);
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

void PhraseSimDataset::save(const std::string& path) const {
    atomic_write(path, [&](std::ostream& out) {
        for (const PhraseRecord& r : records) {
            out << r.subject << '\t' << r.words[0] << '\t' << r.words[1] << '\t' << r.words[2]
                << '\t' << r.words[3] << '\t' << format_double(r.rating) << '\t'
                << relation_name(r.type) << '\n';
        }
    });
}

std::vector<std::string> PhraseSimDataset::subjects() const {
    std::vector<std::string> subs;
    for (const PhraseRecord& r : records) subs.push_back(r.subject);
    std::sort(subs.begin(), subs.end());
    subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
    return subs;
}

PhraseSimDataset PhraseSimDataset::filter(Relation type) const {
    PhraseSimDataset out;
    for (const PhraseRecord& r : records) {
        if (r.type == type) out.records.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Protocol

std::vector<double> default_weight_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(0.1 * i);
    return grid;
}

namespace {

struct PhraseParts {
    Vector additive;   // v_root + v_dep
    Vector tensor;     // T(v_root, v_dep, .)
    Vector sif;        // om_a v_root + om_b v_dep, common component removed later
    Vector root, dep;
    double om_a = 0.0, om_b = 0.0;
};

struct ResolvedRecord {
    std::size_t subject_idx;
    std::size_t phrase1, phrase2; // indices into the phrase-part table
    double rating;
};

/// Cosine of u and v; 0 when either is the zero vector.
double cosine(const Vector& u, const Vector& v) {
    const double nu = u.norm(), nv = v.norm();
    if (nu <= 0.0 || nv <= 0.0) return 0.0;
    return u.dot(v) / (nu * nv);
}

bool family_has_weight(CompositionKind k) {
    return k == CompositionKind::WeightedAdditive || k == CompositionKind::Tensor ||
           k == CompositionKind::SifTensor;
}

Vector composed_from_parts(const PhraseParts& p, const CompositionMethod& family, double weight) {
    switch (family.kind) {
        case CompositionKind::Additive:
            return p.additive;
        case CompositionKind::WeightedAdditive:
            return family.weight_root ? Vector(weight * p.root + p.dep)
                                      : Vector(p.root + weight * p.dep);
        case CompositionKind::Tensor:
            return p.additive + weight * p.tensor;
        case CompositionKind::Sif:
            return p.sif;
        case CompositionKind::SifTensor:
            return p.sif + weight * p.om_a * p.om_b * p.tensor;
    }
    throw std::invalid_argument("evaluate: unknown composition family");
}

} // namespace

EvalResult evaluate(const PhraseSimDataset& dataset, const EmbeddingMatrix& emb,
                    const CpTensor* tensor, const Vocabulary& vocab,
                    const CompositionMethod& family, const FoldSpec& folds,
                    const std::vector<double>& grid) {
    if (folds.num_folds < 2) throw std::invalid_argument("evaluate: need at least 2 folds");
    if (grid.empty()) throw std::invalid_argument("evaluate: empty weight grid");
    const bool needs_tensor =
        family.kind == CompositionKind::Tensor || family.kind == CompositionKind::SifTensor;
    if (needs_tensor && tensor == nullptr)
        throw std::invalid_argument("evaluate: family needs a composition tensor");

    // subject index
    const std::vector<std::string> subs = dataset.subjects();
    std::map<std::string, std::size_t> sub_idx;
    for (std::size_t i = 0; i < subs.size(); ++i) sub_idx[subs[i]] = i;

    // resolve records; build the unique-phrase table
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> phrase_idx;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> phrases;
    std::vector<ResolvedRecord> rows;
    std::size_t skipped = 0;
    auto resolve_phrase = [&](const std::string& root, const std::string& dep,
                              std::size_t& out) -> bool {
        const std::int64_t a = vocab.lookup_form(root);
        const std::int64_t b = vocab.lookup_form(dep);
        if (a < 0 || b < 0) return false;
        const auto key = std::make_pair(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
        auto it = phrase_idx.find(key);
        if (it == phrase_idx.end()) {
            it = phrase_idx.emplace(key, phrases.size()).first;
            phrases.push_back(key);
        }
        out = it->second;
        return true;
    };
    for (const PhraseRecord& rec : dataset.records) {
        ResolvedRecord row;
        row.subject_idx = sub_idx.at(rec.subject);
        row.rating = rec.rating;
        if (!resolve_phrase(rec.words[0], rec.words[1], row.phrase1) ||
            !resolve_phrase(rec.words[2], rec.words[3], row.phrase2)) {
            ++skipped;
            continue;
        }
        rows.push_back(row);
    }
    if (rows.empty())
        throw InsufficientDataError("evaluate: every record was skipped (out-of-vocabulary)");

    // phrase parts; the tensor part is weight-independent so the grid reuses it
    const bool needs_sif =
        family.kind == CompositionKind::Sif || family.kind == CompositionKind::SifTensor;
    std::vector<PhraseParts> parts(phrases.size());
    for (std::size_t i = 0; i < phrases.size(); ++i) {
        const auto [a, b] = phrases[i];
        PhraseParts& p = parts[i];
        p.root = emb.row(a);
        p.dep = emb.row(b);
        p.additive = p.root + p.dep;
        p.tensor = (tensor != nullptr && tensor->rank() > 0) ? contract_two(*tensor, p.root, p.dep)
                                                             : Vector::Zero(emb.d());
        if (needs_sif) {
            p.om_a = sif_weight(a, vocab, family.sif_a);
            p.om_b = sif_weight(b, vocab, family.sif_a);
            p.sif = p.om_a * p.root + p.om_b * p.dep;
        }
    }
    if (needs_sif && !parts.empty()) {
        std::vector<Vector> batch;
        batch.reserve(parts.size());
        for (const PhraseParts& p : parts) batch.push_back(p.sif);
        const Vector dir = fit_common_direction(batch);
        for (PhraseParts& p : parts) remove_component(p.sif, dir);
    }

    // similarity per (grid weight, row)
    const std::vector<double> weights = family_has_weight(family.kind)
                                            ? grid
                                            : std::vector<double>{0.0};
    std::vector<std::vector<double>> sims(weights.size());
    {
        std::vector<Vector> composed(phrases.size());
        for (std::size_t wi = 0; wi < weights.size(); ++wi) {
            for (std::size_t i = 0; i < phrases.size(); ++i)
                composed[i] = composed_from_parts(parts[i], family, weights[wi]);
            sims[wi].reserve(rows.size());
            for (const ResolvedRecord& row : rows)
                sims[wi].push_back(cosine(composed[row.phrase1], composed[row.phrase2]));
        }
    }

    // fold boundaries over sorted subjects, sizes as equal as possible
    const std::size_t ns = subs.size();
    const int nf = folds.num_folds;
    if (ns < static_cast<std::size_t>(nf))
        throw InsufficientDataError("evaluate: fewer subjects than folds");
    std::vector<int> fold_of(ns);
    for (int f = 0; f < nf; ++f) {
        const std::size_t lo = ns * static_cast<std::size_t>(f) / static_cast<std::size_t>(nf);
        const std::size_t hi = ns * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(nf);
        for (std::size_t s = lo; s < hi; ++s) fold_of[s] = f;
    }

    // correlation of sims vs ratings over a row subset, optionally averaging
    // ratings per phrase pair first
    auto correlate = [&](const std::vector<std::size_t>& row_ids, std::size_t wi,
                         bool use_spearman) -> double {
        std::vector<double> xs, ys;
        if (!folds.subject_average) {
            xs.reserve(row_ids.size());
            ys.reserve(row_ids.size());
            for (const std::size_t r : row_ids) {
                xs.push_back(sims[wi][r]);
                ys.push_back(rows[r].rating);
            }
        } else {
            std::map<std::pair<std::size_t, std::size_t>, std::pair<double, int>> by_pair;
            for (const std::size_t r : row_ids) {
                auto& acc = by_pair[{rows[r].phrase1, rows[r].phrase2}];
                acc.first += rows[r].rating;
                acc.second += 1;
            }
            for (const auto& [key, acc] : by_pair) {
                // any row with this pair has the same sim value
                for (const std::size_t r : row_ids) {
                    if (rows[r].phrase1 == key.first && rows[r].phrase2 == key.second) {
                        xs.push_back(sims[wi][r]);
                        break;
                    }
                }
                ys.push_back(acc.first / acc.second);
            }
        }
        return use_spearman ? spearman(xs, ys) : pearson(xs, ys);
    };

    EvalResult result;
    result.used_records = rows.size();
    result.skipped_records = skipped;

    double sum_sp = 0.0, sum_pe = 0.0, sum_w = 0.0;
    for (int rot = 0; rot < nf; ++rot) {
        std::vector<std::size_t> dev_rows, test_rows;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const int f = fold_of[rows[r].subject_idx];
            (f == rot ? dev_rows : test_rows).push_back(r);
        }
        if (dev_rows.empty() || test_rows.empty())
            throw InsufficientDataError("evaluate: a fold has no usable rows");
        const std::vector<std::size_t>& select_rows = folds.cheat ? test_rows : dev_rows;

        std::size_t best_wi = 0;
        if (weights.size() > 1) {
            double best = -2.0;
            for (std::size_t wi = 0; wi < weights.size(); ++wi) {
                double score;
                try {
                    score = correlate(select_rows, wi, /*use_spearman=*/true);
                } catch (const UndefinedValueError&) {
                    continue; // degenerate similarity column, never optimal
                }
                if (score > best) { // strict: ties keep the smaller weight
                    best = score;
                    best_wi = wi;
                }
            }
        }

        EvalResult::Fold fold;
        fold.dev_fold = rot;
        fold.weight = weights[best_wi];
        fold.test_spearman = correlate(test_rows, best_wi, true);
        fold.test_pearson = correlate(test_rows, best_wi, false);
        result.per_fold.push_back(fold);
        sum_sp += fold.test_spearman;
        sum_pe += fold.test_pearson;
        sum_w += fold.weight;
    }
    result.spearman = sum_sp / nf;
    result.pearson = sum_pe / nf;
    result.chosen_weight = sum_w / nf;
    return result;
}

std::string EvalResult::to_json() const {
    nlohmann::json j;
    j["spearman"] = spearman;
    j["pearson"] = pearson;
    j["chosen_weight"] = chosen_weight;
    j["used_records"] = used_records;
    j["skipped_records"] = skipped_records;
    for (const Fold& f : per_fold) {
        j["per_fold"].push_back({{"dev_fold", f.dev_fold},
                                 {"weight", f.weight},
                                 {"test_spearman", f.test_spearman},
                                 {"test_pearson", f.test_pearson}});
    }
    return j.dump(2);
}

} // namespace syntens
