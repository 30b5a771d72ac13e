#include "syntens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "syntens/correlation.hpp"
#include "syntens/errors.hpp"
#include "syntens/io_util.hpp"

namespace syntens {

namespace {

double log_sum_exp(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) s += std::exp(logits[i] - m);
    return m + std::log(s);
}

void check_unit(const Vector& c, const char* who) {
    if (std::abs(c.norm() - 1.0) > 1e-6)
        throw std::invalid_argument(std::string(who) + ": discourse vector must be unit norm");
}

} // namespace

double log_partition(const Vector& c, const EmbeddingMatrix& emb) {
    if (c.size() != emb.d()) throw std::invalid_argument("partition: dimension mismatch");
    check_unit(c, "partition");
    const Eigen::VectorXd logits = emb.vectors * c;
    return log_sum_exp(logits);
}

double partition(const Vector& c, const EmbeddingMatrix& emb) {
    const double lz = log_partition(c, emb);
    if (lz >= std::log(std::numeric_limits<double>::max())) {
        throw NumericError("partition value exceeds double range; use log_partition");
    }
    return std::exp(lz);
}

double log_partition_syntactic(const Vector& c, std::uint32_t a, const EmbeddingMatrix& emb,
                               const CpTensor& tensor) {
    if (c.size() != emb.d()) throw std::invalid_argument("partition_syntactic: dimension mismatch");
    if (a >= static_cast<std::uint32_t>(emb.n()))
        throw std::invalid_argument("partition_syntactic: word id out of range");
    check_unit(c, "partition_syntactic");
    // T(v_a, v_w, c) = <v_w, m> with m = sum_r weights_r <a_r,v_a> <c_r,c> b_r
    Vector shifted = c;
    if (tensor.rank() > 0) {
        if (tensor.dim != emb.d())
            throw std::invalid_argument("partition_syntactic: tensor dim mismatch");
        const Eigen::VectorXd coeff = tensor.weights
                                          .cwiseProduct(tensor.factor_a * emb.row(a))
                                          .cwiseProduct(tensor.factor_c * c);
        shifted += tensor.factor_b.transpose() * coeff;
    }
    const Eigen::VectorXd logits = emb.vectors * shifted;
    return log_sum_exp(logits);
}

double partition_syntactic(const Vector& c, std::uint32_t a, const EmbeddingMatrix& emb,
                           const CpTensor& tensor) {
    const double lz = log_partition_syntactic(c, a, emb, tensor);
    if (lz >= std::log(std::numeric_limits<double>::max())) {
        throw NumericError("partition value exceeds double range; use log_partition_syntactic");
    }
    return std::exp(lz);
}

ConcentrationReport concentration_report(const EmbeddingMatrix& emb, const CpTensor* tensor,
                                         std::optional<std::uint32_t> a, int num_samples,
                                         Rng& rng) {
    if (num_samples < 2)
        throw std::invalid_argument("concentration_report: need at least 2 samples");
    if (a.has_value() && tensor == nullptr)
        throw std::invalid_argument("concentration_report: word given but no tensor");

    std::vector<double> logs(static_cast<std::size_t>(num_samples));
    for (int s = 0; s < num_samples; ++s) {
        const Vector c = sample_unit_sphere(emb.d(), rng);
        logs[static_cast<std::size_t>(s)] =
            a.has_value() ? log_partition_syntactic(c, *a, emb, *tensor) : log_partition(c, emb);
    }

    // work on values shifted by the max log; coefficient of variation and the
    // value/mean histogram are scale-free
    const double shift = *std::max_element(logs.begin(), logs.end());
    std::vector<double> vals(logs.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        vals[i] = std::exp(logs[i] - shift);
        sum += vals[i];
    }
    const double mean_shifted = sum / static_cast<double>(num_samples);
    double ss = 0.0;
    for (const double v : vals) ss += (v - mean_shifted) * (v - mean_shifted);
    const double sd = std::sqrt(ss / static_cast<double>(num_samples - 1));

    ConcentrationReport rep;
    rep.num_samples = num_samples;
    rep.word = a;
    rep.log_mean = shift + std::log(mean_shifted);
    rep.mean = std::exp(rep.log_mean); // inf for extreme scales; log_mean stays exact
    rep.coeff_variation = sd / mean_shifted;
    rep.histogram.assign(ConcentrationReport::kBuckets + 2, 0);
    const double width =
        (ConcentrationReport::kHi - ConcentrationReport::kLo) / ConcentrationReport::kBuckets;
    for (const double v : vals) {
        const double ratio = v / mean_shifted;
        int bin;
        if (ratio < ConcentrationReport::kLo) {
            bin = 0;
        } else if (ratio >= ConcentrationReport::kHi) {
            bin = ConcentrationReport::kBuckets + 1;
        } else {
            bin = 1 + static_cast<int>((ratio - ConcentrationReport::kLo) / width);
            bin = std::min(bin, ConcentrationReport::kBuckets);
        }
        ++rep.histogram[static_cast<std::size_t>(bin)];
    }
    return rep;
}

std::string ConcentrationReport::to_json() const {
    nlohmann::json j;
    j["mean"] = mean;
    j["log_mean"] = log_mean;
    j["coeff_variation"] = coeff_variation;
    j["num_samples"] = num_samples;
    if (word.has_value()) j["word_id"] = *word;
    j["histogram"]["lo"] = kLo;
    j["histogram"]["hi"] = kHi;
    j["histogram"]["buckets"] = kBuckets;
    j["histogram"]["counts"] = histogram;
    return j.dump(2);
}

void ConcentrationReport::save_histogram_tsv(const std::string& path) const {
    const double width = (kHi - kLo) / kBuckets;
    atomic_write(path, [&](std::ostream& out) {
        out << "bucket_lo\tbucket_hi\tcount\n";
        out << "-inf\t" << kLo << '\t' << histogram.front() << '\n';
        for (int b = 0; b < kBuckets; ++b) {
            out << format_double(kLo + b * width) << '\t' << format_double(kLo + (b + 1) * width)
                << '\t' << histogram[static_cast<std::size_t>(b + 1)] << '\n';
        }
        out << kHi << "\t+inf\t" << histogram.back() << '\n';
    });
}

BoundednessReport boundedness_report(const CpTensor& tensor, const EmbeddingMatrix& emb,
                                     std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs) {
    if (pairs.empty()) throw std::invalid_argument("boundedness_report: empty pair list");
    const double d = static_cast<double>(tensor.dim);
    const SliceNormCache cache(tensor);

    BoundednessReport rep;
    rep.num_pairs = pairs.size();
    auto fold = [](BoundednessReport::Stat& s, double v) {
        s.mean += v;
        s.max = std::max(s.max, v);
    };
    for (const auto& [a, b] : pairs) {
        const Vector va = emb.row(a);
        const Vector vb = emb.row(b);
        const SpectralEstimate spec = slice_spectral_norm(tensor, va, /*add_identity=*/true);
        fold(rep.spectral, spec.value * spec.value / d);
        const Eigen::VectorXd alpha =
            tensor.rank() == 0 ? Eigen::VectorXd(0)
                               : Eigen::VectorXd(tensor.weights.cwiseProduct(tensor.factor_a * va));
        fold(rep.frobenius, cache.frobenius_sq(alpha, 1.0, tensor.dim) / d);
        fold(rep.vec, contract_two(tensor, va, vb).squaredNorm() / d);
    }
    const double inv = 1.0 / static_cast<double>(pairs.size());
    rep.spectral.mean *= inv;
    rep.frobenius.mean *= inv;
    rep.vec.mean *= inv;

    // smallest integer bound covering the Frobenius and vector maxima; the
    // spectral statistic then determines eps ignoring log factors
    rep.inferred_k = std::max(1.0, std::ceil(std::max(rep.frobenius.max, rep.vec.max)));
    rep.inferred_eps = std::sqrt(rep.spectral.max / rep.inferred_k);
    return rep;
}

std::string BoundednessReport::to_json() const {
    nlohmann::json j;
    auto stat = [](const Stat& s) {
        return nlohmann::json{{"mean", s.mean}, {"max", s.max}};
    };
    j["spectral_sq_over_d"] = stat(spectral);
    j["frobenius_sq_over_d"] = stat(frobenius);
    j["vector_sq_over_d"] = stat(vec);
    j["inferred_k"] = inferred_k;
    j["inferred_eps"] = inferred_eps;
    j["num_pairs"] = num_pairs;
    return j.dump(2);
}

UnigramCounts UnigramCounts::from_vocab(const Vocabulary& vocab) {
    UnigramCounts u;
    u.counts.reserve(vocab.size());
    for (const std::int64_t c : vocab.count) {
        u.counts.push_back(static_cast<double>(c));
        u.total += static_cast<double>(c);
    }
    return u;
}

UnigramCounts UnigramCounts::from_counts(std::vector<double> counts) {
    UnigramCounts u;
    u.counts = std::move(counts);
    for (const double c : u.counts) u.total += c;
    return u;
}

double pmi2(const PairCounts& counts, std::uint32_t a, std::uint32_t w) {
    const double joint = counts.get(a, w);
    if (joint <= 0.0) throw UndefinedValueError("pmi2: zero joint count");
    // symmetric-expansion marginals: the canonical table unfolds to the full
    // symmetric matrix, off-diagonal cells appearing twice in the grand total
    double m_a = 0.0, m_w = 0.0, grand = 0.0;
    counts.cells.for_each([&](std::uint64_t key, double c) {
        const auto [i, j] = unpack_pair(key);
        grand += (i == j) ? c : 2.0 * c;
        if (i == a || j == a) m_a += c;
        if (i == w || j == w) m_w += c;
    });
    if (m_a <= 0.0 || m_w <= 0.0) throw UndefinedValueError("pmi2: zero marginal count");
    return std::log(joint * grand / (m_a * m_w));
}

Pmi3Context::Pmi3Context(const PairCounts& pairs, const TripleCounts& triples,
                         const UnigramCounts& unigrams)
    : pairs_(pairs), triples_(triples), unigrams_(unigrams) {
    double grand = 0.0;
    pairs_.cells.for_each([&](std::uint64_t key, double c) {
        const auto [i, j] = unpack_pair(key);
        grand += (i == j) ? c : 2.0 * c;
    });
    pair_grand_total_ = grand;
}

std::optional<double> Pmi3Context::try_pmi3(std::uint32_t a, std::uint32_t b,
                                            std::uint32_t w) const {
    const double t_abw = triples_.get(a, b, w);
    const double t_ab = triples_.pair_total(a, b);
    const double x_wa = pairs_.get(w, a);
    const double x_wb = pairs_.get(w, b);
    if (a >= unigrams_.counts.size() || b >= unigrams_.counts.size() ||
        w >= unigrams_.counts.size())
        return std::nullopt;
    const double u_a = unigrams_.counts[a];
    const double u_b = unigrams_.counts[b];
    const double u_w = unigrams_.counts[w];
    if (t_abw <= 0.0 || t_ab <= 0.0 || x_wa <= 0.0 || x_wb <= 0.0 || u_a <= 0.0 || u_b <= 0.0 ||
        u_w <= 0.0)
        return std::nullopt;
    if (triples_.total <= 0.0 || pair_grand_total_ <= 0.0 || unigrams_.total <= 0.0)
        return std::nullopt;

    const double log_p_wab = std::log(t_abw / triples_.total);
    const double log_p_ab = std::log(t_ab / triples_.total);
    const double log_p_wa = std::log(x_wa / pair_grand_total_);
    const double log_p_wb = std::log(x_wb / pair_grand_total_);
    const double log_u_a = std::log(u_a / unigrams_.total);
    const double log_u_b = std::log(u_b / unigrams_.total);
    const double log_u_w = std::log(u_w / unigrams_.total);
    return log_p_wab + log_u_a + log_u_b + log_u_w - log_p_wa - log_p_wb - log_p_ab;
}

double pmi3(const PairCounts& pairs, const TripleCounts& triples, const UnigramCounts& unigrams,
            std::uint32_t a, std::uint32_t b, std::uint32_t w) {
    const Pmi3Context ctx(pairs, triples, unigrams);
    const auto v = ctx.try_pmi3(a, b, w);
    if (!v.has_value()) throw UndefinedValueError("pmi3: a defining count is zero");
    return *v;
}

TuckerResidual tucker_residual_check(const CpTensor& tensor, const EmbeddingMatrix& emb,
                                     const TripleCounts& triples, const PairCounts& pairs,
                                     const UnigramCounts& unigrams, double min_count) {
    if (min_count < 1.0)
        throw std::invalid_argument("tucker_residual_check: min_count must be >= 1");
    const Pmi3Context ctx(pairs, triples, unigrams);
    const double d = static_cast<double>(tensor.dim);

    std::vector<std::uint64_t> eligible;
    triples.cells.for_each([&](std::uint64_t key, double c) {
        if (c >= min_count) eligible.push_back(key);
    });
    std::sort(eligible.begin(), eligible.end());

    std::vector<double> empirical, predicted;
    empirical.reserve(eligible.size());
    predicted.reserve(eligible.size());
    for (const std::uint64_t key : eligible) {
        const auto [a, b, w] = unpack_triple(key);
        const auto emp = ctx.try_pmi3(a, b, w);
        if (!emp.has_value()) continue;
        empirical.push_back(*emp);
        predicted.push_back(trilinear_apply(tensor, emb.row(a), emb.row(b), emb.row(w)) / d);
    }

    if (empirical.size() < 3) {
        throw InsufficientDataError("tucker_residual_check: fewer than 3 eligible triples (got " +
                                    std::to_string(empirical.size()) + ")");
    }
    TuckerResidual out;
    out.num_triples = empirical.size();
    double se = 0.0;
    for (std::size_t i = 0; i < empirical.size(); ++i) {
        const double diff = empirical[i] - predicted[i];
        se += diff * diff;
    }
    out.rmse = std::sqrt(se / static_cast<double>(empirical.size()));
    try {
        out.pearson_r = pearson(empirical, predicted);
    } catch (const UndefinedValueError&) {
        out.pearson_r = 0.0; // a constant side (e.g. T = 0) carries no correlation
    }
    return out;
}

std::string TuckerResidual::to_json() const {
    nlohmann::json j;
    j["pearson_r"] = pearson_r;
    j["rmse"] = rmse;
    j["num_triples"] = num_triples;
    return j.dump(2);
}

} // namespace syntens
