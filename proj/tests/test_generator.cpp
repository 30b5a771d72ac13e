#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "syntens/conll.hpp"
#include "syntens/generator.hpp"
#include "syntens/vocab.hpp"
#include "test_util.hpp"

using namespace syntens;
using namespace testutil;

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
    return p / p.sum();
}

} // namespace

TEST_CASE("init_embeddings degenerate scaling kappa=tau=1") {
    Rng rng(1);
    const EmbeddingMatrix emb = init_embeddings(10000, 8, 1.0, 1.0, rng);
    // s == 1, so mean |v|^2/d of standard Gaussians concentrates at 1
    double acc = 0.0;
    for (int i = 0; i < emb.n(); ++i) acc += emb.vectors.row(i).squaredNorm() / emb.d();
    acc /= emb.n();
    CHECK(std::abs(acc - 1.0) < 0.05);
}

TEST_CASE("init_embeddings determinism and argument errors") {
    Rng r1(5), r2(5);
    const EmbeddingMatrix a = init_embeddings(20, 4, 2.0, 1.5, r1);
    const EmbeddingMatrix b = init_embeddings(20, 4, 2.0, 1.5, r2);
    CHECK((a.vectors - b.vectors).norm() == 0.0);

    Rng rng(6);
    CHECK_THROWS_AS(init_embeddings(0, 4, 1.0, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(init_embeddings(4, 0, 1.0, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(init_embeddings(4, 4, 1.0, 2.0, rng), std::invalid_argument); // tau > kappa
}

TEST_CASE("init_embeddings scale stays within the bound") {
    Rng rng(7);
    const double kappa = 2.0, tau = 1.5;
    const EmbeddingMatrix emb = init_embeddings(2000, 6, kappa, tau, rng);
    // each row is s * g; estimate s from |v| only loosely, so instead check
    // the empirical mean scale against tau via |v|^2 = s^2 * chi2_d
    double mean_sq = 0.0;
    for (int i = 0; i < emb.n(); ++i) mean_sq += emb.vectors.row(i).squaredNorm();
    mean_sq /= (emb.n() * emb.d());
    // E[s^2] for uniform on [2tau-kappa, kappa]: (lo^2 + lo*hi + hi^2)/3
    const double lo = 2.0 * tau - kappa;
    const double want = (lo * lo + lo * kappa + kappa * kappa) / 3.0;
    CHECK(std::abs(mean_sq - want) / want < 0.05);
}

TEST_CASE("walk_step frozen at eps_w=0") {
    Rng rng(11);
    const DiscourseState s{sample_unit_sphere(5, rng)};
    const DiscourseState s2 = walk_step(s, 0.0, rng);
    CHECK((s2.c - s.c).norm() == 0.0);
}

TEST_CASE("walk_step obeys the chord bound exactly") {
    Rng rng(13);
    const int d = 7;
    const double eps_w = 1.3;
    const double bound = eps_w / std::sqrt(static_cast<double>(d));
    DiscourseState s{sample_unit_sphere(d, rng)};
    for (int step = 0; step < 100000; ++step) {
        const DiscourseState next = walk_step(s, eps_w, rng);
        CHECK(std::abs(next.c.norm() - 1.0) <= 1e-10);
        CHECK((next.c - s.c).norm() <= bound * (1.0 + 1e-12));
        s = next;
    }
}

TEST_CASE("walk long-run moments match the uniform sphere") {
    Rng rng(17);
    const int d = 3;
    DiscourseState s{sample_unit_sphere(d, rng)};
    const int steps = 1000000;
    Vector mean = Vector::Zero(d);
    Vector mean_sq = Vector::Zero(d);
    for (int t = 0; t < steps; ++t) {
        s = walk_step(s, 2.0, rng);
        mean += s.c;
        mean_sq += s.c.cwiseProduct(s.c);
    }
    mean /= steps;
    mean_sq /= steps;
    for (int i = 0; i < d; ++i) {
        CHECK(std::abs(mean[i]) < 0.02);               // E[x] = 0
        CHECK(std::abs(mean_sq[i] - 1.0 / 3.0) < 0.02); // E[x^2] = 1/d
    }
}

TEST_CASE("emit_word uniform under zero embeddings (chi-square)") {
    Rng rng(19);
    const int n = 10, draws = 100000;
    EmbeddingMatrix emb(n, 4);
    const Vector c = sample_unit_sphere(4, rng);
    std::vector<int> hist(n, 0);
    for (int k = 0; k < draws; ++k) ++hist[emit_word(c, emb, rng)];
    double chi2 = 0.0;
    const double expect = static_cast<double>(draws) / n;
    for (int i = 0; i < n; ++i) {
        const double diff = hist[i] - expect;
        chi2 += diff * diff / expect;
    }
    // chi-square critical value, 9 degrees of freedom, p = 0.001
    CHECK(chi2 < 27.877);
}

TEST_CASE("emit_word two-word ratio 3:1") {
    Rng rng(23);
    const int draws = 100000;
    // d=1, c=(1); v0 = log 3, v1 = 0
    EmbeddingMatrix emb(2, 1);
    emb.vectors(0, 0) = std::log(3.0);
    Vector c(1);
    c[0] = 1.0;
    int zero_count = 0;
    for (int k = 0; k < draws; ++k) zero_count += emit_word(c, emb, rng) == 0 ? 1 : 0;
    const double p = 0.75;
    const double sigma = std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::abs(static_cast<double>(zero_count) / draws - p) < 3.0 * sigma);
}

TEST_CASE("emit_word singleton vocabulary") {
    Rng rng(29);
    EmbeddingMatrix emb(1, 3);
    const Vector c = sample_unit_sphere(3, rng);
    for (int k = 0; k < 5; ++k) CHECK(emit_word(c, emb, rng) == 0);
}

TEST_CASE("emit_pair with zero tensor matches the word distribution") {
    Rng rng(31);
    const int n = 10, d = 4, draws = 100000;
    const EmbeddingMatrix emb = init_embeddings(n, d, 1.0, 1.0, rng);
    const CpTensor zero = CpTensor::zero(d);
    const Vector c = sample_unit_sphere(d, rng);

    const Eigen::VectorXd exact = softmax(emb.vectors * c);
    std::vector<int> dep_hist(n, 0);
    for (int k = 0; k < draws; ++k) ++dep_hist[emit_pair(c, emb, zero, rng).second];
    double tv = 0.0;
    for (int i = 0; i < n; ++i)
        tv += std::abs(static_cast<double>(dep_hist[i]) / draws - exact[i]);
    tv *= 0.5;
    CHECK(tv < 0.01);
}

TEST_CASE("emit_pair rank-1 boost raises the boosted word's conditional frequency") {
    Rng rng(37);
    const int n = 10, d = 4, draws = 200000;
    const EmbeddingMatrix emb = init_embeddings(n, d, 1.0, 1.0, rng);
    const Vector c = sample_unit_sphere(d, rng);
    const std::uint32_t root_star = 2, dep_star = 7;

    // rank-1 tensor aligned with (v_root*, v_dep*, c): a clean positive boost
    CpTensor t = CpTensor::zero(d);
    t.weights = Eigen::VectorXd::Constant(1, 2.0);
    t.factor_a = emb.vectors.row(root_star).normalized();
    t.factor_b = emb.vectors.row(dep_star).normalized();
    t.factor_c = c.transpose();

    const Eigen::VectorXd p0 = softmax(emb.vectors * c);
    int seen_root = 0, seen_boosted = 0;
    for (int k = 0; k < draws; ++k) {
        const auto [root, dep] = emit_pair(c, emb, t, rng);
        if (root == root_star) {
            ++seen_root;
            if (dep == dep_star) ++seen_boosted;
        }
    }
    REQUIRE(seen_root > 1000);
    const double freq = static_cast<double>(seen_boosted) / seen_root;
    const double sigma = std::sqrt(p0[dep_star] * (1.0 - p0[dep_star]) / seen_root);
    CHECK(freq > p0[dep_star] + 4.0 * sigma);
}

TEST_CASE("emit_pair singleton vocabulary") {
    Rng rng(41);
    EmbeddingMatrix emb(1, 2);
    const CpTensor zero = CpTensor::zero(2);
    const Vector c = sample_unit_sphere(2, rng);
    const auto [a, b] = emit_pair(c, emb, zero, rng);
    CHECK(a == 0);
    CHECK(b == 0);
}

TEST_CASE("generate_corpus token and pair accounting") {
    Rng rng(43);
    ModelParams params;
    params.embeddings = init_embeddings(30, 4, 1.0, 1.0, rng);
    params.tensor = CpTensor::zero(4);
    params.eps_w = 1.0;

    SUBCASE("p_syn = 0") {
        params.p_syn = 0.0;
        const SyntheticCorpus c = generate_corpus(params, 1000, rng);
        CHECK(c.num_tokens() == 1000);
        CHECK(c.num_pairs() == 0);
    }
    SUBCASE("p_syn = 1") {
        params.p_syn = 1.0;
        const SyntheticCorpus c = generate_corpus(params, 1000, rng);
        CHECK(c.num_tokens() == 2000);
        CHECK(c.num_pairs() == 1000);
    }
    SUBCASE("p_syn = 0.3 within binomial noise") {
        params.p_syn = 0.3;
        const std::int64_t steps = 100000;
        const SyntheticCorpus c = generate_corpus(params, steps, rng);
        const double frac = static_cast<double>(c.num_pairs()) / steps;
        const double sigma = std::sqrt(0.3 * 0.7 / steps);
        CHECK(std::abs(frac - 0.3) < 3.0 * sigma);
    }
}

TEST_CASE("generate_corpus sentence segmentation") {
    Rng rng(47);
    ModelParams params;
    params.embeddings = init_embeddings(10, 3, 1.0, 1.0, rng);
    params.tensor = CpTensor::zero(3);
    params.p_syn = 0.0;
    params.sentence_steps = 20;
    const SyntheticCorpus c = generate_corpus(params, 95, rng);
    REQUIRE(c.sentences.size() == 5);
    CHECK(c.sentences[0].ids.size() == 20);
    CHECK(c.sentences[4].ids.size() == 15);
}

TEST_CASE("generation is reproducible from (params, seed)") {
    ModelParams params;
    {
        Rng init(3);
        params.embeddings = init_embeddings(25, 4, 1.0, 1.0, init);
        Rng trng(4);
        params.tensor = random_tensor(4, 2, trng, 0.3);
    }
    params.p_syn = 0.4;
    Rng r1(99), r2(99);
    const SyntheticCorpus a = generate_corpus(params, 5000, r1);
    const SyntheticCorpus b = generate_corpus(params, 5000, r2);
    REQUIRE(a.sentences.size() == b.sentences.size());
    for (std::size_t s = 0; s < a.sentences.size(); ++s) {
        CHECK(a.sentences[s].ids == b.sentences[s].ids);
        REQUIRE(a.pairs_per_sentence[s].size() == b.pairs_per_sentence[s].size());
    }
}

TEST_CASE("written corpus re-ingests to the same pairs") {
    Rng rng(53);
    ModelParams params;
    params.embeddings = init_embeddings(40, 4, 1.0, 1.0, rng);
    params.tensor = CpTensor::zero(4);
    params.p_syn = 0.5;
    const SyntheticCorpus corpus = generate_corpus(params, 2000, rng);

    const std::string path =
        (std::filesystem::temp_directory_path() / "syntens_gen_corpus.txt").string();
    write_corpus(path, corpus);

    const Vocabulary vocab = corpus.vocabulary();
    std::ifstream in(path);
    REQUIRE(in.good());
    ConllReader reader(in);
    ParsedSentence sent;
    std::size_t sidx = 0;
    while (reader.next(sent)) {
        REQUIRE(sidx < corpus.sentences.size());
        const IdSentence ids = map_to_ids(sent, vocab);
        CHECK(ids.ids == corpus.sentences[sidx].ids);
        const auto pairs = extract_pairs(sent, vocab);
        const auto& want = corpus.pairs_per_sentence[sidx];
        REQUIRE(pairs.size() == want.size());
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            CHECK(pairs[p].root_id == want[p].root_id);
            CHECK(pairs[p].dep_id == want[p].dep_id);
            CHECK(pairs[p].root_pos == want[p].root_pos);
            CHECK(pairs[p].dep_pos == want[p].dep_pos);
            CHECK(pairs[p].relation == want[p].relation);
        }
        ++sidx;
    }
    CHECK(sidx == corpus.sentences.size());
    std::remove(path.c_str());
}

TEST_CASE("gold pairs sidecar format") {
    Rng rng(59);
    ModelParams params;
    params.embeddings = init_embeddings(10, 3, 1.0, 1.0, rng);
    params.tensor = CpTensor::zero(3);
    params.p_syn = 1.0;
    params.relation = Relation::VerbObj;
    const SyntheticCorpus corpus = generate_corpus(params, 40, rng);
    const std::string path =
        (std::filesystem::temp_directory_path() / "syntens_gold.tsv").string();
    write_gold_pairs(path, corpus);
    std::ifstream in(path);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string sent_s, root_s, dep_s, rel_s;
        REQUIRE(std::getline(ss, sent_s, '\t'));
        REQUIRE(std::getline(ss, root_s, '\t'));
        REQUIRE(std::getline(ss, dep_s, '\t'));
        REQUIRE(std::getline(ss, rel_s, '\t'));
        CHECK(rel_s == "vo");
        ++rows;
    }
    CHECK(rows == corpus.num_pairs());
    std::remove(path.c_str());
}
