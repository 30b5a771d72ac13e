// syntens: command-line front end for the syntactic composition toolkit.
//
// Pipeline: generate -> ingest -> count -> train-embeddings -> train-tensor
// -> verify / pmi3-check / compose / neighbors / eval. Subcommand outputs are
// written atomically (temp file + rename). Exit codes: 0 success, 1 usage
// error, 2 data error, 3 numeric failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "syntens/compose.hpp"
#include "syntens/conll.hpp"
#include "syntens/counts.hpp"
#include "syntens/errors.hpp"
#include "syntens/eval.hpp"
#include "syntens/generator.hpp"
#include "syntens/io_util.hpp"
#include "syntens/model_io.hpp"
#include "syntens/stats.hpp"
#include "syntens/train.hpp"
#include "syntens/vocab.hpp"

using namespace syntens;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

void write_json(const std::string& path, const nlohmann::json& j) {
    atomic_write(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

nlohmann::json train_config_json(const TrainConfig& cfg) {
    return {{"dim", cfg.dim},
            {"cp_rank", cfg.cp_rank},
            {"cap", cfg.cap},
            {"learning_rate", cfg.learning_rate},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"seed", cfg.seed},
            {"init_scale", cfg.init_scale},
            {"threads", cfg.threads},
            {"joint", cfg.joint}};
}

struct LoadedCorpus {
    std::vector<IdSentence> sentences;
    std::vector<std::vector<SyntacticPair>> pairs;
};

LoadedCorpus load_corpus(const std::string& path, const Vocabulary& vocab,
                         const RelationMap& relations) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    LoadedCorpus out;
    ConllReader reader(in);
    ParsedSentence sent;
    while (reader.next(sent)) {
        out.sentences.push_back(map_to_ids(sent, vocab));
        out.pairs.push_back(extract_pairs(sent, vocab, relations));
    }
    return out;
}

// --------------------------------------------------------------------------
// generate

struct GenerateOpts {
    int n = 500, d = 10, rank = 2;
    std::int64_t steps = 100000;
    double p_syn = 0.3, eps_w = 1.0, kappa = 1.0, tau = 1.0, tensor_scale = 1.0;
    int sentence_steps = 20;
    std::uint64_t seed = 1;
    std::string relation = "an";
    std::string out, gold, truth_emb, truth_tensor;
};

int cmd_generate(const GenerateOpts& o) {
    Rng rng(o.seed);
    ModelParams params;
    params.embeddings = init_embeddings(o.n, o.d, o.kappa, o.tau, rng);
    params.tensor = CpTensor::zero(o.d);
    if (o.rank > 0) {
        params.tensor.weights = Eigen::VectorXd::Constant(o.rank, o.tensor_scale);
        params.tensor.factor_a = Matrix(o.rank, o.d);
        params.tensor.factor_b = Matrix(o.rank, o.d);
        params.tensor.factor_c = Matrix(o.rank, o.d);
        for (int r = 0; r < o.rank; ++r) {
            params.tensor.factor_a.row(r) = sample_unit_sphere(o.d, rng).transpose();
            params.tensor.factor_b.row(r) = sample_unit_sphere(o.d, rng).transpose();
            params.tensor.factor_c.row(r) = sample_unit_sphere(o.d, rng).transpose();
        }
    }
    params.p_syn = o.p_syn;
    params.eps_w = o.eps_w;
    params.kappa = o.kappa;
    params.tau = o.tau;
    params.relation = relation_from_name(o.relation);
    params.sentence_steps = o.sentence_steps;

    const SyntheticCorpus corpus = generate_corpus(params, o.steps, rng);
    write_corpus(o.out, corpus);
    if (!o.gold.empty()) write_gold_pairs(o.gold, corpus);
    const Vocabulary vocab = corpus.vocabulary();
    if (!o.truth_emb.empty()) save_embeddings(o.truth_emb, params.embeddings, vocab);
    if (!o.truth_tensor.empty()) {
        save_tensor(o.truth_tensor, params.tensor);
        write_json(o.truth_tensor + ".meta.json",
                   {{"source", "generate"},
                    {"n", o.n},
                    {"d", o.d},
                    {"rank", o.rank},
                    {"tensor_scale", o.tensor_scale},
                    {"p_syn", o.p_syn},
                    {"eps_w", o.eps_w},
                    {"kappa", o.kappa},
                    {"tau", o.tau},
                    {"steps", o.steps},
                    {"sentence_steps", o.sentence_steps},
                    {"relation", o.relation},
                    {"seed", o.seed}});
    }
    std::cout << "generated " << corpus.sentences.size() << " sentences, "
              << corpus.num_tokens() << " tokens, " << corpus.num_pairs() << " pairs\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// ingest

struct IngestOpts {
    std::string corpus, stopwords, out;
    std::int64_t min_count = 1000;
};

int cmd_ingest(const IngestOpts& o) {
    StopwordSet stops;
    if (!o.stopwords.empty()) stops = load_stopwords(o.stopwords);
    std::ifstream in(o.corpus);
    if (!in) throw DataError("cannot open corpus file: " + o.corpus);
    const Vocabulary vocab = build_vocabulary(in, o.min_count, stops);
    vocab.save(o.out);
    std::cout << "vocabulary: " << vocab.size() << " words (min count " << o.min_count << ")\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// count

struct CountOpts {
    std::string corpus, vocab, pairs_out, triples_out, relation_map = "amod=an,obj=vo,dobj=vo";
    int window = 5;
    int threads = 1;
    bool tsv = false;
};

int cmd_count(const CountOpts& o) {
    const Vocabulary vocab = Vocabulary::load(o.vocab);
    const RelationMap relations = RelationMap::parse(o.relation_map);
    const LoadedCorpus corpus = load_corpus(o.corpus, vocab, relations);
    const auto n = static_cast<std::uint32_t>(vocab.size());

    const nlohmann::json meta = {{"window", o.window},
                                 {"anchor", "root"},
                                 {"relation_map", o.relation_map},
                                 {"corpus", o.corpus},
                                 {"vocab_size", n}};
    if (!o.pairs_out.empty()) {
        const PairCounts pc = count_pairs_parallel(corpus.sentences, n, o.window, o.threads);
        pc.save(o.pairs_out);
        write_json(o.pairs_out + ".meta.json", meta);
        if (o.tsv) pc.export_tsv(o.pairs_out + ".tsv");
        std::cout << "pair cells: " << pc.cells.size() << " (total " << pc.total << ")\n";
    }
    if (!o.triples_out.empty()) {
        const TripleCounts tc =
            count_triples_parallel(corpus.sentences, corpus.pairs, n, o.window, o.threads);
        tc.save(o.triples_out);
        write_json(o.triples_out + ".meta.json", meta);
        if (o.tsv) tc.export_tsv(o.triples_out + ".tsv");
        std::cout << "triple cells: " << tc.cells.size() << " (total " << tc.total << ")\n";
    }
    return kExitOk;
}

// --------------------------------------------------------------------------
// train-embeddings

struct TrainEmbOpts {
    std::string pairs, vocab, out, log;
    TrainConfig cfg;
};

int cmd_train_embeddings(const TrainEmbOpts& o) {
    const Vocabulary vocab = Vocabulary::load(o.vocab);
    const PairCounts pc = PairCounts::load(o.pairs);
    if (pc.vocab_size != vocab.size())
        throw DataError("pair counts were built for a different vocabulary size");
    EmbeddingTrainResult res;
    try {
        res = train_embeddings(pc, o.cfg);
    } catch (const EmbeddingTrainingDivergence& e) {
        save_embeddings(o.out + ".diverged", e.checkpoint, vocab);
        throw;
    }
    save_embeddings(o.out, res.embeddings, vocab);
    write_json(o.out + ".meta.json",
               {{"global_log_partition", res.embeddings.global_log_partition},
                {"config", train_config_json(o.cfg)}});
    if (!o.log.empty()) write_train_log(o.log, res.log);
    std::cout << "final loss " << (res.log.empty() ? 0.0 : res.log.back().loss) << " after "
              << res.log.size() << " epochs\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// train-tensor

struct TrainTensorOpts {
    std::string triples, emb, vocab, out, log, match_norms_ref;
    TrainConfig cfg;
};

int cmd_train_tensor(const TrainTensorOpts& o) {
    const Vocabulary vocab = Vocabulary::load(o.vocab);
    const TripleCounts tc = TripleCounts::load(o.triples);
    if (tc.vocab_size != vocab.size())
        throw DataError("triple counts were built for a different vocabulary size");
    EmbeddingMatrix emb = load_embeddings(o.emb, vocab);
    if (!o.match_norms_ref.empty()) {
        const EmbeddingMatrix ref = load_embeddings(o.match_norms_ref, vocab);
        match_norms(emb, ref);
    }
    TrainConfig cfg = o.cfg;
    cfg.dim = emb.d();
    TensorTrainResult res;
    try {
        res = train_tensor(tc, emb, cfg);
    } catch (const TensorTrainingDivergence& e) {
        save_tensor(o.out + ".diverged", e.checkpoint);
        throw;
    }
    save_tensor(o.out, res.tensor);
    write_json(o.out + ".meta.json", {{"config", train_config_json(cfg)},
                                      {"anchor", "root"},
                                      {"embeddings", o.emb},
                                      {"rescaled_to", o.match_norms_ref}});
    if (cfg.joint) save_embeddings(o.out + ".joint-embeddings.txt", res.embeddings, vocab);
    if (!o.log.empty()) write_train_log(o.log, res.log);
    std::cout << "final loss " << (res.log.empty() ? 0.0 : res.log.back().loss) << " after "
              << res.log.size() << " epochs\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// verify

struct VerifyOpts {
    std::string emb, vocab, tensor, triples, out_prefix = "verify_", word;
    int samples = 1000;
    int num_pairs = 500;
    int max_pairs = 2000;
    std::uint64_t seed = 0;
};

int cmd_verify(const VerifyOpts& o) {
    const Vocabulary vocab = Vocabulary::load(o.vocab);
    const EmbeddingMatrix emb = load_embeddings(o.emb, vocab);
    std::optional<CpTensor> tensor;
    if (!o.tensor.empty()) tensor = load_tensor(o.tensor);
    Rng rng(o.seed);

    const ConcentrationReport zc =
        concentration_report(emb, nullptr, std::nullopt, o.samples, rng);
    atomic_write(o.out_prefix + "concentration.json",
                 [&](std::ostream& out) { out << zc.to_json() << '\n'; });
    zc.save_histogram_tsv(o.out_prefix + "concentration_hist.tsv");
    std::cout << "Z_c: mean " << zc.mean << ", cv " << zc.coeff_variation << "\n";

    if (tensor.has_value()) {
        if (!o.word.empty()) {
            const std::int64_t id = vocab.lookup_form(o.word);
            if (id < 0) throw DataError("word not in vocabulary: " + o.word);
            const ConcentrationReport za = concentration_report(
                emb, &*tensor, static_cast<std::uint32_t>(id), o.samples, rng);
            atomic_write(o.out_prefix + "concentration_" + o.word + ".json",
                         [&](std::ostream& out) { out << za.to_json() << '\n'; });
            za.save_histogram_tsv(o.out_prefix + "concentration_" + o.word + "_hist.tsv");
            std::cout << "Z_{c," << o.word << "}: mean " << za.mean << ", cv "
                      << za.coeff_variation << "\n";
        }

        std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
        if (!o.triples.empty()) {
            const TripleCounts tc = TripleCounts::load(o.triples);
            for (const auto& [key, count] : tc.pair_totals.sorted_entries()) {
                pairs.emplace_back(unpack_pair(key));
                if (pairs.size() >= static_cast<std::size_t>(o.max_pairs)) break;
            }
        } else {
            const auto n = static_cast<std::uint32_t>(vocab.size());
            for (int k = 0; k < o.num_pairs; ++k) {
                pairs.emplace_back(static_cast<std::uint32_t>(rng.integer(n)),
                                   static_cast<std::uint32_t>(rng.integer(n)));
            }
        }
        const BoundednessReport rep = boundedness_report(*tensor, emb, pairs);
        atomic_write(o.out_prefix + "boundedness.json",
                     [&](std::ostream& out) { out << rep.to_json() << '\n'; });
        std::cout << "slice stats over " << rep.num_pairs << " pairs: spectral "
                  << rep.spectral.mean << "/" << rep.spectral.max << ", frobenius "
                  << rep.frobenius.mean << "/" << rep.frobenius.max << ", vector "
                  << rep.vec.mean << "/" << rep.vec.max << " (K " << rep.inferred_k << ", eps "
                  << rep.inferred_eps << ")\n";
    }
    return kExitOk;
}

// --------------------------------------------------------------------------
// pmi3-check

struct Pmi3CheckOpts {
    std::string pairs, triples, vocab, emb, tensor, out;
    double min_count = 50.0;
};

int cmd_pmi3_check(const Pmi3CheckOpts& o) {
    const Vocabulary vocab = Vocabulary::load(o.vocab);
    const EmbeddingMatrix emb = load_embeddings(o.emb, vocab);
    const CpTensor tensor = load_tensor(o.tensor);
    const PairCounts pc = PairCounts::load(o.pairs);
    const TripleCounts tc = TripleCounts::load(o.triples);
    const UnigramCounts uni = UnigramCounts::from_vocab(vocab);
    const TuckerResidual res = tucker_residual_check(tensor, emb, tc, pc, uni, o.min_count);
    if (!o.out.empty()) {
        atomic_write(o.out, [&](std::ostream& out) { out << res.to_json() << '\n'; });
    }
    std::cout << "pmi3 vs prediction over " << res.num_triples << " triples: pearson "
              << res.pearson_r << ", rmse " << res.rmse << "\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// compose / neighbors

struct ComposeOpts {
    std::string emb, vocab, tensor, a, b, method = "tensor";
    double alpha = 0.4, beta = 1.0, gamma = 0.1, sif_a = 1e-3;
    int neighbors = 10;
    bool exclude_phrase = false;
};

int cmd_compose(const ComposeOpts& o) {
    const Vocabulary vocab = Vocabulary::load(o.vocab);
    const EmbeddingMatrix emb = load_embeddings(o.emb, vocab);
    std::optional<CpTensor> tensor;
    if (!o.tensor.empty()) tensor = load_tensor(o.tensor);

    const std::int64_t a = vocab.lookup_form(o.a);
    const std::int64_t b = vocab.lookup_form(o.b);
    if (a < 0) throw DataError("word not in vocabulary: " + o.a);
    if (b < 0) throw DataError("word not in vocabulary: " + o.b);

    CompositionMethod method;
    method.kind = composition_kind_from_name(o.method);
    method.alpha = o.alpha;
    method.beta = o.beta;
    method.gamma = o.gamma;
    method.sif_a = o.sif_a;

    std::unordered_set<std::uint32_t> exclude;
    if (o.exclude_phrase) {
        exclude.insert(static_cast<std::uint32_t>(a));
        exclude.insert(static_cast<std::uint32_t>(b));
    }

    const Vector added = compose(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                                 emb, nullptr, CompositionMethod::additive());
    const Vector composed =
        compose(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), emb,
                tensor.has_value() ? &*tensor : nullptr, method, &vocab);
    const auto base = nearest_neighbors(added, emb, o.neighbors, exclude);
    const auto ours = nearest_neighbors(composed, emb, o.neighbors, exclude);

    std::cout << "phrase: (" << o.a << ", " << o.b << ")\n";
    std::printf("%-24s %-24s\n", "additive", o.method.c_str());
    for (int k = 0; k < o.neighbors; ++k) {
        const std::string left =
            k < static_cast<int>(base.size()) ? vocab.word_of[base[k].id] : "";
        const std::string right =
            k < static_cast<int>(ours.size()) ? vocab.word_of[ours[k].id] : "";
        std::printf("%-24s %-24s\n", left.c_str(), right.c_str());
    }
    return kExitOk;
}

struct NeighborsOpts {
    std::string emb, vocab, word;
    int k = 10;
};

int cmd_neighbors(const NeighborsOpts& o) {
    const Vocabulary vocab = Vocabulary::load(o.vocab);
    const EmbeddingMatrix emb = load_embeddings(o.emb, vocab);
    const std::int64_t id = vocab.lookup_form(o.word);
    if (id < 0) throw DataError("word not in vocabulary: " + o.word);
    const auto top = nearest_neighbors(emb.row(static_cast<std::uint32_t>(id)), emb, o.k);
    for (const auto& s : top) {
        std::printf("%-24s %.6f\n", vocab.word_of[s.id].c_str(), s.cosine);
    }
    return kExitOk;
}

// --------------------------------------------------------------------------
// eval

struct EvalOpts {
    std::string dataset, emb, vocab, tensor, method = "tensor", type = "all", out;
    double alpha = 0.4, beta = 1.0, gamma = 0.1, sif_a = 1e-3;
    bool cheat = false;
    bool subject_average = false;
    bool beta_on_dep = false;
    int folds = 3;
};

int cmd_eval(const EvalOpts& o) {
    const Vocabulary vocab = Vocabulary::load(o.vocab);
    const EmbeddingMatrix emb = load_embeddings(o.emb, vocab);
    std::optional<CpTensor> tensor;
    if (!o.tensor.empty()) tensor = load_tensor(o.tensor);

    PhraseSimDataset ds = PhraseSimDataset::load(o.dataset);
    if (o.type != "all") ds = ds.filter(relation_from_name(o.type));

    CompositionMethod family;
    family.kind = composition_kind_from_name(o.method);
    family.alpha = o.alpha;
    family.beta = o.beta;
    family.gamma = o.gamma;
    family.sif_a = o.sif_a;
    family.weight_root = !o.beta_on_dep;

    FoldSpec folds;
    folds.num_folds = o.folds;
    folds.cheat = o.cheat;
    folds.subject_average = o.subject_average;

    const EvalResult res = evaluate(ds, emb, tensor.has_value() ? &*tensor : nullptr, vocab,
                                    family, folds);
    if (!o.out.empty()) {
        atomic_write(o.out, [&](std::ostream& out) { out << res.to_json() << '\n'; });
    }
    std::printf("%-12s %10s %10s %8s%s\n", "method", "spearman", "pearson", "weight",
                o.cheat ? "  (cheating weight selection: upper bound)" : "");
    std::printf("%-12s %10.4f %10.4f %8.2f\n", o.method.c_str(), res.spearman, res.pearson,
                res.chosen_weight);
    for (const auto& f : res.per_fold) {
        std::printf("  fold %d: weight %.2f, spearman %.4f, pearson %.4f\n", f.dev_fold, f.weight,
                    f.test_spearman, f.test_pearson);
    }
    if (res.skipped_records > 0) {
        std::cout << "skipped " << res.skipped_records << " out-of-vocabulary records (used "
                  << res.used_records << ")\n";
    }
    return kExitOk;
}

void add_train_options(CLI::App* cmd, TrainConfig& cfg) {
    cmd->add_option("--epochs", cfg.epochs, "training epochs");
    cmd->add_option("--lr", cfg.learning_rate, "optimizer step size");
    cmd->add_option("--batch", cfg.batch_size, "batch size (0 = full batch)");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--cap", cfg.cap, "count-weight ceiling");
    cmd->add_option("--init-scale", cfg.init_scale, "initialization scale");
    cmd->add_option("--threads", cfg.threads, "gradient worker threads (1 = deterministic)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"syntactic word-embedding composition toolkit"};
    app.require_subcommand(1);

    GenerateOpts gen;
    auto* cmd_gen = app.add_subcommand("generate", "sample a synthetic corpus from the model");
    cmd_gen->add_option("--n", gen.n, "vocabulary size")->check(CLI::PositiveNumber);
    cmd_gen->add_option("--d", gen.d, "embedding dimension")->check(CLI::PositiveNumber);
    cmd_gen->add_option("--rank", gen.rank, "CP rank of the ground-truth tensor")
        ->check(CLI::NonNegativeNumber);
    cmd_gen->add_option("--steps", gen.steps, "discourse steps")->check(CLI::PositiveNumber);
    cmd_gen->add_option("--p-syn", gen.p_syn, "probability of a pair step")
        ->check(CLI::Range(0.0, 1.0));
    cmd_gen->add_option("--eps-w", gen.eps_w, "walk step bound numerator");
    cmd_gen->add_option("--kappa", gen.kappa, "embedding scale bound");
    cmd_gen->add_option("--tau", gen.tau, "embedding scale mean");
    cmd_gen->add_option("--tensor-scale", gen.tensor_scale, "ground-truth tensor weight");
    cmd_gen->add_option("--sentence-steps", gen.sentence_steps, "discourse steps per sentence");
    cmd_gen->add_option("--seed", gen.seed, "RNG seed");
    cmd_gen->add_option("--relation", gen.relation, "pair relation emitted (an|vo)");
    cmd_gen->add_option("--out", gen.out, "corpus output path")->required();
    cmd_gen->add_option("--gold", gen.gold, "gold pairs TSV output");
    cmd_gen->add_option("--truth-emb", gen.truth_emb, "ground-truth embeddings output");
    cmd_gen->add_option("--truth-tensor", gen.truth_tensor, "ground-truth tensor output");

    IngestOpts ing;
    auto* cmd_ing = app.add_subcommand("ingest", "build the frequency-thresholded vocabulary");
    cmd_ing->add_option("--corpus", ing.corpus, "parsed corpus file")->required();
    cmd_ing->add_option("--min-count", ing.min_count, "retain words seen at least this often")
        ->check(CLI::PositiveNumber);
    cmd_ing->add_option("--stopwords", ing.stopwords, "stopword file, one token per line");
    cmd_ing->add_option("--out", ing.out, "vocabulary TSV output")->required();

    CountOpts cnt;
    auto* cmd_cnt = app.add_subcommand("count", "build pair and triple co-occurrence counts");
    cmd_cnt->add_option("--corpus", cnt.corpus, "parsed corpus file")->required();
    cmd_cnt->add_option("--vocab", cnt.vocab, "vocabulary TSV")->required();
    cmd_cnt->add_option("--window", cnt.window, "context window size")->check(CLI::PositiveNumber);
    cmd_cnt->add_option("--pairs-out", cnt.pairs_out, "pair counts output (binary)");
    cmd_cnt->add_option("--triples-out", cnt.triples_out, "triple counts output (binary)");
    cmd_cnt->add_option("--relation-map", cnt.relation_map, "label=an|vo mapping list");
    cmd_cnt->add_option("--threads", cnt.threads, "counting shards")->check(CLI::PositiveNumber);
    cmd_cnt->add_flag("--tsv", cnt.tsv, "also write TSV debug exports");

    TrainEmbOpts temb;
    temb.cfg.dim = 300;
    auto* cmd_temb = app.add_subcommand("train-embeddings", "fit word vectors to pair counts");
    cmd_temb->add_option("--pairs", temb.pairs, "pair counts file")->required();
    cmd_temb->add_option("--vocab", temb.vocab, "vocabulary TSV")->required();
    cmd_temb->add_option("--d", temb.cfg.dim, "embedding dimension")->check(CLI::PositiveNumber);
    cmd_temb->add_option("--out", temb.out, "embedding text output")->required();
    cmd_temb->add_option("--log", temb.log, "per-epoch TSV training log");
    add_train_options(cmd_temb, temb.cfg);

    TrainTensorOpts ttns;
    ttns.cfg.cp_rank = 1000;
    auto* cmd_ttns = app.add_subcommand("train-tensor",
                                        "fit the composition tensor to triple counts");
    cmd_ttns->add_option("--triples", ttns.triples, "triple counts file")->required();
    cmd_ttns->add_option("--emb", ttns.emb, "embedding text file")->required();
    cmd_ttns->add_option("--vocab", ttns.vocab, "vocabulary TSV")->required();
    cmd_ttns->add_option("--rank", ttns.cfg.cp_rank, "CP rank")->check(CLI::NonNegativeNumber);
    cmd_ttns->add_option("--out", ttns.out, "tensor binary output")->required();
    cmd_ttns->add_option("--log", ttns.log, "per-epoch TSV training log");
    cmd_ttns->add_option("--match-norms-ref", ttns.match_norms_ref,
                         "rescale input embeddings per word to this reference's norms");
    cmd_ttns->add_flag("--joint", ttns.cfg.joint, "train embeddings jointly with the tensor");
    add_train_options(cmd_ttns, ttns.cfg);

    VerifyOpts ver;
    auto* cmd_ver = app.add_subcommand("verify",
                                       "partition concentration and slice norm reports");
    cmd_ver->add_option("--emb", ver.emb, "embedding text file")->required();
    cmd_ver->add_option("--vocab", ver.vocab, "vocabulary TSV")->required();
    cmd_ver->add_option("--tensor", ver.tensor, "tensor binary (enables slice norms)");
    cmd_ver->add_option("--samples", ver.samples, "sampled discourse vectors")
        ->check(CLI::PositiveNumber);
    cmd_ver->add_option("--word", ver.word, "also report the per-root partition for this word");
    cmd_ver->add_option("--triples", ver.triples, "take (root, dep) pairs from these counts");
    cmd_ver->add_option("--num-pairs", ver.num_pairs, "random pairs when no counts given");
    cmd_ver->add_option("--max-pairs", ver.max_pairs, "cap on pairs read from counts");
    cmd_ver->add_option("--seed", ver.seed, "RNG seed");
    cmd_ver->add_option("--out-prefix", ver.out_prefix, "report path prefix");

    Pmi3CheckOpts p3;
    auto* cmd_p3 = app.add_subcommand("pmi3-check",
                                      "compare empirical PMI3 against the tensor prediction");
    cmd_p3->add_option("--pairs", p3.pairs, "pair counts file")->required();
    cmd_p3->add_option("--triples", p3.triples, "triple counts file")->required();
    cmd_p3->add_option("--vocab", p3.vocab, "vocabulary TSV")->required();
    cmd_p3->add_option("--emb", p3.emb, "embedding text file")->required();
    cmd_p3->add_option("--tensor", p3.tensor, "tensor binary")->required();
    cmd_p3->add_option("--min-count", p3.min_count, "triple count threshold")
        ->check(CLI::PositiveNumber);
    cmd_p3->add_option("--out", p3.out, "JSON report output");

    ComposeOpts cmp;
    auto* cmd_cmp = app.add_subcommand("compose", "compose a phrase and list nearest neighbors");
    cmd_cmp->add_option("--emb", cmp.emb, "embedding text file")->required();
    cmd_cmp->add_option("--vocab", cmp.vocab, "vocabulary TSV")->required();
    cmd_cmp->add_option("--tensor", cmp.tensor, "tensor binary");
    cmd_cmp->add_option("--a", cmp.a, "root word (noun/object)")->required();
    cmd_cmp->add_option("--b", cmp.b, "dependent word (adjective/verb)")->required();
    cmd_cmp->add_option("--method", cmp.method, "additive|weighted|tensor|sif|sif+tensor");
    cmd_cmp->add_option("--alpha", cmp.alpha, "tensor term weight");
    cmd_cmp->add_option("--beta", cmp.beta, "weighted-additive weight");
    cmd_cmp->add_option("--gamma", cmp.gamma, "sif+tensor term weight");
    cmd_cmp->add_option("--sif-a", cmp.sif_a, "sif smoothing parameter");
    cmd_cmp->add_option("--neighbors", cmp.neighbors, "words to list")
        ->check(CLI::PositiveNumber);
    cmd_cmp->add_flag("--exclude-phrase", cmp.exclude_phrase,
                      "drop the phrase's own words from the lists");

    NeighborsOpts nb;
    auto* cmd_nb = app.add_subcommand("neighbors", "nearest neighbors of a single word");
    cmd_nb->add_option("--emb", nb.emb, "embedding text file")->required();
    cmd_nb->add_option("--vocab", nb.vocab, "vocabulary TSV")->required();
    cmd_nb->add_option("--word", nb.word, "query word")->required();
    cmd_nb->add_option("--k", nb.k, "words to list")->check(CLI::PositiveNumber);

    EvalOpts ev;
    auto* cmd_ev = app.add_subcommand("eval", "fold-rotated phrase similarity evaluation");
    cmd_ev->add_option("--dataset", ev.dataset, "judgments TSV")->required();
    cmd_ev->add_option("--emb", ev.emb, "embedding text file")->required();
    cmd_ev->add_option("--vocab", ev.vocab, "vocabulary TSV")->required();
    cmd_ev->add_option("--tensor", ev.tensor, "tensor binary");
    cmd_ev->add_option("--method", ev.method, "additive|weighted|tensor|sif|sif+tensor");
    cmd_ev->add_option("--type", ev.type, "phrase type filter (an|vo|all)");
    cmd_ev->add_option("--alpha", ev.alpha, "fixed tensor weight (grid-searched families ignore)");
    cmd_ev->add_option("--beta", ev.beta, "fixed weighted-additive weight");
    cmd_ev->add_option("--gamma", ev.gamma, "fixed sif+tensor weight");
    cmd_ev->add_option("--sif-a", ev.sif_a, "sif smoothing parameter");
    cmd_ev->add_option("--folds", ev.folds, "subject folds")->check(CLI::PositiveNumber);
    cmd_ev->add_flag("--cheat", ev.cheat, "select weights on the test folds (upper bound)");
    cmd_ev->add_flag("--subject-average", ev.subject_average,
                     "correlate per-phrase mean ratings");
    cmd_ev->add_flag("--beta-on-dep", ev.beta_on_dep,
                     "weighted addition scales the dependent word");
    cmd_ev->add_option("--out", ev.out, "JSON result output");

    // every subcommand accepts a flat key = value config file; explicit flags win
    for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
        sub->set_config("--config", "", "flat key = value config file; flags override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (cmd_gen->parsed()) return cmd_generate(gen);
        if (cmd_ing->parsed()) return cmd_ingest(ing);
        if (cmd_cnt->parsed()) return cmd_count(cnt);
        if (cmd_temb->parsed()) return cmd_train_embeddings(temb);
        if (cmd_ttns->parsed()) return cmd_train_tensor(ttns);
        if (cmd_ver->parsed()) return cmd_verify(ver);
        if (cmd_p3->parsed()) return cmd_pmi3_check(p3);
        if (cmd_cmp->parsed()) return cmd_compose(cmp);
        if (cmd_nb->parsed()) return cmd_neighbors(nb);
        if (cmd_ev->parsed()) return cmd_eval(ev);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const UndefinedValueError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
