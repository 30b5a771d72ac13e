#include "syntens/counts.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "syntens/errors.hpp"
#include "syntens/io_util.hpp"

namespace syntens {

// ---------------------------------------------------------------------------
// FlatCountMap

std::uint64_t FlatCountMap::hash(std::uint64_t k) {
    // splitmix64 finalizer
    k += 0x9e3779b97f4a7c15ULL;
    k = (k ^ (k >> 30)) * 0xbf58476d1ce4e5b9ULL;
    k = (k ^ (k >> 27)) * 0x94d049bb133111ebULL;
    return k ^ (k >> 31);
}

void FlatCountMap::grow() {
    const std::size_t new_cap = slots_.empty() ? 1024 : slots_.size() * 2;
    std::vector<Slot> old;
    old.swap(slots_);
    slots_.assign(new_cap, Slot{kEmpty, 0.0});
    const std::uint64_t mask = new_cap - 1;
    for (const Slot& s : old) {
        if (s.key == kEmpty) continue;
        std::size_t idx = hash(s.key) & mask;
        while (slots_[idx].key != kEmpty) idx = (idx + 1) & mask;
        slots_[idx] = s;
    }
}

void FlatCountMap::add(std::uint64_t key, double delta) {
    if (key == kEmpty) throw std::invalid_argument("FlatCountMap: reserved key");
    if (slots_.empty() || size_ * 10 >= slots_.size() * 7) grow();
    const std::uint64_t mask = slots_.size() - 1;
    std::size_t idx = hash(key) & mask;
    while (true) {
        Slot& s = slots_[idx];
        if (s.key == key) {
            s.value += delta;
            return;
        }
        if (s.key == kEmpty) {
            s.key = key;
            s.value = delta;
            ++size_;
            return;
        }
        idx = (idx + 1) & mask;
    }
}

double FlatCountMap::get(std::uint64_t key) const {
    if (slots_.empty()) return 0.0;
    const std::uint64_t mask = slots_.size() - 1;
    std::size_t idx = hash(key) & mask;
    while (true) {
        const Slot& s = slots_[idx];
        if (s.key == key) return s.value;
        if (s.key == kEmpty) return 0.0;
        idx = (idx + 1) & mask;
    }
}

std::vector<std::pair<std::uint64_t, double>> FlatCountMap::sorted_entries() const {
    std::vector<std::pair<std::uint64_t, double>> out;
    out.reserve(size_);
    for_each([&](std::uint64_t k, double v) { out.emplace_back(k, v); });
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

void FlatCountMap::clear() {
    slots_.clear();
    slots_.shrink_to_fit();
    size_ = 0;
}

std::uint64_t pack_triple(std::uint32_t a, std::uint32_t b, std::uint32_t w) {
    if (a >= kMaxTripleVocab || b >= kMaxTripleVocab || w >= kMaxTripleVocab)
        throw std::invalid_argument("triple counting supports vocabularies up to 2^21 words");
    return (static_cast<std::uint64_t>(a) << 42) | (static_cast<std::uint64_t>(b) << 21) |
           static_cast<std::uint64_t>(w);
}

// ---------------------------------------------------------------------------
// PairCounts

void PairCounts::add(std::uint32_t i, std::uint32_t j, double c) {
    if (c < 0.0) throw std::invalid_argument("PairCounts::add: negative count");
    if (i > j) std::swap(i, j);
    cells.add(pack_pair(i, j), c);
    total += c;
}

double PairCounts::get(std::uint32_t i, std::uint32_t j) const {
    if (i > j) std::swap(i, j);
    return cells.get(pack_pair(i, j));
}

void PairCounts::merge(const PairCounts& other) {
    if (vocab_size != other.vocab_size)
        throw std::invalid_argument("PairCounts::merge: vocabulary size mismatch");
    other.cells.for_each([&](std::uint64_t k, double v) { cells.add(k, v); });
    total += other.total;
}

void PairCounts::save(const std::string& path) const {
    const auto entries = cells.sorted_entries();
    atomic_write(path, [&](std::ostream& out) {
        out.write("SPC1", 4);
        write_u32(out, vocab_size);
        write_u64(out, entries.size());
        for (const auto& [k, v] : entries) {
            const auto [i, j] = unpack_pair(k);
            write_u32(out, i);
            write_u32(out, j);
            write_f64(out, v);
        }
    }, /*binary=*/true);
}

PairCounts PairCounts::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open pair counts file: " + path);
    expect_magic(in, "SPC1", path);
    PairCounts pc;
    pc.vocab_size = read_u32(in);
    const std::uint64_t n = read_u64(in);
    for (std::uint64_t e = 0; e < n; ++e) {
        const std::uint32_t i = read_u32(in);
        const std::uint32_t j = read_u32(in);
        const double v = read_f64(in);
        if (i > j) throw DataError(path + ": non-canonical cell order");
        pc.cells.add(pack_pair(i, j), v);
        pc.total += v;
    }
    return pc;
}

void PairCounts::export_tsv(const std::string& path) const {
    const auto entries = cells.sorted_entries();
    atomic_write(path, [&](std::ostream& out) {
        for (const auto& [k, v] : entries) {
            const auto [i, j] = unpack_pair(k);
            out << i << '\t' << j << '\t' << format_double(v) << '\n';
        }
    });
}

// ---------------------------------------------------------------------------
// TripleCounts

void TripleCounts::add(std::uint32_t a, std::uint32_t b, std::uint32_t w, double c) {
    if (c < 0.0) throw std::invalid_argument("TripleCounts::add: negative count");
    cells.add(pack_triple(a, b, w), c);
    pair_totals.add(pack_pair(a, b), c);
    total += c;
}

double TripleCounts::get(std::uint32_t a, std::uint32_t b, std::uint32_t w) const {
    return cells.get(pack_triple(a, b, w));
}

double TripleCounts::pair_total(std::uint32_t a, std::uint32_t b) const {
    return pair_totals.get(pack_pair(a, b));
}

void TripleCounts::merge(const TripleCounts& other) {
    if (vocab_size != other.vocab_size)
        throw std::invalid_argument("TripleCounts::merge: vocabulary size mismatch");
    other.cells.for_each([&](std::uint64_t k, double v) { cells.add(k, v); });
    other.pair_totals.for_each([&](std::uint64_t k, double v) { pair_totals.add(k, v); });
    total += other.total;
}

void TripleCounts::save(const std::string& path) const {
    const auto entries = cells.sorted_entries();
    atomic_write(path, [&](std::ostream& out) {
        out.write("STC1", 4);
        write_u32(out, vocab_size);
        write_u64(out, entries.size());
        for (const auto& [k, v] : entries) {
            const auto [a, b, w] = unpack_triple(k);
            write_u32(out, a);
            write_u32(out, b);
            write_u32(out, w);
            write_f64(out, v);
        }
    }, /*binary=*/true);
}

TripleCounts TripleCounts::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open triple counts file: " + path);
    expect_magic(in, "STC1", path);
    TripleCounts tc;
    tc.vocab_size = read_u32(in);
    const std::uint64_t n = read_u64(in);
    for (std::uint64_t e = 0; e < n; ++e) {
        const std::uint32_t a = read_u32(in);
        const std::uint32_t b = read_u32(in);
        const std::uint32_t w = read_u32(in);
        const double v = read_f64(in);
        tc.add(a, b, w, v);
    }
    return tc;
}

void TripleCounts::export_tsv(const std::string& path) const {
    const auto entries = cells.sorted_entries();
    atomic_write(path, [&](std::ostream& out) {
        for (const auto& [k, v] : entries) {
            const auto [a, b, w] = unpack_triple(k);
            out << a << '\t' << b << '\t' << w << '\t' << format_double(v) << '\n';
        }
    });
}

// ---------------------------------------------------------------------------
// Counting

void accumulate_pairs(PairCounts& counts, const IdSentence& sentence, int window) {
    if (window < 1) throw std::invalid_argument("count_pairs: window must be >= 1");
    const int len = static_cast<int>(sentence.ids.size());
    for (int i = 0; i < len; ++i) {
        const std::int32_t wi = sentence.ids[i];
        if (wi < 0) continue;
        const int hi = std::min(len - 1, i + window);
        for (int j = i + 1; j <= hi; ++j) {
            const std::int32_t wj = sentence.ids[j];
            if (wj < 0) continue;
            counts.add(static_cast<std::uint32_t>(wi), static_cast<std::uint32_t>(wj), 1.0);
        }
    }
}

PairCounts count_pairs(std::span<const IdSentence> sentences, std::uint32_t vocab_size,
                       int window) {
    PairCounts counts;
    counts.vocab_size = vocab_size;
    for (const IdSentence& s : sentences) accumulate_pairs(counts, s, window);
    return counts;
}

void accumulate_triples(TripleCounts& counts, const IdSentence& sentence,
                        std::span<const SyntacticPair> pairs, int window) {
    if (window < 1) throw std::invalid_argument("count_triples: window must be >= 1");
    const int len = static_cast<int>(sentence.ids.size());
    for (const SyntacticPair& p : pairs) {
        const int lo = std::max(0, p.root_pos - window);
        const int hi = std::min(len - 1, p.root_pos + window);
        for (int q = lo; q <= hi; ++q) {
            if (q == p.root_pos || q == p.dep_pos) continue;
            const std::int32_t w = sentence.ids[q];
            if (w < 0) continue;
            counts.add(p.root_id, p.dep_id, static_cast<std::uint32_t>(w), 1.0);
        }
    }
}

TripleCounts count_triples(std::span<const IdSentence> sentences,
                           std::span<const std::vector<SyntacticPair>> pairs_per_sentence,
                           std::uint32_t vocab_size, int window) {
    if (sentences.size() != pairs_per_sentence.size())
        throw std::invalid_argument("count_triples: sentences and pair lists differ in length");
    TripleCounts counts;
    counts.vocab_size = vocab_size;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        accumulate_triples(counts, sentences[s], pairs_per_sentence[s], window);
    }
    return counts;
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> shard_ranges(std::size_t n, int threads) {
    if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t t = static_cast<std::size_t>(threads);
    for (std::size_t k = 0; k < t; ++k) {
        const std::size_t lo = n * k / t;
        const std::size_t hi = n * (k + 1) / t;
        out.emplace_back(lo, hi);
    }
    return out;
}

} // namespace

PairCounts count_pairs_parallel(std::span<const IdSentence> sentences, std::uint32_t vocab_size,
                                int window, int threads) {
    const auto ranges = shard_ranges(sentences.size(), threads);
    std::vector<PairCounts> shards(ranges.size());
    std::vector<std::thread> workers;
    for (std::size_t k = 0; k < ranges.size(); ++k) {
        workers.emplace_back([&, k] {
            shards[k] = count_pairs(sentences.subspan(ranges[k].first,
                                                      ranges[k].second - ranges[k].first),
                                    vocab_size, window);
        });
    }
    for (auto& w : workers) w.join();
    PairCounts counts;
    counts.vocab_size = vocab_size;
    for (PairCounts& s : shards) counts.merge(s);
    return counts;
}

TripleCounts count_triples_parallel(std::span<const IdSentence> sentences,
                                    std::span<const std::vector<SyntacticPair>> pairs_per_sentence,
                                    std::uint32_t vocab_size, int window, int threads) {
    if (sentences.size() != pairs_per_sentence.size())
        throw std::invalid_argument("count_triples: sentences and pair lists differ in length");
    const auto ranges = shard_ranges(sentences.size(), threads);
    std::vector<TripleCounts> shards(ranges.size());
    std::vector<std::thread> workers;
    for (std::size_t k = 0; k < ranges.size(); ++k) {
        workers.emplace_back([&, k] {
            const std::size_t lo = ranges[k].first;
            const std::size_t n = ranges[k].second - lo;
            shards[k] = count_triples(sentences.subspan(lo, n),
                                      pairs_per_sentence.subspan(lo, n), vocab_size, window);
        });
    }
    for (auto& w : workers) w.join();
    TripleCounts counts;
    counts.vocab_size = vocab_size;
    for (TripleCounts& s : shards) counts.merge(s);
    return counts;
}

} // namespace syntens
