#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "syntens/conll.hpp"

namespace syntens {

/// Open-addressing accumulator from u64 key to double count. Insert/accumulate
/// only (no deletion), linear probing, power-of-two capacity. Node-based maps
/// are too heavy for the hundreds of millions of increments a corpus produces.
class FlatCountMap {
public:
    FlatCountMap() = default;

    void add(std::uint64_t key, double delta);
    double get(std::uint64_t key) const; // 0.0 if absent

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    template <typename Fn> // Fn(std::uint64_t key, double value)
    void for_each(Fn&& fn) const {
        for (const Slot& s : slots_) {
            if (s.key != kEmpty) fn(s.key, s.value);
        }
    }

    /// All (key, value) pairs sorted by key.
    std::vector<std::pair<std::uint64_t, double>> sorted_entries() const;

    void clear();

private:
    struct Slot {
        std::uint64_t key;
        double value;
    };
    static constexpr std::uint64_t kEmpty = UINT64_MAX;

    void grow();
    static std::uint64_t hash(std::uint64_t k);

    std::vector<Slot> slots_;
    std::size_t size_ = 0;
};

// Key packing. Pair keys use 32 bits per id; triple keys 21 bits per id, which
// caps the vocabulary for triple counting at 2^21 words.
constexpr std::uint32_t kMaxTripleVocab = 1u << 21;

inline std::uint64_t pack_pair(std::uint32_t i, std::uint32_t j) {
    return (static_cast<std::uint64_t>(i) << 32) | j;
}
inline std::pair<std::uint32_t, std::uint32_t> unpack_pair(std::uint64_t k) {
    return {static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k & 0xffffffffu)};
}
std::uint64_t pack_triple(std::uint32_t a, std::uint32_t b, std::uint32_t w);
inline std::tuple<std::uint32_t, std::uint32_t, std::uint32_t> unpack_triple(std::uint64_t k) {
    return {static_cast<std::uint32_t>((k >> 42) & 0x1fffff),
            static_cast<std::uint32_t>((k >> 21) & 0x1fffff),
            static_cast<std::uint32_t>(k & 0x1fffff)};
}

/// Sparse symmetric word-word co-occurrence counts; cells keyed by the
/// canonical (min id, max id) order. Counts are reals so weighted schemes fit
/// the same format, though the stock counter uses unit increments.
struct PairCounts {
    std::uint32_t vocab_size = 0;
    FlatCountMap cells;
    double total = 0.0;

    void add(std::uint32_t i, std::uint32_t j, double c);
    double get(std::uint32_t i, std::uint32_t j) const; // canonicalizes

    void merge(const PairCounts& other); // throws on vocab_size mismatch

    void save(const std::string& path) const; // binary, magic "SPC1"
    static PairCounts load(const std::string& path);
    void export_tsv(const std::string& path) const;
};

/// Sparse ((root, dep) pair, context word) co-occurrence counts, with the
/// per-pair totals maintained alongside.
struct TripleCounts {
    std::uint32_t vocab_size = 0;
    FlatCountMap cells;       // pack_triple(a, b, w) -> count
    FlatCountMap pair_totals; // pack_pair(a, b) -> sum over w
    double total = 0.0;

    void add(std::uint32_t a, std::uint32_t b, std::uint32_t w, double c);
    double get(std::uint32_t a, std::uint32_t b, std::uint32_t w) const;
    double pair_total(std::uint32_t a, std::uint32_t b) const;

    void merge(const TripleCounts& other);

    void save(const std::string& path) const; // binary, magic "STC1"
    static TripleCounts load(const std::string& path);
    void export_tsv(const std::string& path) const;
};

/// Counts every in-vocabulary token pair at distance <= window within one
/// sentence; never crosses sentence boundaries. One unit per position pair,
/// cells in canonical order.
void accumulate_pairs(PairCounts& counts, const IdSentence& sentence, int window);
PairCounts count_pairs(std::span<const IdSentence> sentences, std::uint32_t vocab_size,
                       int window);

/// For each syntactic pair, counts every in-vocabulary token within `window`
/// of the pair's root position, excluding the pair's own two positions.
void accumulate_triples(TripleCounts& counts, const IdSentence& sentence,
                        std::span<const SyntacticPair> pairs, int window);
TripleCounts count_triples(std::span<const IdSentence> sentences,
                           std::span<const std::vector<SyntacticPair>> pairs_per_sentence,
                           std::uint32_t vocab_size, int window);

/// Sharded counting: splits sentences into `threads` contiguous shards, counts
/// each independently, then merges in shard order. Unit increments make the
/// result bit-identical to the sequential count for any thread count.
PairCounts count_pairs_parallel(std::span<const IdSentence> sentences, std::uint32_t vocab_size,
                                int window, int threads);
TripleCounts count_triples_parallel(std::span<const IdSentence> sentences,
                                    std::span<const std::vector<SyntacticPair>> pairs_per_sentence,
                                    std::uint32_t vocab_size, int window, int threads);

} // namespace syntens
