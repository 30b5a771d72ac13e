#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace syntens {

/// ASCII lowercase; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string s);

/// Frequency-thresholded word <-> id map. Ids are assigned in descending
/// frequency order, ties broken lexicographically, so id 0 is the most
/// frequent retained word.
struct Vocabulary {
    std::unordered_map<std::string, std::uint32_t> id_of;
    std::vector<std::string> word_of;
    std::vector<std::int64_t> count;
    std::int64_t min_count = 1;

    std::size_t size() const { return word_of.size(); }

    /// Id of an already-lowercased token, or -1 if not retained.
    std::int64_t lookup(const std::string& token) const {
        auto it = id_of.find(token);
        return it == id_of.end() ? -1 : static_cast<std::int64_t>(it->second);
    }

    /// Lowercases, then looks up.
    std::int64_t lookup_form(const std::string& form) const { return lookup(ascii_lower(form)); }

    /// Sum of retained counts.
    std::int64_t total_tokens() const;

    void save(const std::string& path) const; // TSV word<TAB>id<TAB>count, sorted by id
    static Vocabulary load(const std::string& path);
};

using StopwordSet = std::unordered_set<std::string>;

/// One lowercased token per line; blank lines ignored.
StopwordSet load_stopwords(const std::string& path);

/// Builds a Vocabulary from a token-record corpus stream (see ConllReader for
/// the format). Tokens are lowercased before counting; stopwords are never
/// retained regardless of count.
Vocabulary build_vocabulary(std::istream& corpus, std::int64_t min_count,
                            const StopwordSet& stopwords = {});

/// Merge-friendly building block: raw lowercased counts for one corpus shard.
using RawCounts = std::unordered_map<std::string, std::int64_t>;
RawCounts count_tokens(std::istream& corpus);
void merge_counts(RawCounts& into, const RawCounts& from);
Vocabulary vocabulary_from_counts(const RawCounts& counts, std::int64_t min_count,
                                  const StopwordSet& stopwords = {});

} // namespace syntens
