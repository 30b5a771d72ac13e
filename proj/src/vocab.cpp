#include "syntens/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "syntens/conll.hpp"
#include "syntens/errors.hpp"
#include "syntens/io_util.hpp"

namespace syntens {

std::string ascii_lower(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

std::int64_t Vocabulary::total_tokens() const {
    return std::accumulate(count.begin(), count.end(), std::int64_t{0});
}

void Vocabulary::save(const std::string& path) const {
    atomic_write(path, [&](std::ostream& out) {
        for (std::size_t i = 0; i < word_of.size(); ++i) {
            out << word_of[i] << '\t' << i << '\t' << count[i] << '\n';
        }
    });
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary file: " + path);
    Vocabulary v;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string word, id_s, count_s;
        if (!std::getline(ss, word, '\t') || !std::getline(ss, id_s, '\t') ||
            !std::getline(ss, count_s, '\t')) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected word<TAB>id<TAB>count");
        }
        std::size_t id = 0;
        std::int64_t c = 0;
        try {
            id = std::stoull(id_s);
            c = std::stoll(count_s);
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad id or count");
        }
        if (id != v.word_of.size())
            throw DataError(path + ":" + std::to_string(lineno) + ": ids must be dense and sorted");
        v.word_of.push_back(word);
        v.count.push_back(c);
        v.id_of.emplace(word, static_cast<std::uint32_t>(id));
    }
    return v;
}

StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stopword file: " + path);
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        set.insert(ascii_lower(line));
    }
    return set;
}

RawCounts count_tokens(std::istream& corpus) {
    RawCounts counts;
    ConllReader reader(corpus);
    ParsedSentence sent;
    while (reader.next(sent)) {
        for (const Token& tok : sent.tokens) {
            ++counts[ascii_lower(tok.form)];
        }
    }
    return counts;
}

void merge_counts(RawCounts& into, const RawCounts& from) {
    for (const auto& [word, c] : from) into[word] += c;
}

Vocabulary vocabulary_from_counts(const RawCounts& counts, std::int64_t min_count,
                                  const StopwordSet& stopwords) {
    if (min_count < 1) throw std::invalid_argument("build_vocabulary: min_count must be >= 1");
    std::vector<std::pair<std::string, std::int64_t>> retained;
    retained.reserve(counts.size());
    for (const auto& [word, c] : counts) {
        if (c >= min_count && !stopwords.count(word)) retained.emplace_back(word, c);
    }
    std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary v;
    v.min_count = min_count;
    v.word_of.reserve(retained.size());
    v.count.reserve(retained.size());
    for (auto& [word, c] : retained) {
        v.id_of.emplace(word, static_cast<std::uint32_t>(v.word_of.size()));
        v.word_of.push_back(word);
        v.count.push_back(c);
    }
    return v;
}

Vocabulary build_vocabulary(std::istream& corpus, std::int64_t min_count,
                            const StopwordSet& stopwords) {
    if (min_count < 1) throw std::invalid_argument("build_vocabulary: min_count must be >= 1");
    RawCounts counts = count_tokens(corpus);
    Vocabulary v = vocabulary_from_counts(counts, min_count, stopwords);
    return v;
}

} // namespace syntens
