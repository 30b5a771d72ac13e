#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "syntens/vocab.hpp"

namespace syntens {

/// One token record from a dependency-parsed corpus.
struct Token {
    std::string form;
    int head = 0; // 1-based index of the head token; 0 = sentence root
    std::string deprel;
};

struct ParsedSentence {
    std::vector<Token> tokens;
    std::int64_t start_line = 0; // first line of the sentence in the source file
};

/// Reader for the tab-separated token-record format:
///
///   FORM<TAB>HEAD<TAB>DEPREL[<TAB>ignored...]
///
/// with a blank line ending each sentence. Head indices are validated against
/// the sentence length; violations raise DataError naming the line.
class ConllReader {
public:
    explicit ConllReader(std::istream& in) : in_(in) {}

    /// Reads the next sentence; returns false at end of input.
    bool next(ParsedSentence& out);

    std::int64_t line() const { return line_; }

private:
    std::istream& in_;
    std::int64_t line_ = 0;
};

enum class Relation : std::uint8_t { AdjNoun = 0, VerbObj = 1 };

const char* relation_name(Relation r);              // "an" / "vo"
Relation relation_from_name(const std::string& s);  // throws DataError on unknown

/// Dependency label -> phrase relation. For AdjNoun edges the head token is
/// the root word (the noun); for VerbObj edges the dependent token is the root
/// word (the object). Defaults: amod -> AdjNoun, obj/dobj -> VerbObj.
struct RelationMap {
    std::unordered_map<std::string, Relation> label_to_relation;

    static RelationMap defaults();
    /// Parses "amod=an,obj=vo,dobj=vo".
    static RelationMap parse(const std::string& text);
};

/// A syntactic word pair found in one sentence. root/dep positions are 0-based
/// token indices; `root_pos` anchors context windows.
struct SyntacticPair {
    std::uint32_t root_id = 0;
    std::uint32_t dep_id = 0;
    int root_pos = 0;
    int dep_pos = 0;
    Relation relation = Relation::AdjNoun;
};

/// One pair per dependency edge whose label is in the map. Pairs with either
/// word out of vocabulary are dropped.
std::vector<SyntacticPair> extract_pairs(const ParsedSentence& sentence, const Vocabulary& vocab,
                                         const RelationMap& relations = RelationMap::defaults());

/// Token ids for a sentence; -1 marks out-of-vocabulary tokens.
struct IdSentence {
    std::vector<std::int32_t> ids;
    std::size_t size() const { return ids.size(); }
};

IdSentence map_to_ids(const ParsedSentence& sentence, const Vocabulary& vocab);

} // namespace syntens
