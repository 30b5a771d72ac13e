#include "syntens/conll.hpp"

#include <istream>
#include <sstream>

#include "syntens/errors.hpp"

namespace syntens {

bool ConllReader::next(ParsedSentence& out) {
    out.tokens.clear();
    out.start_line = 0;
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (!out.tokens.empty()) break; // sentence boundary
            continue;                       // leading blank lines
        }
        if (out.tokens.empty()) out.start_line = line_;

        // FORM<TAB>HEAD<TAB>DEPREL, extra columns ignored
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos) {
            throw DataError("line " + std::to_string(line_) +
                            ": expected FORM<TAB>HEAD<TAB>DEPREL");
        }
        std::size_t t3 = line.find('\t', t2 + 1);
        if (t3 == std::string::npos) t3 = line.size();

        Token tok;
        tok.form = line.substr(0, t1);
        const std::string head_s = line.substr(t1 + 1, t2 - t1 - 1);
        tok.deprel = line.substr(t2 + 1, t3 - t2 - 1);
        try {
            std::size_t pos = 0;
            tok.head = std::stoi(head_s, &pos);
            if (pos != head_s.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError("line " + std::to_string(line_) + ": malformed head index '" +
                            head_s + "'");
        }
        if (tok.form.empty())
            throw DataError("line " + std::to_string(line_) + ": empty token form");
        if (tok.deprel.empty())
            throw DataError("line " + std::to_string(line_) + ": empty relation label");
        out.tokens.push_back(std::move(tok));
    }
    if (out.tokens.empty()) return false;

    const int len = static_cast<int>(out.tokens.size());
    for (int i = 0; i < len; ++i) {
        const int h = out.tokens[i].head;
        if (h < 0 || h > len) {
            throw DataError("line " + std::to_string(out.start_line + i) +
                            ": head index " + std::to_string(h) + " outside [0, " +
                            std::to_string(len) + "]");
        }
    }
    return true;
}

const char* relation_name(Relation r) {
    return r == Relation::AdjNoun ? "an" : "vo";
}

Relation relation_from_name(const std::string& s) {
    if (s == "an") return Relation::AdjNoun;
    if (s == "vo") return Relation::VerbObj;
    throw DataError("unknown relation name '" + s + "' (want an|vo)");
}

RelationMap RelationMap::defaults() {
    RelationMap m;
    m.label_to_relation = {{"amod", Relation::AdjNoun},
                           {"obj", Relation::VerbObj},
                           {"dobj", Relation::VerbObj}};
    return m;
}

RelationMap RelationMap::parse(const std::string& text) {
    RelationMap m;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw DataError("relation map entry '" + item + "' is not label=an|vo");
        m.label_to_relation[item.substr(0, eq)] = relation_from_name(item.substr(eq + 1));
    }
    if (m.label_to_relation.empty()) throw DataError("empty relation map");
    return m;
}

std::vector<SyntacticPair> extract_pairs(const ParsedSentence& sentence, const Vocabulary& vocab,
                                         const RelationMap& relations) {
    std::vector<SyntacticPair> pairs;
    const int len = static_cast<int>(sentence.tokens.size());
    for (int i = 0; i < len; ++i) {
        const Token& tok = sentence.tokens[i];
        auto rel_it = relations.label_to_relation.find(tok.deprel);
        if (rel_it == relations.label_to_relation.end()) continue;
        if (tok.head < 0 || tok.head > len) {
            throw DataError("sentence at line " + std::to_string(sentence.start_line) +
                            ": head index " + std::to_string(tok.head) + " out of range");
        }
        if (tok.head == 0) continue; // dependency on the virtual root, no head word
        const int head_pos = tok.head - 1;
        if (head_pos == i) continue; // self-loop, ignore

        const Relation rel = rel_it->second;
        // AdjNoun: head (noun) is the root. VerbObj: dependent (object) is the root.
        const int root_pos = rel == Relation::AdjNoun ? head_pos : i;
        const int dep_pos = rel == Relation::AdjNoun ? i : head_pos;
        const std::int64_t root_id = vocab.lookup_form(sentence.tokens[root_pos].form);
        const std::int64_t dep_id = vocab.lookup_form(sentence.tokens[dep_pos].form);
        if (root_id < 0 || dep_id < 0) continue;

        SyntacticPair p;
        p.root_id = static_cast<std::uint32_t>(root_id);
        p.dep_id = static_cast<std::uint32_t>(dep_id);
        p.root_pos = root_pos;
        p.dep_pos = dep_pos;
        p.relation = rel;
        pairs.push_back(p);
    }
    return pairs;
}

IdSentence map_to_ids(const ParsedSentence& sentence, const Vocabulary& vocab) {
    IdSentence out;
    out.ids.reserve(sentence.tokens.size());
    for (const Token& tok : sentence.tokens) {
        out.ids.push_back(static_cast<std::int32_t>(vocab.lookup_form(tok.form)));
    }
    return out;
}

} // namespace syntens
