#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "syntens/conll.hpp"
#include "syntens/errors.hpp"
#include "syntens/vocab.hpp"

using namespace syntens;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// three toy sentences: "the red car", "a red ball", "kick the ball"
const char* kToyCorpus =
    "The\t3\tdet\n"
    "red\t3\tamod\n"
    "car\t0\troot\n"
    "\n"
    "a\t3\tdet\n"
    "red\t3\tamod\n"
    "ball\t0\troot\n"
    "\n"
    "kick\t0\troot\n"
    "the\t3\tdet\n"
    "ball\t1\tdobj\n"
    "\n";

} // namespace

TEST_CASE("build_vocabulary threshold arithmetic") {
    std::istringstream corpus("a\t0\troot\n\na\t0\troot\n\nb\t0\troot\n\n");
    const Vocabulary v = build_vocabulary(corpus, 2);
    CHECK(v.size() == 1);
    CHECK(v.lookup("a") == 0);
    CHECK(v.count[0] == 2);
    CHECK(v.lookup("b") == -1);
}

TEST_CASE("build_vocabulary order, ties, stopwords, lowercasing") {
    std::istringstream corpus(kToyCorpus);
    const Vocabulary v = build_vocabulary(corpus, 1, StopwordSet{"the", "a"});
    // counts: red 2, ball 2, car 1, kick 1; ties lexicographic
    REQUIRE(v.size() == 4);
    CHECK(v.word_of[0] == "ball");
    CHECK(v.word_of[1] == "red");
    CHECK(v.word_of[2] == "car");
    CHECK(v.word_of[3] == "kick");
    CHECK(v.count[0] == 2);
    CHECK(v.count[2] == 1);
    CHECK(v.lookup("the") == -1);
    // "The" was lowercased before the stopword check
    CHECK(v.lookup_form("RED") == 1);
}

TEST_CASE("build_vocabulary hand tally on the toy corpus") {
    std::istringstream corpus(kToyCorpus);
    const Vocabulary v = build_vocabulary(corpus, 1);
    // the 2, ball 2, red 2, a 1, car 1, kick 1
    REQUIRE(v.size() == 6);
    CHECK(v.count[v.lookup("the")] == 2);
    CHECK(v.count[v.lookup("red")] == 2);
    CHECK(v.count[v.lookup("ball")] == 2);
    CHECK(v.count[v.lookup("a")] == 1);
    CHECK(v.count[v.lookup("car")] == 1);
    CHECK(v.count[v.lookup("kick")] == 1);
    CHECK(v.total_tokens() == 9);
}

TEST_CASE("empty corpus gives empty vocabulary") {
    std::istringstream corpus("");
    const Vocabulary v = build_vocabulary(corpus, 1);
    CHECK(v.size() == 0);
}

TEST_CASE("vocabulary serialization round-trips bit-exactly") {
    std::istringstream corpus(kToyCorpus);
    const Vocabulary v = build_vocabulary(corpus, 1);
    const std::string path = tmp_path("syntens_vocab_test.tsv");
    v.save(path);
    const Vocabulary w = Vocabulary::load(path);
    REQUIRE(w.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(w.word_of[i] == v.word_of[i]);
        CHECK(w.count[i] == v.count[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("reader validates head indices with line numbers") {
    std::istringstream bad("x\t9\tamod\n\n");
    ConllReader reader(bad);
    ParsedSentence sent;
    CHECK_THROWS_WITH_AS(reader.next(sent), doctest::Contains("line 1"), DataError);

    std::istringstream bad2("x\tzz\tamod\n\n");
    ConllReader reader2(bad2);
    CHECK_THROWS_WITH_AS(reader2.next(sent), doctest::Contains("malformed head"), DataError);

    std::istringstream bad3("only_form\n\n");
    ConllReader reader3(bad3);
    CHECK_THROWS_AS(reader3.next(sent), DataError);
}

TEST_CASE("extract_pairs maps amod and dobj with the root-word convention") {
    std::istringstream corpus(kToyCorpus);
    const Vocabulary v = build_vocabulary(corpus, 1);

    std::istringstream again(kToyCorpus);
    ConllReader reader(again);
    ParsedSentence sent;

    REQUIRE(reader.next(sent)); // the red car
    auto pairs = extract_pairs(sent, v);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].root_id == static_cast<std::uint32_t>(v.lookup("car")));
    CHECK(pairs[0].dep_id == static_cast<std::uint32_t>(v.lookup("red")));
    CHECK(pairs[0].relation == Relation::AdjNoun);
    CHECK(pairs[0].root_pos == 2);
    CHECK(pairs[0].dep_pos == 1);

    REQUIRE(reader.next(sent)); // a red ball
    pairs = extract_pairs(sent, v);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].root_id == static_cast<std::uint32_t>(v.lookup("ball")));

    REQUIRE(reader.next(sent)); // kick the ball: object is the root
    pairs = extract_pairs(sent, v);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].root_id == static_cast<std::uint32_t>(v.lookup("ball")));
    CHECK(pairs[0].dep_id == static_cast<std::uint32_t>(v.lookup("kick")));
    CHECK(pairs[0].relation == Relation::VerbObj);
    CHECK(pairs[0].root_pos == 2);
    CHECK(pairs[0].dep_pos == 0);
}

TEST_CASE("extract_pairs drops out-of-vocabulary pairs") {
    std::istringstream corpus(kToyCorpus);
    // vocabulary without "red": amod pairs vanish
    const Vocabulary v = build_vocabulary(corpus, 1, StopwordSet{"red"});
    std::istringstream again(kToyCorpus);
    ConllReader reader(again);
    ParsedSentence sent;
    REQUIRE(reader.next(sent));
    CHECK(extract_pairs(sent, v).empty());
}

TEST_CASE("extract_pairs emits one pair per edge (two adjectives -> two pairs)") {
    const char* text =
        "big\t3\tamod\n"
        "red\t3\tamod\n"
        "car\t0\troot\n"
        "\n";
    std::istringstream vocab_in(text);
    const Vocabulary v = build_vocabulary(vocab_in, 1);
    std::istringstream in(text);
    ConllReader reader(in);
    ParsedSentence sent;
    REQUIRE(reader.next(sent));
    const auto pairs = extract_pairs(sent, v);
    CHECK(pairs.size() == 2);
}

TEST_CASE("relation map parsing and configurability") {
    const RelationMap custom = RelationMap::parse("nmod=an,obj=vo");
    CHECK(custom.label_to_relation.at("nmod") == Relation::AdjNoun);
    CHECK(custom.label_to_relation.at("obj") == Relation::VerbObj);
    CHECK_THROWS_AS(RelationMap::parse("nonsense"), DataError);
    CHECK_THROWS_AS(relation_from_name("xx"), DataError);
}

TEST_CASE("ingestion is deterministic") {
    std::istringstream c1(kToyCorpus), c2(kToyCorpus);
    const Vocabulary v1 = build_vocabulary(c1, 1);
    const Vocabulary v2 = build_vocabulary(c2, 1);
    REQUIRE(v1.size() == v2.size());
    for (std::size_t i = 0; i < v1.size(); ++i) {
        CHECK(v1.word_of[i] == v2.word_of[i]);
        CHECK(v1.count[i] == v2.count[i]);
    }
}

TEST_CASE("map_to_ids marks OOV with -1") {
    std::istringstream corpus(kToyCorpus);
    const Vocabulary v = build_vocabulary(corpus, 2); // only the/red/ball survive
    std::istringstream again(kToyCorpus);
    ConllReader reader(again);
    ParsedSentence sent;
    REQUIRE(reader.next(sent)); // the red car
    const IdSentence ids = map_to_ids(sent, v);
    REQUIRE(ids.size() == 3);
    CHECK(ids.ids[0] == v.lookup("the"));
    CHECK(ids.ids[1] == v.lookup("red"));
    CHECK(ids.ids[2] == -1);
}
