#include <doctest.h>

#include <algorithm>
#include <set>

#include "test_support.hpp"
#include "vocabdrift/drift.hpp"
#include "vocabdrift/errors.hpp"

using namespace vocabdrift;
using testsupport::Rng;
using testsupport::doc;

namespace {

drift::TopKVocab vocab_of(std::vector<std::string> tokens,
                          drift::TokenKind kind = drift::TokenKind::NaturalWord) {
    drift::TopKVocab v;
    v.kind = kind;
    v.k = tokens.size();
    v.tokens = std::move(tokens);
    return v;
}

/// Set oracle: materialize union and intersection, then apply the formula.
double shift_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::set<std::string> sa(a.begin(), a.end());
    const std::set<std::string> sb(b.begin(), b.end());
    std::set<std::string> uni = sa;
    uni.insert(sb.begin(), sb.end());
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni.size());
}

} // namespace

TEST_CASE("vocab_shift endpoint cases") {
    CHECK(drift::vocab_shift(vocab_of({"a", "b"}), vocab_of({"a", "b"})) == 0.0);
    CHECK(drift::vocab_shift(vocab_of({"a", "b"}), vocab_of({"c", "d"})) == 1.0);
    CHECK(drift::vocab_shift(vocab_of({"a", "b", "c"}), vocab_of({"b", "c", "d"})) ==
          doctest::Approx(0.5));
    CHECK_THROWS_AS(drift::vocab_shift(vocab_of({}), vocab_of({"a"})), InputError);
    CHECK_THROWS_AS(drift::vocab_shift(vocab_of({"a"}),
                                       vocab_of({"a"}, drift::TokenKind::Hashtag)),
                    InvariantError);
}

TEST_CASE("vocab_shift equals the set oracle and is symmetric") {
    Rng rng(31);
    for (int round = 0; round < 500; ++round) {
        std::vector<std::string> a;
        std::vector<std::string> b;
        const auto fill = [&](std::vector<std::string>& v) {
            const int n = 1 + static_cast<int>(rng.below(20));
            std::set<std::string> seen;
            while (static_cast<int>(seen.size()) < n) seen.insert(rng.word(1, 3, 5));
            v.assign(seen.begin(), seen.end());
        };
        fill(a);
        fill(b);
        const double ab = drift::vocab_shift(vocab_of(a), vocab_of(b));
        CHECK(ab == shift_oracle(a, b));
        CHECK(ab == drift::vocab_shift(vocab_of(b), vocab_of(a)));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        const bool equal_sets = std::set<std::string>(a.begin(), a.end()) ==
                                std::set<std::string>(b.begin(), b.end());
        CHECK((ab == 0.0) == equal_sets);
    }
}

TEST_CASE("top_k_vocab selects by kind with lexicographic ties") {
    const std::vector<corpus::Document> docs = {doc("d1", "a a b"), doc("d2", "go #usa #usa")};

    const auto words = drift::top_k_vocab(docs, drift::TokenKind::NaturalWord, 1);
    CHECK(words.tokens == std::vector<std::string>{"a"});

    const auto tied = drift::top_k_vocab(std::vector<corpus::Document>{doc("d", "b a")},
                                         drift::TokenKind::NaturalWord, 2);
    CHECK(tied.tokens == std::vector<std::string>{"a", "b"});

    const auto hashtags = drift::top_k_vocab(docs, drift::TokenKind::Hashtag, 1);
    CHECK(hashtags.tokens == std::vector<std::string>{"#usa"});

    CHECK_THROWS_AS(
        drift::top_k_vocab(std::vector<corpus::Document>{doc("d", "plain words")},
                           drift::TokenKind::Hashtag, 3),
        InputError);
}

TEST_CASE("top_k_vocab is invariant under document reordering") {
    Rng rng(77);
    std::vector<corpus::Document> docs;
    for (int i = 0; i < 40; ++i) {
        std::string text;
        for (int w = 0; w < 5; ++w) {
            if (!text.empty()) text.push_back(' ');
            text += rng.word(1, 4, 4);
        }
        docs.push_back(doc("d" + std::to_string(i), text));
    }
    auto shuffled = docs;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    }
    const auto a = drift::top_k_vocab(docs, drift::TokenKind::NaturalWord, 10);
    const auto b = drift::top_k_vocab(shuffled, drift::TokenKind::NaturalWord, 10);
    CHECK(a.tokens == b.tokens);

    const auto wa = drift::top_k_vocab(docs, drift::TokenKind::Wordpiece, 10);
    const auto wb = drift::top_k_vocab(shuffled, drift::TokenKind::Wordpiece, 10);
    CHECK(wa.tokens == wb.tokens);
}

TEST_CASE("cooccurrence_profile counts once per document") {
    const std::vector<corpus::Document> docs = {doc("d1", "x a b"), doc("d2", "x a c")};
    const auto profile = drift::cooccurrence_profile(docs, "x", 2);
    CHECK(profile.top_words == std::vector<std::string>{"a", "b"});

    const auto all = drift::cooccurrence_profile(docs, "x", 10);
    CHECK(all.top_words == std::vector<std::string>{"a", "b", "c"});

    CHECK_THROWS_WITH_AS(drift::cooccurrence_profile(docs, "zz", 2),
                         doctest::Contains("zz"), InputError);

    // Repeats inside one document still count once.
    const std::vector<corpus::Document> rep = {doc("d1", "x y y y"), doc("d2", "x z")};
    const auto p = drift::cooccurrence_profile(rep, "x", 2);
    CHECK(p.top_words == std::vector<std::string>{"y", "z"});
}

TEST_CASE("semantic_shift_rate over equal-size profiles") {
    drift::CooccurrenceProfile p1{"x", 2013, {"a", "b", "c", "d"}};
    drift::CooccurrenceProfile p2{"x", 2014, {"c", "d", "e", "f"}};
    CHECK(drift::semantic_shift_rate(p1, p1) == 0.0);
    CHECK(drift::semantic_shift_rate(p1, p2) == doctest::Approx(0.5));

    drift::CooccurrenceProfile disjoint{"x", 2014, {"p", "q", "r", "s"}};
    CHECK(drift::semantic_shift_rate(p1, disjoint) == 1.0);

    drift::CooccurrenceProfile other{"y", 2014, {"a", "b", "c", "d"}};
    CHECK_THROWS_AS(drift::semantic_shift_rate(p1, other), InvariantError);
    drift::CooccurrenceProfile shorter{"x", 2014, {"a", "b"}};
    CHECK_THROWS_AS(drift::semantic_shift_rate(p1, shorter), InvariantError);
}

TEST_CASE("semantic_shift_rate is zero on any self-comparison") {
    Rng rng(404);
    for (int round = 0; round < 100; ++round) {
        std::set<std::string> words;
        const int n = 1 + static_cast<int>(rng.below(8));
        while (static_cast<int>(words.size()) < n) words.insert(rng.word(1, 5));
        drift::CooccurrenceProfile p{"anchor", 2013, {words.begin(), words.end()}};
        CHECK(drift::semantic_shift_rate(p, p) == 0.0);
    }
}
