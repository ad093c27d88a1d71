#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "vocabdrift/errors.hpp"
#include "vocabdrift/signals.hpp"
#include "vocabdrift/tokenizer.hpp"

using namespace vocabdrift;
using testsupport::Rng;
using testsupport::TempDir;
using testsupport::doc;

namespace {

signals::EmbeddingSnapshot snapshot(
    std::initializer_list<std::pair<const char*, std::vector<double>>> items,
    const std::string& label = "ck") {
    signals::EmbeddingSnapshot snap;
    snap.label = label;
    for (const auto& [token, vec] : items) {
        snap.dim = vec.size();
        snap.vectors.emplace(token, vec);
    }
    return snap;
}

Vocabulary word_vocab(const std::vector<std::string>& words) {
    std::vector<VocabEntry> entries;
    for (const auto& w : words) entries.push_back({w, 1, Section::Wordpiece});
    return Vocabulary(std::move(entries), std::max<std::size_t>(words.size(), 1), 0);
}

double w_s_of(const std::vector<signals::SignalScore>& scores, const std::string& id) {
    for (const auto& s : scores) {
        if (s.doc_id == id) return s.w_s;
    }
    FAIL("doc id not scored: " << id);
    return -1.0;
}

} // namespace

TEST_CASE("cosine_distance basics") {
    const std::vector<double> a = {1.0, 0.0};
    const std::vector<double> b = {1.0, 1.0};
    const std::vector<double> c = {0.0, 1.0};
    CHECK(signals::cosine_distance(a, a) == doctest::Approx(0.0));
    CHECK(signals::cosine_distance(a, c) == doctest::Approx(1.0));
    CHECK(signals::cosine_distance(a, b) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));

    const std::vector<double> zero = {0.0, 0.0};
    CHECK_THROWS_AS(signals::cosine_distance(a, zero), InputError);
    const std::vector<double> longer = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(signals::cosine_distance(a, longer), InvariantError);
}

TEST_CASE("normalize_length caps at ten pieces") {
    CHECK(signals::normalize_length(5) == doctest::Approx(0.5));
    CHECK(signals::normalize_length(10) == 1.0);
    CHECK(signals::normalize_length(25) == 1.0);
    CHECK(signals::normalize_length(0) == 0.0);
}

TEST_CASE("token_shift_scores keeps the top movers") {
    const auto prev = snapshot({{"t1", {1.0, 0.0}}, {"t2", {0.0, 1.0}}});
    const auto curr = snapshot({{"t1", {0.995, 0.1}}, {"t2", {0.6, 0.8}}});

    const auto top1 = signals::token_shift_scores(prev, curr, 1);
    REQUIRE(top1.size() == 1);
    CHECK(top1.count("t2") == 1);

    const auto all = signals::token_shift_scores(prev, curr, 10);
    CHECK(all.size() == 2);

    // Iteration 1: no previous checkpoint, new tokens score 1.
    const auto fresh = signals::token_shift_scores(std::nullopt, curr, 3, {"n1"});
    REQUIRE(fresh.size() == 1);
    CHECK(fresh.at("n1") == 1.0);

    const auto disjoint = snapshot({{"zz", {1.0, 0.0}}});
    CHECK_THROWS_AS(signals::token_shift_scores(disjoint, curr, 1), InputError);
}

TEST_CASE("token_shift_scores with unbounded top_x equals the distance map oracle") {
    Rng rng(6060);
    for (int round = 0; round < 50; ++round) {
        signals::EmbeddingSnapshot prev;
        signals::EmbeddingSnapshot curr;
        prev.dim = curr.dim = 3;
        const int n = 1 + static_cast<int>(rng.below(20));
        for (int i = 0; i < n; ++i) {
            const std::string token = "t" + std::to_string(i);
            std::vector<double> u = {rng.unit(), rng.unit(), rng.unit()};
            std::vector<double> v = {rng.unit(), rng.unit(), rng.unit()};
            prev.vectors.emplace(token, u);
            curr.vectors.emplace(token, v);
        }
        const auto got = signals::token_shift_scores(prev, curr, 1000);
        REQUIRE(got.size() == prev.vectors.size());
        for (const auto& [token, vec] : prev.vectors) {
            CHECK(got.at(token) ==
                  doctest::Approx(signals::cosine_distance(vec, curr.vectors.at(token))));
        }
    }
}

TEST_CASE("score_documents_token normalizes by the pool maximum") {
    const auto vocab = word_vocab({"t2", "x", "y"});
    const std::vector<corpus::Document> docs = {
        doc("docA", "t2 x"), doc("docB", "x y"), doc("docC", "t2 t2")};
    const std::map<std::string, double> token_scores = {{"t2", 0.4}};
    const auto scores = signals::score_documents_token(docs, token_scores, vocab);
    CHECK(w_s_of(scores, "docA") == doctest::Approx(0.5));
    CHECK(w_s_of(scores, "docB") == 0.0);
    CHECK(w_s_of(scores, "docC") == doctest::Approx(1.0));
    // Ordered by doc id.
    CHECK(scores.front().doc_id == "docA");
    CHECK(scores.back().doc_id == "docC");

    const auto none = signals::score_documents_token(docs, {}, vocab);
    for (const auto& s : none) CHECK(s.w_s == 0.0);
}

TEST_CASE("score_documents_sentence uses checkpoint distances") {
    const std::vector<corpus::Document> docs = {doc("a", "one two"), doc("b", "three four")};
    const auto prev = snapshot({{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}});

    SUBCASE("identical checkpoints score zero") {
        const auto scores = signals::score_documents_sentence(prev, prev, docs);
        for (const auto& s : scores) CHECK(s.w_s == 0.0);
    }
    SUBCASE("the shifted doc takes the maximum") {
        const auto curr = snapshot({{"a", {1.0, 0.0}}, {"b", {1.0, 0.0}}});
        const auto scores = signals::score_documents_sentence(prev, curr, docs);
        CHECK(w_s_of(scores, "a") == 0.0);
        CHECK(w_s_of(scores, "b") == doctest::Approx(1.0));
    }
    SUBCASE("first iteration weights by length alone") {
        const auto scores = signals::score_documents_sentence(std::nullopt, prev, docs);
        for (const auto& s : scores) {
            CHECK(s.w_s == 0.0);
            CHECK(s.w_t == doctest::Approx(0.2));
        }
    }
    SUBCASE("missing ids are named") {
        const auto partial = snapshot({{"a", {1.0, 0.0}}});
        CHECK_THROWS_WITH_AS(signals::score_documents_sentence(prev, partial, docs),
                             doctest::Contains("b"), InputError);
    }
}

TEST_CASE("surrogate loss is symmetric over equally likely pieces") {
    const std::vector<corpus::Document> reference = {doc("r1", "aa bb"), doc("r2", "cc dd")};
    const auto vocab = word_vocab({"aa", "bb", "cc", "dd"});
    signals::SurrogateMlmParams params;
    params.vocab = &vocab;

    const std::vector<corpus::Document> docs = {doc("d1", "aa cc"), doc("d2", "bb dd")};
    const auto scores = signals::surrogate_mlm_loss(docs, reference, params);
    for (const auto& s : scores) CHECK(s.w_s == doctest::Approx(1.0));
}

TEST_CASE("unseen pieces dominate the surrogate loss") {
    std::vector<corpus::Document> reference;
    for (int i = 0; i < 10; ++i) reference.push_back(doc("r" + std::to_string(i), "aa bb aa bb"));
    const auto vocab = word_vocab({"aa", "bb", "qq", "zz"});
    signals::SurrogateMlmParams params;
    params.vocab = &vocab;

    const std::vector<corpus::Document> docs = {doc("seen", "aa bb"), doc("fresh", "qq zz")};
    const auto scores = signals::surrogate_mlm_loss(docs, reference, params);
    CHECK(w_s_of(scores, "fresh") == doctest::Approx(1.0));
    CHECK(w_s_of(scores, "seen") < 1.0);

    // Oracle: unseen pieces carry -log(1/(N+V)), the largest possible loss.
    const auto pieces = tokenizer::count_pieces(vocab, reference);
    std::int64_t total = 0;
    for (const auto& [p, c] : pieces) total += c;
    const double max_loss = std::log(static_cast<double>(total) + pieces.size());
    const auto raws = signals::surrogate_raw_losses(docs, reference, params);
    CHECK(raws[1] == doctest::Approx(max_loss));

    const std::vector<corpus::Document> with_empty = {doc("e", ""), doc("f", "aa")};
    const auto empty_scores = signals::surrogate_mlm_loss(with_empty, reference, params);
    CHECK(w_s_of(empty_scores, "e") == 0.0);
    CHECK(empty_scores.front().w_t == 0.0);
}

TEST_CASE("surrogate loss ignores reference ordering and scales") {
    Rng rng(31337);
    std::vector<corpus::Document> reference;
    for (int i = 0; i < 20; ++i) {
        std::string text;
        for (int w = 0; w < 6; ++w) {
            if (!text.empty()) text.push_back(' ');
            text += rng.word(2, 4, 3);
        }
        reference.push_back(doc("r" + std::to_string(i), text));
    }
    std::vector<corpus::Document> docs;
    for (int i = 0; i < 8; ++i) {
        docs.push_back(doc("d" + std::to_string(i), rng.word(2, 4, 3) + " " + rng.word(2, 4, 3)));
    }
    auto shuffled = reference;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    }

    const auto a = signals::surrogate_mlm_loss(docs, reference);
    const auto b = signals::surrogate_mlm_loss(docs, shuffled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].doc_id == b[i].doc_id);
        CHECK(a[i].w_s == doctest::Approx(b[i].w_s));
    }
}

TEST_CASE("signal weights stay in range and hit the maximum") {
    Rng rng(2112);
    for (int round = 0; round < 40; ++round) {
        const auto vocab = word_vocab({"p", "q", "r"});
        std::vector<corpus::Document> docs;
        const int n = 2 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) {
            std::string text;
            const int words = static_cast<int>(rng.below(14));
            for (int w = 0; w < words; ++w) {
                if (!text.empty()) text.push_back(' ');
                text += (rng.below(2) == 0 ? "p" : (rng.below(2) == 0 ? "q" : "r"));
            }
            docs.push_back(doc("d" + std::to_string(i), text));
        }
        std::map<std::string, double> token_scores = {{"p", rng.unit()}, {"q", rng.unit()}};
        const auto scores = signals::score_documents_token(docs, token_scores, vocab);
        double best = 0.0;
        bool any_positive = false;
        for (const auto& s : scores) {
            CHECK(s.w_s >= 0.0);
            CHECK(s.w_s <= 1.0);
            CHECK(s.w_t >= 0.0);
            CHECK(s.w_t <= 1.0);
            best = std::max(best, s.w_s);
            any_positive = any_positive || s.w_s > 0.0;
        }
        if (any_positive) CHECK(best == doctest::Approx(1.0));

        // Scaling every token score leaves the normalized weights alone.
        std::map<std::string, double> scaled;
        for (const auto& [t, v] : token_scores) scaled[t] = v * 7.5;
        const auto rescored = signals::score_documents_token(docs, scaled, vocab);
        for (std::size_t i = 0; i < scores.size(); ++i) {
            CHECK(rescored[i].w_s == doctest::Approx(scores[i].w_s));
        }
    }
}

TEST_CASE("embedding snapshot TSV round-trip and validation") {
    TempDir dir("emb");
    auto snap = snapshot({{"tok", {0.25, -1.5}}, {"other", {1.0, 2.0}}});
    const std::string path = dir.file("emb.tsv");
    snap.save_tsv(path);
    const auto loaded = signals::EmbeddingSnapshot::load_tsv(path);
    CHECK(loaded.dim == 2);
    CHECK(loaded.vectors.at("tok") == std::vector<double>{0.25, -1.5});

    const std::string bad = dir.file("bad.tsv");
    testsupport::write_file(bad, "dim\t2\ntok\t1.0\n");
    CHECK_THROWS_AS(signals::EmbeddingSnapshot::load_tsv(bad), InputError);

    const std::string no_header = dir.file("nh.tsv");
    testsupport::write_file(no_header, "tok\t1.0 2.0\n");
    CHECK_THROWS_AS(signals::EmbeddingSnapshot::load_tsv(no_header), InputError);
}

TEST_CASE("score TSV round-trip keeps weights and kind") {
    TempDir dir("scores");
    const auto vocab = word_vocab({"w"});
    const std::vector<corpus::Document> docs = {doc("a", "w w w"), doc("b", "w")};
    const auto scores =
        signals::score_documents_token(docs, {{"w", 1.0}}, vocab);
    const std::string path = dir.file("scores.tsv");
    signals::save_scores_tsv(path, scores);
    const auto loaded = signals::load_scores_tsv(path);
    REQUIRE(loaded.size() == scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        CHECK(loaded[i].doc_id == scores[i].doc_id);
        CHECK(loaded[i].w_s == scores[i].w_s);
        CHECK(loaded[i].w_t == scores[i].w_t);
        CHECK(loaded[i].kind == signals::SignalKind::TokenShift);
    }
}

TEST_CASE("external raw scores must cover the pool") {
    const std::vector<corpus::Document> docs = {doc("a", "x"), doc("b", "y")};
    std::unordered_map<std::string, double> raw = {{"a", 2.0}, {"b", 1.0}};
    const auto scores = signals::scores_from_raw(docs, raw, signals::SignalKind::MlmLoss);
    CHECK(w_s_of(scores, "a") == 1.0);
    CHECK(w_s_of(scores, "b") == doctest::Approx(0.5));

    raw.erase("b");
    CHECK_THROWS_WITH_AS(signals::scores_from_raw(docs, raw, signals::SignalKind::MlmLoss),
                         doctest::Contains("b"), InputError);
}

TEST_CASE("mean sentence embedding surrogate averages known tokens") {
    const auto tokens = snapshot({{"x", {2.0, 0.0}}, {"y", {0.0, 2.0}}});
    const std::vector<corpus::Document> docs = {doc("d1", "x y"), doc("d2", "x unseen")};
    const auto set = signals::mean_sentence_embeddings(tokens, docs);
    CHECK(set.vectors.at("d1") == std::vector<double>{1.0, 1.0});
    CHECK(set.vectors.at("d2") == std::vector<double>{2.0, 0.0});
}
