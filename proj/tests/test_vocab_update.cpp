#include <doctest.h>

#include <algorithm>
#include <set>

#include "test_support.hpp"
#include "vocabdrift/errors.hpp"
#include "vocabdrift/tokenizer.hpp"
#include "vocabdrift/vocab_update.hpp"

using namespace vocabdrift;
using vocab_update::plan_section_update;
using testsupport::Rng;
using testsupport::doc;

namespace {

TokenCounts counts_of(std::initializer_list<std::pair<const char*, std::int64_t>> items) {
    TokenCounts counts;
    for (const auto& [token, count] : items) counts[token] = count;
    return counts;
}

std::set<std::string> result_tokens(const vocab_update::SectionPlan& plan) {
    std::set<std::string> tokens(plan.kept.begin(), plan.kept.end());
    tokens.insert(plan.added.begin(), plan.added.end());
    tokens.insert(plan.retained.begin(), plan.retained.end());
    return tokens;
}

} // namespace

TEST_CASE("section update keeps survivors and admits the most frequent") {
    const auto plan = plan_section_update(
        {"a", "b", "c", "d"}, counts_of({{"c", 5}, {"e", 4}, {"d", 3}, {"f", 2}, {"g", 1}}), 1,
        Section::Wordpiece);
    CHECK(plan.kept == std::vector<std::string>{"c", "d"});
    CHECK(plan.removed == std::vector<std::string>{"a", "b"});
    CHECK(plan.added == std::vector<std::string>{"e", "f"});
    CHECK(plan.retained.empty());
    CHECK(result_tokens(plan) == std::set<std::string>{"c", "d", "e", "f"});
}

TEST_CASE("section update with full survival changes nothing") {
    const auto plan = plan_section_update({"a", "b"}, counts_of({{"a", 3}, {"b", 2}, {"c", 1}}), 1,
                                          Section::Wordpiece);
    CHECK(plan.removed.empty());
    CHECK(plan.added.empty());
    CHECK(result_tokens(plan) == std::set<std::string>{"a", "b"});
}

TEST_CASE("section update retains stale tokens when candidates run out") {
    const auto plan =
        plan_section_update({"a", "b"}, counts_of({{"c", 1}}), 1, Section::Wordpiece);
    CHECK(plan.kept.empty());
    CHECK(plan.added == std::vector<std::string>{"c"});
    CHECK(plan.retained == std::vector<std::string>{"a"}); // count tie, lexicographic
    CHECK(plan.removed == std::vector<std::string>{"b"});
    CHECK(result_tokens(plan).size() == 2);
}

TEST_CASE("section update respects min_count for candidacy") {
    const auto plan = plan_section_update(
        {"a"}, counts_of({{"a", 1}, {"b", 5}, {"c", 2}}), 2, Section::Wordpiece);
    // "a" falls below min_count so it is stale, but its raw count 1 beats
    // nothing: vacancies are filled by b first.
    CHECK(plan.kept.empty());
    CHECK(plan.added == std::vector<std::string>{"b"});
    CHECK(plan.removed == std::vector<std::string>{"a"});
}

TEST_CASE("update_vocabulary admits new words and preserves sizes") {
    // Current vocabulary trained on an old corpus.
    std::vector<corpus::Document> old_docs;
    std::vector<corpus::Document> new_docs;
    for (int i = 0; i < 30; ++i) {
        old_docs.push_back(doc("o" + std::to_string(i), "alpha beta gamma delta"));
        new_docs.push_back(doc("n" + std::to_string(i), "alpha beta zeta zeta epsilon"));
    }
    tokenizer::InductionParams params;
    params.wordpiece_capacity = 40;
    params.hashtag_capacity = 0;
    params.mode = HashtagMode::BreakDown;
    const auto current = tokenizer::induce_vocabulary(old_docs, params);

    const auto result = vocab_update::update_vocabulary(current, new_docs, 1);
    CHECK(result.vocabulary.section_size(Section::Wordpiece) ==
          current.section_size(Section::Wordpiece));
    CHECK(result.vocabulary.entries().size() == current.entries().size());

    // "zeta" dominates the new epoch; it must be admitted as a whole piece.
    CHECK(result.vocabulary.contains("zeta"));
    const auto& wp_plan = result.plans.front();
    CHECK(std::find(wp_plan.added.begin(), wp_plan.added.end(), "zeta") != wp_plan.added.end());

    CHECK_THROWS_AS(vocab_update::update_vocabulary(current, std::vector<corpus::Document>{}, 1),
                    InputError);
}

TEST_CASE("update is idempotent on the same corpus") {
    std::vector<corpus::Document> old_docs;
    std::vector<corpus::Document> new_docs;
    Rng rng(99);
    for (int i = 0; i < 25; ++i) {
        std::string old_text;
        std::string new_text;
        for (int w = 0; w < 5; ++w) {
            if (!old_text.empty()) old_text.push_back(' ');
            if (!new_text.empty()) new_text.push_back(' ');
            old_text += rng.word(2, 5, 4);
            new_text += rng.word(2, 5, 4);
        }
        old_docs.push_back(doc("o" + std::to_string(i), old_text));
        new_docs.push_back(doc("n" + std::to_string(i), new_text));
    }
    tokenizer::InductionParams params;
    params.wordpiece_capacity = 30;
    params.hashtag_capacity = 0;
    params.mode = HashtagMode::BreakDown;
    const auto current = tokenizer::induce_vocabulary(old_docs, params);

    const auto first = vocab_update::update_vocabulary(current, new_docs, 1);
    const auto second = vocab_update::update_vocabulary(first.vocabulary, new_docs, 1);
    for (const auto& plan : second.plans) {
        CHECK(plan.removed.empty());
        CHECK(plan.added.empty());
    }
    REQUIRE(second.vocabulary.entries().size() == first.vocabulary.entries().size());
    for (std::size_t i = 0; i < first.vocabulary.entries().size(); ++i) {
        CHECK(second.vocabulary.entries()[i].token == first.vocabulary.entries()[i].token);
    }
}

TEST_CASE("update handles both sections in whole-hashtag mode") {
    std::vector<corpus::Document> old_docs;
    std::vector<corpus::Document> new_docs;
    for (int i = 0; i < 20; ++i) {
        old_docs.push_back(doc("o" + std::to_string(i), "word #old #old stay"));
        new_docs.push_back(doc("n" + std::to_string(i), "word #new #new stay"));
    }
    tokenizer::InductionParams params;
    params.wordpiece_capacity = 30;
    params.hashtag_capacity = 1;
    params.mode = HashtagMode::WholeHashtags;
    const auto current = tokenizer::induce_vocabulary(old_docs, params);
    REQUIRE(current.hashtag_section_contains("#old"));

    const auto result = vocab_update::update_vocabulary(current, new_docs, 1);
    REQUIRE(result.plans.size() == 2);
    const auto& ht_plan = result.plans.back();
    CHECK(ht_plan.section == Section::Hashtag);
    CHECK(ht_plan.removed == std::vector<std::string>{"#old"});
    CHECK(ht_plan.added == std::vector<std::string>{"#new"});
    CHECK(result.vocabulary.hashtag_section_contains("#new"));
    CHECK(!result.vocabulary.hashtag_section_contains("#old"));
}

TEST_CASE("update determinism across execution modes") {
    std::vector<corpus::Document> old_docs;
    std::vector<corpus::Document> new_docs;
    Rng rng(123);
    for (int i = 0; i < 40; ++i) {
        std::string t;
        for (int w = 0; w < 6; ++w) {
            if (!t.empty()) t.push_back(' ');
            t += rng.word(2, 5, 5);
        }
        (i % 2 == 0 ? old_docs : new_docs).push_back(doc("d" + std::to_string(i), t));
    }
    tokenizer::InductionParams params;
    params.wordpiece_capacity = 25;
    params.hashtag_capacity = 0;
    params.mode = HashtagMode::BreakDown;
    const auto current = tokenizer::induce_vocabulary(old_docs, params, ExecMode::Serial);

    const auto serial = vocab_update::update_vocabulary(current, new_docs, 1, ExecMode::Serial);
    const auto parallel = vocab_update::update_vocabulary(current, new_docs, 1, ExecMode::Parallel);
    REQUIRE(serial.vocabulary.entries().size() == parallel.vocabulary.entries().size());
    for (std::size_t i = 0; i < serial.vocabulary.entries().size(); ++i) {
        CHECK(serial.vocabulary.entries()[i].token == parallel.vocabulary.entries()[i].token);
        CHECK(serial.vocabulary.entries()[i].count == parallel.vocabulary.entries()[i].count);
    }
    for (std::size_t p = 0; p < serial.plans.size(); ++p) {
        CHECK(serial.plans[p].added == parallel.plans[p].added);
        CHECK(serial.plans[p].removed == parallel.plans[p].removed);
    }
}
