#include "vocabdrift/vocab_update.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "vocabdrift/errors.hpp"
#include "vocabdrift/tokenizer.hpp"

namespace vocabdrift::vocab_update {

SectionPlan plan_section_update(const std::vector<std::string>& current_rank_order,
                                const TokenCounts& new_counts, std::int64_t min_count,
                                Section section) {
    SectionPlan plan;
    plan.section = section;

    TokenCounts eligible;
    for (const auto& [token, count] : new_counts) {
        if (count >= min_count) eligible.emplace(token, count);
    }
    const auto candidates = rank_tokens(eligible);
    std::unordered_set<std::string> candidate_set;
    candidate_set.reserve(candidates.size());
    for (const auto& [token, count] : candidates) candidate_set.insert(token);

    std::unordered_set<std::string> kept_set;
    std::vector<std::string> stale; // current rank order
    for (const auto& token : current_rank_order) {
        if (candidate_set.find(token) != candidate_set.end()) {
            kept_set.insert(token);
        } else {
            stale.push_back(token);
        }
    }
    for (const auto& [token, count] : candidates) {
        if (kept_set.find(token) != kept_set.end()) plan.kept.push_back(token);
    }

    for (const auto& [token, count] : candidates) {
        if (plan.added.size() >= stale.size()) break;
        if (kept_set.find(token) != kept_set.end()) continue;
        plan.added.push_back(token);
    }

    // Vacancies beyond the candidate supply: retain the stale tokens with
    // the highest new-epoch counts (raw, sub-threshold counts included).
    const std::size_t shortfall = stale.size() - plan.added.size();
    if (shortfall > 0) {
        std::vector<std::pair<std::string, std::int64_t>> ranked_stale;
        ranked_stale.reserve(stale.size());
        for (const auto& token : stale) {
            const auto it = new_counts.find(token);
            ranked_stale.emplace_back(token, it == new_counts.end() ? 0 : it->second);
        }
        std::sort(ranked_stale.begin(), ranked_stale.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        std::unordered_set<std::string> retained_set;
        for (std::size_t i = 0; i < shortfall; ++i) {
            plan.retained.push_back(ranked_stale[i].first);
            retained_set.insert(ranked_stale[i].first);
        }
        std::vector<std::string> still_removed;
        for (const auto& token : stale) {
            if (retained_set.find(token) == retained_set.end()) still_removed.push_back(token);
        }
        plan.removed = std::move(still_removed);
    } else {
        plan.removed = std::move(stale);
    }
    return plan;
}

namespace {

std::vector<std::string> section_rank_order(const Vocabulary& vocab, Section section) {
    std::vector<std::string> tokens;
    for (const VocabEntry* e : vocab.section_entries(section)) tokens.push_back(e->token);
    return tokens;
}

bool is_special(const std::string& token) {
    const auto& specials = special_tokens();
    return std::find(specials.begin(), specials.end(), token) != specials.end();
}

} // namespace

UpdateResult update_vocabulary(const Vocabulary& current, std::span<const Document> new_docs,
                               std::int64_t min_count, ExecMode mode) {
    if (new_docs.empty()) throw InputError("vocabulary update needs a non-empty corpus");

    // Candidate wordpieces come from the new data tokenized under its own
    // freshly induced vocabulary, not under the current one.
    tokenizer::InductionParams fresh_params;
    fresh_params.wordpiece_capacity = std::max<std::size_t>(current.wordpiece_capacity(), 1);
    fresh_params.hashtag_capacity = current.hashtag_capacity();
    fresh_params.mode = current.hashtag_capacity() > 0 ? HashtagMode::WholeHashtags
                                                       : HashtagMode::BreakDown;
    fresh_params.min_count = min_count;
    const Vocabulary fresh = tokenizer::induce_vocabulary(new_docs, fresh_params, mode);

    TokenCounts piece_counts = tokenizer::count_pieces(fresh, new_docs, mode);
    TokenCounts wordpiece_candidates;
    for (auto& [piece, count] : piece_counts) {
        if (is_special(piece)) continue;
        if (fresh.hashtag_section_contains(piece)) continue; // intact hashtags
        wordpiece_candidates.emplace(piece, count);
    }

    UpdateResult result;
    std::vector<VocabEntry> entries;

    const auto wp_plan = plan_section_update(section_rank_order(current, Section::Wordpiece),
                                             wordpiece_candidates, min_count, Section::Wordpiece);
    auto collect = [&](const SectionPlan& plan, const TokenCounts& counts, Section section) {
        auto push = [&](const std::string& token) {
            const auto it = counts.find(token);
            entries.push_back(
                VocabEntry{token, it == counts.end() ? 0 : it->second, section});
        };
        for (const auto& t : plan.kept) push(t);
        for (const auto& t : plan.added) push(t);
        for (const auto& t : plan.retained) push(t);
    };
    collect(wp_plan, wordpiece_candidates, Section::Wordpiece);
    result.plans.push_back(wp_plan);

    if (current.hashtag_capacity() > 0) {
        const TokenCounts hashtag_candidates = count_tokens(
            new_docs,
            [](std::string_view tok) {
                return corpus::is_hashtag(tok) ? std::string(tok) : std::string();
            },
            mode);
        const auto ht_plan =
            plan_section_update(section_rank_order(current, Section::Hashtag), hashtag_candidates,
                                min_count, Section::Hashtag);
        collect(ht_plan, hashtag_candidates, Section::Hashtag);
        result.plans.push_back(ht_plan);
    }

    result.vocabulary = Vocabulary(std::move(entries), current.wordpiece_capacity(),
                                   current.hashtag_capacity());

    for (const auto& plan : result.plans) {
        const std::size_t current_size =
            plan.section == Section::Wordpiece ? current.section_size(Section::Wordpiece)
                                               : current.section_size(Section::Hashtag);
        const std::size_t new_size = result.vocabulary.section_size(plan.section);
        if (current_size != new_size) {
            throw InvariantError("vocabulary update changed a section size");
        }
    }
    return result;
}

void save_plan_json(const std::string& path, const std::vector<SectionPlan>& plans) {
    nlohmann::json root;
    for (const auto& plan : plans) {
        nlohmann::json obj;
        obj["kept"] = plan.kept;
        obj["removed"] = plan.removed;
        obj["added"] = plan.added;
        obj["retained"] = plan.retained;
        root[std::string(section_name(plan.section))] = std::move(obj);
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write plan file: " + path);
    out << root.dump(2) << '\n';
}

} // namespace vocabdrift::vocab_update
