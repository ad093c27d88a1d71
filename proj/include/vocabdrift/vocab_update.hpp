#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/counting.hpp"
#include "vocabdrift/parallel.hpp"
#include "vocabdrift/vocabulary.hpp"

namespace vocabdrift::vocab_update {

using corpus::Document;

/// Fixed-size section update: survivors stay, stale tokens leave, the most
/// frequent new candidates fill the vacancies. When candidates run out,
/// the stale tokens with the highest new-epoch counts are retained so the
/// section never shrinks.
struct SectionPlan {
    Section section = Section::Wordpiece;
    std::vector<std::string> kept;     // candidate rank order
    std::vector<std::string> removed;  // current rank order, retentions excluded
    std::vector<std::string> added;    // candidate rank order
    std::vector<std::string> retained; // stale tokens kept to preserve size
};

/// Pure core of the update: current section tokens in rank order plus
/// new-epoch candidate counts. `min_count` gates candidacy; raw counts
/// below it still break retention ties.
SectionPlan plan_section_update(const std::vector<std::string>& current_rank_order,
                                const TokenCounts& new_counts,
                                std::int64_t min_count,
                                Section section);

struct UpdateResult {
    Vocabulary vocabulary;
    std::vector<SectionPlan> plans; // wordpiece first, hashtag when present
};

/// Applies the section update to both sections of `current`, with
/// wordpiece candidates produced by tokenizing `new_docs` under a freshly
/// induced epoch vocabulary and hashtag candidates counted directly.
UpdateResult update_vocabulary(const Vocabulary& current,
                               std::span<const Document> new_docs,
                               std::int64_t min_count,
                               ExecMode mode = default_exec_mode());

void save_plan_json(const std::string& path, const std::vector<SectionPlan>& plans);

} // namespace vocabdrift::vocab_update
