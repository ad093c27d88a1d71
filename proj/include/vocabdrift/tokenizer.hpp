#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/counting.hpp"
#include "vocabdrift/parallel.hpp"
#include "vocabdrift/vocabulary.hpp"

namespace vocabdrift::tokenizer {

using corpus::Document;

struct InductionParams {
    std::size_t wordpiece_capacity = 2000;
    std::size_t hashtag_capacity = 500;
    HashtagMode mode = HashtagMode::WholeHashtags;
    std::int64_t min_count = 1;
};

/// The 65K-scale configuration: 50K wordpieces plus 15K whole hashtags.
InductionParams paper_preset();

/// Learns a fixed-size vocabulary from a normalized corpus: top hashtags
/// kept intact (whole-hashtag mode), wordpieces grown from single
/// characters by frequency-greedy pair merging. Deterministic for a given
/// corpus and parameters, whichever ExecMode counts the words.
Vocabulary induce_vocabulary(std::span<const Document> docs,
                             const InductionParams& params,
                             ExecMode mode = default_exec_mode());

/// Greedy longest-match-first segmentation; continuations carry "##".
/// A word with no match at some position becomes [UNK] whole.
std::vector<std::string> tokenize_word(const Vocabulary& vocab, std::string_view word);

struct TokenizationResult {
    std::vector<std::string> pieces;
    int oov_word_count = 0;
    int word_count = 0;
};

TokenizationResult tokenize_document(const Vocabulary& vocab, const Document& doc);

struct CoverageStats {
    double oov_rate = 0.0;  // whole words mapped to [UNK] / total words
    double fertility = 0.0; // pieces per word; an [UNK] word counts 1 piece
    std::int64_t word_count = 0;
    std::int64_t piece_count = 0;
    std::int64_t oov_word_count = 0;
};

CoverageStats coverage_stats(const Vocabulary& vocab,
                             std::span<const Document> docs,
                             ExecMode mode = default_exec_mode());

/// Piece-occurrence counts over a corpus under a fixed vocabulary.
TokenCounts count_pieces(const Vocabulary& vocab,
                         std::span<const Document> docs,
                         ExecMode mode = default_exec_mode());

} // namespace vocabdrift::tokenizer
