#pragma once

#include <span>
#include <string>
#include <vector>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/parallel.hpp"
#include "vocabdrift/tokenizer.hpp"

namespace vocabdrift::drift {

using corpus::Document;

enum class TokenKind { NaturalWord, Wordpiece, Hashtag };

std::string_view token_kind_name(TokenKind k);
TokenKind parse_token_kind(std::string_view name);

struct TopKVocab {
    int epoch = 0;
    TokenKind kind = TokenKind::NaturalWord;
    std::vector<std::string> tokens; // rank order; |tokens| <= k
    std::size_t k = 0;
};

/// Highest-count tokens of one kind. Natural words are whitespace tokens
/// that are not hashtags; wordpieces come from a vocabulary induced from
/// these docs; ties are lexicographic.
TopKVocab top_k_vocab(std::span<const Document> docs, TokenKind kind, std::size_t k,
                      const tokenizer::InductionParams& induction = {},
                      ExecMode mode = default_exec_mode());

/// 1 - |intersection| / |union| over the two token sets.
double vocab_shift(const TopKVocab& a, const TopKVocab& b);

struct CooccurrenceProfile {
    std::string anchor;
    int epoch = 0;
    std::vector<std::string> top_words; // descending per-document count
};

/// Words co-occurring with the anchor, counted once per document, anchor
/// excluded from its own profile.
CooccurrenceProfile cooccurrence_profile(std::span<const Document> docs,
                                         const std::string& anchor, std::size_t m,
                                         ExecMode mode = default_exec_mode());

/// 1 - overlap / M over two equal-size profiles of the same anchor.
double semantic_shift_rate(const CooccurrenceProfile& a, const CooccurrenceProfile& b);

} // namespace vocabdrift::drift
