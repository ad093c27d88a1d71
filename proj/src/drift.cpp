#include "vocabdrift/drift.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vocabdrift/counting.hpp"
#include "vocabdrift/errors.hpp"

namespace vocabdrift::drift {

std::string_view token_kind_name(TokenKind k) {
    switch (k) {
        case TokenKind::NaturalWord: return "word";
        case TokenKind::Wordpiece: return "wordpiece";
        case TokenKind::Hashtag: return "hashtag";
    }
    return "word";
}

TokenKind parse_token_kind(std::string_view name) {
    if (name == "word") return TokenKind::NaturalWord;
    if (name == "wordpiece") return TokenKind::Wordpiece;
    if (name == "hashtag") return TokenKind::Hashtag;
    throw InputError("unknown token kind: " + std::string(name));
}

TopKVocab top_k_vocab(std::span<const Document> docs, TokenKind kind, std::size_t k,
                      const tokenizer::InductionParams& induction, ExecMode mode) {
    if (k == 0) throw InvariantError("top-k needs k >= 1");

    TokenCounts counts;
    switch (kind) {
        case TokenKind::NaturalWord:
            counts = count_tokens(
                docs,
                [](std::string_view tok) {
                    return corpus::is_hashtag(tok) ? std::string() : std::string(tok);
                },
                mode);
            break;
        case TokenKind::Hashtag:
            counts = count_tokens(
                docs,
                [](std::string_view tok) {
                    return corpus::is_hashtag(tok) ? std::string(tok) : std::string();
                },
                mode);
            break;
        case TokenKind::Wordpiece: {
            // Wordpieces of an epoch are defined by that epoch's own
            // vocabulary: induce hashtag-free, then count realized pieces.
            auto params = induction;
            params.mode = HashtagMode::BreakDown;
            params.hashtag_capacity = 0;
            const Vocabulary vocab = tokenizer::induce_vocabulary(docs, params, mode);
            counts = tokenizer::count_pieces(vocab, docs, mode);
            break;
        }
    }
    if (counts.empty()) {
        throw InputError(std::string("no tokens of kind \"") + std::string(token_kind_name(kind)) +
                         "\" in corpus");
    }

    TopKVocab out;
    out.epoch = docs.empty() ? 0 : docs.front().epoch;
    out.kind = kind;
    out.k = k;
    for (auto& [token, count] : top_k_ranked(counts, k)) {
        out.tokens.push_back(std::move(token));
    }
    return out;
}

double vocab_shift(const TopKVocab& a, const TopKVocab& b) {
    if (a.kind != b.kind) throw InvariantError("vocab_shift: mismatched token kinds");
    if (a.tokens.empty() || b.tokens.empty()) {
        throw InputError("vocab_shift: empty vocabulary");
    }
    const std::unordered_set<std::string> set_a(a.tokens.begin(), a.tokens.end());
    const std::unordered_set<std::string> set_b(b.tokens.begin(), b.tokens.end());
    std::size_t intersection = 0;
    for (const auto& t : set_a) {
        if (set_b.find(t) != set_b.end()) ++intersection;
    }
    const std::size_t uni = set_a.size() + set_b.size() - intersection;
    return 1.0 - static_cast<double>(intersection) / static_cast<double>(uni);
}

CooccurrenceProfile cooccurrence_profile(std::span<const Document> docs,
                                         const std::string& anchor, std::size_t m,
                                         ExecMode mode) {
    if (m == 0) throw InvariantError("cooccurrence profile needs m >= 1");

    // One count per co-occurring word per document that holds the anchor.
    const TokenCounts counts = [&] {
        std::vector<TokenCounts> locals(static_cast<std::size_t>(worker_count(mode)));
        std::vector<char> anchor_seen(static_cast<std::size_t>(worker_count(mode)), 0);
        const auto n = static_cast<std::int64_t>(docs.size());
        auto body = [&](std::int64_t i, std::size_t slot) {
            const auto& doc = docs[static_cast<std::size_t>(i)];
            const auto tokens = corpus::split_tokens(doc.text);
            bool has_anchor = false;
            for (auto t : tokens) {
                if (t == anchor) {
                    has_anchor = true;
                    break;
                }
            }
            if (!has_anchor) return;
            anchor_seen[slot] = 1;
            std::unordered_set<std::string_view> distinct;
            for (auto t : tokens) {
                if (t != anchor) distinct.insert(t);
            }
            for (auto t : distinct) ++locals[slot][std::string(t)];
        };
#ifdef _OPENMP
        if (mode == ExecMode::Parallel && n > 1) {
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < n; ++i) {
                body(i, static_cast<std::size_t>(omp_get_thread_num()));
            }
        } else
#endif
        {
            for (std::int64_t i = 0; i < n; ++i) body(i, 0);
        }
        bool found = false;
        for (char s : anchor_seen) found = found || s != 0;
        if (!found) throw InputError("anchor \"" + anchor + "\" does not occur in the corpus");
        TokenCounts merged;
        for (auto& local : locals) {
            for (auto& [token, count] : local) merged[token] += count;
        }
        return merged;
    }();

    CooccurrenceProfile profile;
    profile.anchor = anchor;
    profile.epoch = docs.empty() ? 0 : docs.front().epoch;
    for (auto& [token, count] : top_k_ranked(counts, m)) {
        profile.top_words.push_back(std::move(token));
    }
    return profile;
}

double semantic_shift_rate(const CooccurrenceProfile& a, const CooccurrenceProfile& b) {
    if (a.anchor != b.anchor) throw InvariantError("semantic shift: mismatched anchors");
    if (a.top_words.size() != b.top_words.size() || a.top_words.empty()) {
        throw InvariantError("semantic shift: profiles must be non-empty and equal-sized");
    }
    const std::unordered_set<std::string> set_b(b.top_words.begin(), b.top_words.end());
    std::size_t overlap = 0;
    for (const auto& t : a.top_words) {
        if (set_b.find(t) != set_b.end()) ++overlap;
    }
    return 1.0 - static_cast<double>(overlap) / static_cast<double>(a.top_words.size());
}

} // namespace vocabdrift::drift
