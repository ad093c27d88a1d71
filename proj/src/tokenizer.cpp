#include "vocabdrift/tokenizer.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vocabdrift/errors.hpp"

namespace vocabdrift::tokenizer {
namespace {

constexpr std::string_view kContinuation = "##";

std::size_t codepoint_len(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0b110) return 2;
    if ((lead >> 4) == 0b1110) return 3;
    if ((lead >> 3) == 0b11110) return 4;
    return 1; // invalid byte, treated as its own unit
}

std::vector<std::string> codepoints(std::string_view word) {
    std::vector<std::string> cps;
    std::size_t i = 0;
    while (i < word.size()) {
        const std::size_t len = std::min(codepoint_len(static_cast<unsigned char>(word[i])),
                                         word.size() - i);
        cps.emplace_back(word.substr(i, len));
        i += len;
    }
    return cps;
}

// Training stream: entity tokens stay atomic, section hashtags are handled
// whole, everything else (rarer hashtags stripped of '#') feeds the
// wordpiece learner.
std::string project_for_wordpieces(std::string_view token,
                                   const std::unordered_set<std::string>* intact_hashtags) {
    if (corpus::is_entity_token(token)) return {};
    if (corpus::is_hashtag(token)) {
        if (intact_hashtags != nullptr &&
            intact_hashtags->find(std::string(token)) != intact_hashtags->end()) {
            return {};
        }
        return std::string(token.substr(1));
    }
    return std::string(token);
}

struct WordSeq {
    std::vector<std::int32_t> syms;
    std::int64_t count = 0;
};

constexpr std::uint64_t pair_key(std::int32_t left, std::int32_t right) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(left)) << 32) |
           static_cast<std::uint32_t>(right);
}

struct MergeCandidate {
    std::int64_t count = 0;
    std::string merged;
    std::string left;
    std::uint64_t key = 0;

    // priority_queue top() is the max element: highest count wins, then the
    // lexicographically smallest merged string, then the smallest left part.
    bool operator<(const MergeCandidate& other) const {
        if (count != other.count) return count < other.count;
        if (merged != other.merged) return merged > other.merged;
        return left > other.left;
    }
};

class PairMerger {
public:
    PairMerger(const std::vector<std::pair<std::string, std::int64_t>>& word_counts,
               std::int64_t min_count)
        : merge_threshold_(std::max<std::int64_t>(min_count, 2)) {
        for (const auto& [word, count] : word_counts) {
            WordSeq seq;
            seq.count = count;
            const auto cps = codepoints(word);
            for (std::size_t i = 0; i < cps.size(); ++i) {
                const std::string surface =
                    i == 0 ? cps[i] : std::string(kContinuation) + cps[i];
                seq.syms.push_back(intern(surface));
            }
            words_.push_back(std::move(seq));
        }
    }

    /// Character surface forms with their observed counts.
    TokenCounts alphabet(const std::vector<std::pair<std::string, std::int64_t>>& word_counts) {
        TokenCounts counts;
        for (const auto& [word, count] : word_counts) {
            const auto cps = codepoints(word);
            for (std::size_t i = 0; i < cps.size(); ++i) {
                const std::string surface =
                    i == 0 ? cps[i] : std::string(kContinuation) + cps[i];
                counts[surface] += count;
            }
        }
        return counts;
    }

    /// Runs the merge loop until `capacity` pieces exist or no pair is
    /// frequent enough; returns all piece surfaces (alphabet + merges).
    std::unordered_set<std::string> run(const std::unordered_set<std::string>& alphabet_pieces,
                                        std::size_t capacity) {
        pieces_ = alphabet_pieces;

        // Words with a sub-threshold character form cannot be segmented by
        // the final vocabulary; they sit out the merge phase.
        for (std::size_t w = 0; w < words_.size(); ++w) {
            bool eligible = true;
            for (std::int32_t s : words_[w].syms) {
                if (pieces_.find(sym_str_[static_cast<std::size_t>(s)]) == pieces_.end()) {
                    eligible = false;
                    break;
                }
            }
            if (eligible) add_word_pairs(w);
        }
        for (const auto& [key, count] : pair_counts_) push_candidate(key, count);

        while (pieces_.size() < capacity && !heap_.empty()) {
            const MergeCandidate cand = heap_.top();
            heap_.pop();
            const auto it = pair_counts_.find(cand.key);
            if (it == pair_counts_.end() || it->second != cand.count) continue; // stale
            if (cand.count < merge_threshold_) break;
            apply_merge(cand);
        }
        return pieces_;
    }

private:
    std::int32_t intern(const std::string& surface) {
        const auto it = sym_id_.find(surface);
        if (it != sym_id_.end()) return it->second;
        const auto id = static_cast<std::int32_t>(sym_str_.size());
        sym_str_.push_back(surface);
        sym_id_.emplace(surface, id);
        return id;
    }

    void add_word_pairs(std::size_t w) {
        const auto& syms = words_[w].syms;
        for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
            const std::uint64_t key = pair_key(syms[i], syms[i + 1]);
            pair_counts_[key] += words_[w].count;
            pair_words_[key].insert(w);
        }
    }

    void remove_word_pairs(std::size_t w, std::unordered_set<std::uint64_t>& touched) {
        const auto& syms = words_[w].syms;
        for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
            const std::uint64_t key = pair_key(syms[i], syms[i + 1]);
            auto it = pair_counts_.find(key);
            if (it != pair_counts_.end()) {
                it->second -= words_[w].count;
                if (it->second <= 0) pair_counts_.erase(it);
            }
            auto wit = pair_words_.find(key);
            if (wit != pair_words_.end()) wit->second.erase(w);
            // Decrements need a fresh heap entry too, or the pair would be
            // dropped as stale forever.
            touched.insert(key);
        }
    }

    void push_candidate(std::uint64_t key, std::int64_t count) {
        if (count < merge_threshold_) return;
        const auto left = static_cast<std::int32_t>(key >> 32);
        const auto right = static_cast<std::int32_t>(key & 0xFFFFFFFFULL);
        MergeCandidate cand;
        cand.count = count;
        cand.left = sym_str_[static_cast<std::size_t>(left)];
        cand.merged = cand.left + sym_str_[static_cast<std::size_t>(right)].substr(2);
        cand.key = key;
        heap_.push(std::move(cand));
    }

    void apply_merge(const MergeCandidate& cand) {
        const auto left = static_cast<std::int32_t>(cand.key >> 32);
        const auto right = static_cast<std::int32_t>(cand.key & 0xFFFFFFFFULL);
        const std::int32_t merged_sym = intern(cand.merged);
        pieces_.insert(cand.merged);

        const auto wit = pair_words_.find(cand.key);
        if (wit == pair_words_.end()) return;
        const std::vector<std::size_t> affected(wit->second.begin(), wit->second.end());

        std::unordered_set<std::uint64_t> touched;
        for (std::size_t w : affected) {
            remove_word_pairs(w, touched);
            auto& syms = words_[w].syms;
            std::vector<std::int32_t> rewritten;
            rewritten.reserve(syms.size());
            std::size_t i = 0;
            while (i < syms.size()) {
                if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
                    rewritten.push_back(merged_sym);
                    i += 2;
                } else {
                    rewritten.push_back(syms[i]);
                    ++i;
                }
            }
            syms = std::move(rewritten);
            for (std::size_t p = 0; p + 1 < syms.size(); ++p) {
                const std::uint64_t key = pair_key(syms[p], syms[p + 1]);
                pair_counts_[key] += words_[w].count;
                pair_words_[key].insert(w);
                touched.insert(key);
            }
        }
        for (std::uint64_t key : touched) {
            const auto it = pair_counts_.find(key);
            if (it != pair_counts_.end()) push_candidate(key, it->second);
        }
    }

    std::int64_t merge_threshold_;
    std::vector<WordSeq> words_;
    std::vector<std::string> sym_str_;
    std::unordered_map<std::string, std::int32_t> sym_id_;
    std::unordered_map<std::uint64_t, std::int64_t> pair_counts_;
    std::unordered_map<std::uint64_t, std::unordered_set<std::size_t>> pair_words_;
    std::priority_queue<MergeCandidate> heap_;
    std::unordered_set<std::string> pieces_;
};

/// Greedy longest-match against a plain piece set; continuation pieces
/// carry the "##" prefix. Returns empty on failure.
std::vector<std::string> greedy_segment(const std::unordered_set<std::string>& pieces,
                                        std::string_view word) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < word.size()) {
        std::size_t end = word.size();
        std::string match;
        while (end > start) {
            std::string candidate = start > 0 ? std::string(kContinuation) : std::string();
            candidate.append(word.substr(start, end - start));
            if (pieces.find(candidate) != pieces.end()) {
                match = std::move(candidate);
                break;
            }
            --end;
        }
        if (match.empty()) return {};
        out.push_back(std::move(match));
        start = end;
    }
    return out;
}

} // namespace

InductionParams paper_preset() {
    return InductionParams{50000, 15000, HashtagMode::WholeHashtags, 1};
}

Vocabulary induce_vocabulary(std::span<const Document> docs, const InductionParams& params,
                             ExecMode mode) {
    if (docs.empty()) throw InputError("cannot induce a vocabulary from an empty corpus");
    if (params.wordpiece_capacity == 0) throw InvariantError("wordpiece capacity must be positive");
    if (params.mode == HashtagMode::WholeHashtags && params.hashtag_capacity == 0) {
        throw InvariantError("whole-hashtag mode needs a positive hashtag capacity");
    }
    if (params.mode == HashtagMode::BreakDown && params.hashtag_capacity != 0) {
        throw InvariantError("break-down mode keeps no hashtag section; capacity must be 0");
    }

    std::vector<VocabEntry> entries;
    std::unordered_set<std::string> intact;
    if (params.mode == HashtagMode::WholeHashtags) {
        const TokenCounts hashtag_counts = count_tokens(
            docs,
            [](std::string_view tok) {
                return corpus::is_hashtag(tok) ? std::string(tok) : std::string();
            },
            mode);
        for (auto& [token, count] : top_k_ranked(hashtag_counts, params.hashtag_capacity)) {
            intact.insert(token);
            entries.push_back(VocabEntry{token, count, Section::Hashtag});
        }
    }

    const std::unordered_set<std::string>* intact_ptr = intact.empty() ? nullptr : &intact;
    const TokenCounts word_counts = count_tokens(
        docs,
        [intact_ptr](std::string_view tok) { return project_for_wordpieces(tok, intact_ptr); },
        mode);
    const auto ranked_words = rank_tokens(word_counts);

    PairMerger merger(ranked_words, params.min_count);
    const TokenCounts alphabet_counts = merger.alphabet(ranked_words);
    std::unordered_set<std::string> alphabet_pieces;
    for (const auto& [surface, count] : alphabet_counts) {
        if (count >= params.min_count) alphabet_pieces.insert(surface);
    }
    if (alphabet_pieces.size() > params.wordpiece_capacity) {
        throw InputError("wordpiece capacity " + std::to_string(params.wordpiece_capacity) +
                         " cannot hold the " + std::to_string(alphabet_pieces.size()) +
                         "-piece alphabet");
    }

    const std::unordered_set<std::string> pieces =
        merger.run(alphabet_pieces, params.wordpiece_capacity);

    // Counts stored for wordpieces are realized occurrences: how often each
    // piece appears when the training stream is segmented with the final
    // piece set. Shadowed pieces legitimately stay at zero.
    TokenCounts realized;
    for (const auto& piece : pieces) realized[piece] = 0;
    for (const auto& [word, count] : ranked_words) {
        for (const auto& piece : greedy_segment(pieces, word)) {
            realized[piece] += count;
        }
    }
    for (auto& [piece, count] : realized) {
        entries.push_back(VocabEntry{piece, count, Section::Wordpiece});
    }

    return Vocabulary(std::move(entries), params.wordpiece_capacity, params.hashtag_capacity);
}

std::vector<std::string> tokenize_word(const Vocabulary& vocab, std::string_view word) {
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (start < word.size()) {
        std::size_t end = word.size();
        std::string match;
        while (end > start) {
            std::string candidate = start > 0 ? std::string(kContinuation) : std::string();
            candidate.append(word.substr(start, end - start));
            if (vocab.contains(candidate)) {
                match = std::move(candidate);
                break;
            }
            --end;
        }
        if (match.empty()) {
            return {std::string(kUnkToken)};
        }
        pieces.push_back(std::move(match));
        start = end;
    }
    return pieces;
}

TokenizationResult tokenize_document(const Vocabulary& vocab, const Document& doc) {
    TokenizationResult result;
    for (std::string_view token : corpus::split_tokens(doc.text)) {
        ++result.word_count;
        if (corpus::is_entity_token(token)) {
            result.pieces.emplace_back(token);
            continue;
        }
        std::string_view word = token;
        if (corpus::is_hashtag(token)) {
            if (vocab.hashtag_section_contains(token)) {
                result.pieces.emplace_back(token);
                continue;
            }
            word = token.substr(1);
        }
        auto pieces = tokenize_word(vocab, word);
        if (pieces.size() == 1 && pieces.front() == kUnkToken) ++result.oov_word_count;
        for (auto& p : pieces) result.pieces.push_back(std::move(p));
    }
    return result;
}

namespace {

struct Tally {
    std::int64_t words = 0;
    std::int64_t pieces = 0;
    std::int64_t oov = 0;
};

template <typename Fn>
void for_each_tokenized(const Vocabulary& vocab, std::span<const Document> docs, ExecMode mode,
                        const Fn& fn) {
    const auto n = static_cast<std::int64_t>(docs.size());
#ifdef _OPENMP
    if (mode == ExecMode::Parallel && n > 1) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            fn(static_cast<std::size_t>(i),
               tokenize_document(vocab, docs[static_cast<std::size_t>(i)]));
        }
        return;
    }
#else
    (void)mode;
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        fn(static_cast<std::size_t>(i), tokenize_document(vocab, docs[static_cast<std::size_t>(i)]));
    }
}

} // namespace

CoverageStats coverage_stats(const Vocabulary& vocab, std::span<const Document> docs,
                             ExecMode mode) {
    std::vector<Tally> tallies(static_cast<std::size_t>(worker_count(mode)));
    for_each_tokenized(vocab, docs, mode, [&](std::size_t, const TokenizationResult& r) {
        std::size_t slot = 0;
#ifdef _OPENMP
        slot = static_cast<std::size_t>(omp_get_thread_num());
#endif
        tallies[slot].words += r.word_count;
        tallies[slot].pieces += static_cast<std::int64_t>(r.pieces.size());
        tallies[slot].oov += r.oov_word_count;
    });
    Tally total;
    for (const auto& t : tallies) {
        total.words += t.words;
        total.pieces += t.pieces;
        total.oov += t.oov;
    }
    if (total.words == 0) throw InputError("coverage stats need a non-empty corpus");

    CoverageStats stats;
    stats.word_count = total.words;
    stats.piece_count = total.pieces;
    stats.oov_word_count = total.oov;
    stats.oov_rate = static_cast<double>(total.oov) / static_cast<double>(total.words);
    stats.fertility = static_cast<double>(total.pieces) / static_cast<double>(total.words);
    return stats;
}

TokenCounts count_pieces(const Vocabulary& vocab, std::span<const Document> docs, ExecMode mode) {
    std::vector<TokenCounts> locals(static_cast<std::size_t>(worker_count(mode)));
    for_each_tokenized(vocab, docs, mode, [&](std::size_t, const TokenizationResult& r) {
        std::size_t slot = 0;
#ifdef _OPENMP
        slot = static_cast<std::size_t>(omp_get_thread_num());
#endif
        for (const auto& piece : r.pieces) ++locals[slot][piece];
    });
    TokenCounts merged;
    for (auto& local : locals) {
        for (auto& [piece, count] : local) merged[piece] += count;
    }
    return merged;
}

} // namespace vocabdrift::tokenizer
