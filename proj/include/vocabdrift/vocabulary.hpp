#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace vocabdrift {

struct TransparentStringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view sv) const {
        return std::hash<std::string_view>{}(sv);
    }
};
using StringSet = std::unordered_set<std::string, TransparentStringHash, std::equal_to<>>;

enum class Section { Special, Wordpiece, Hashtag };

std::string_view section_name(Section s);
Section parse_section(std::string_view name);

/// Whether popular hashtags live in the vocabulary intact or get stripped
/// and subword-split.
enum class HashtagMode { WholeHashtags, BreakDown };

struct VocabEntry {
    std::string token;
    std::int64_t count = 0;
    Section section = Section::Wordpiece;
};

/// Reserved tokens, in rank order. [UNK] carries unsegmentable words; the
/// last three are the preprocessing entity tokens.
const std::vector<std::string>& special_tokens();
inline constexpr std::string_view kUnkToken = "[UNK]";

/// Ordered, sectioned token set. Entries are ranked specials first, then
/// wordpieces, then hashtags; within a section by count descending, ties
/// lexicographic ascending. Immutable once built and safe to share across
/// threads.
class Vocabulary {
public:
    Vocabulary() = default;

    /// `entries` must not contain specials or duplicates; they are ranked
    /// per section and the special block is prepended.
    Vocabulary(std::vector<VocabEntry> entries,
               std::size_t wordpiece_capacity,
               std::size_t hashtag_capacity);

    const std::vector<VocabEntry>& entries() const { return entries_; }
    std::size_t wordpiece_capacity() const { return wordpiece_capacity_; }
    std::size_t hashtag_capacity() const { return hashtag_capacity_; }

    bool contains(std::string_view token) const;
    bool hashtag_section_contains(std::string_view token) const;

    std::vector<const VocabEntry*> section_entries(Section s) const;
    std::size_t section_size(Section s) const;

    /// Whole-hashtag behavior is implied by a populated hashtag section;
    /// with an empty section the two modes tokenize identically.
    HashtagMode mode() const;

    void save_tsv(const std::string& path) const;
    static Vocabulary load_tsv(const std::string& path);

private:
    std::vector<VocabEntry> entries_; // rank order, specials first
    StringSet lookup_;
    StringSet hashtag_lookup_;
    std::size_t wordpiece_capacity_ = 0;
    std::size_t hashtag_capacity_ = 0;
};

} // namespace vocabdrift
