#include "vocabdrift/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "vocabdrift/errors.hpp"

namespace vocabdrift {

std::string_view section_name(Section s) {
    switch (s) {
        case Section::Special: return "special";
        case Section::Wordpiece: return "wordpiece";
        case Section::Hashtag: return "hashtag";
    }
    return "wordpiece";
}

Section parse_section(std::string_view name) {
    if (name == "special") return Section::Special;
    if (name == "wordpiece") return Section::Wordpiece;
    if (name == "hashtag") return Section::Hashtag;
    throw InputError("unknown vocabulary section: " + std::string(name));
}

const std::vector<std::string>& special_tokens() {
    static const std::vector<std::string> specials = {
        "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "URL", "@USER", "EMAIL"};
    return specials;
}

namespace {

void rank_section(std::vector<VocabEntry>& entries) {
    std::stable_sort(entries.begin(), entries.end(), [](const VocabEntry& a, const VocabEntry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.token < b.token;
    });
}

} // namespace

Vocabulary::Vocabulary(std::vector<VocabEntry> entries, std::size_t wordpiece_capacity,
                       std::size_t hashtag_capacity)
    : wordpiece_capacity_(wordpiece_capacity), hashtag_capacity_(hashtag_capacity) {
    std::vector<VocabEntry> wordpieces;
    std::vector<VocabEntry> hashtags;
    for (auto& e : entries) {
        if (e.section == Section::Special) {
            throw InvariantError("special tokens are implicit; do not pass them as entries");
        }
        if (e.section == Section::Hashtag) {
            if (e.token.size() < 2 || e.token[0] != '#' ||
                e.token.find(' ') != std::string::npos) {
                throw InvariantError("hashtag-section token must start with '#': " + e.token);
            }
            hashtags.push_back(std::move(e));
        } else {
            wordpieces.push_back(std::move(e));
        }
    }
    if (wordpieces.size() > wordpiece_capacity_) {
        throw InvariantError("wordpiece section exceeds capacity");
    }
    if (hashtags.size() > hashtag_capacity_) {
        throw InvariantError("hashtag section exceeds capacity");
    }
    rank_section(wordpieces);
    rank_section(hashtags);

    entries_.reserve(special_tokens().size() + wordpieces.size() + hashtags.size());
    for (const auto& s : special_tokens()) {
        entries_.push_back(VocabEntry{s, 0, Section::Special});
    }
    for (auto& e : wordpieces) entries_.push_back(std::move(e));
    for (auto& e : hashtags) entries_.push_back(std::move(e));

    for (const auto& e : entries_) {
        if (!lookup_.insert(e.token).second) {
            throw InvariantError("duplicate vocabulary token: " + e.token);
        }
        if (e.section == Section::Hashtag) hashtag_lookup_.insert(e.token);
    }
}

bool Vocabulary::contains(std::string_view token) const {
    return lookup_.find(token) != lookup_.end();
}

bool Vocabulary::hashtag_section_contains(std::string_view token) const {
    return hashtag_lookup_.find(token) != hashtag_lookup_.end();
}

std::vector<const VocabEntry*> Vocabulary::section_entries(Section s) const {
    std::vector<const VocabEntry*> out;
    for (const auto& e : entries_) {
        if (e.section == s) out.push_back(&e);
    }
    return out;
}

std::size_t Vocabulary::section_size(Section s) const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
        if (e.section == s) ++n;
    }
    return n;
}

HashtagMode Vocabulary::mode() const {
    return hashtag_lookup_.empty() ? HashtagMode::BreakDown : HashtagMode::WholeHashtags;
}

void Vocabulary::save_tsv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write vocabulary file: " + path);
    for (const auto& e : entries_) {
        out << e.token << '\t' << e.count << '\t' << section_name(e.section) << '\n';
    }
}

Vocabulary Vocabulary::load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open vocabulary file: " + path);

    std::vector<std::string> specials_seen;
    std::vector<VocabEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            throw InputError(path + ": line " + std::to_string(line_no) +
                             ": expected token<TAB>count<TAB>section");
        }
        VocabEntry e;
        e.token = line.substr(0, t1);
        const std::string_view count_text = std::string_view(line).substr(t1 + 1, t2 - t1 - 1);
        auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(),
                                         e.count);
        if (ec != std::errc() || ptr != count_text.data() + count_text.size()) {
            throw InputError(path + ": line " + std::to_string(line_no) + ": bad count");
        }
        e.section = parse_section(std::string_view(line).substr(t2 + 1));
        if (e.section == Section::Special) {
            specials_seen.push_back(e.token);
        } else {
            entries.push_back(std::move(e));
        }
    }
    if (specials_seen != special_tokens()) {
        throw InputError(path + ": special-token block missing or out of order");
    }
    std::size_t wp = 0;
    std::size_t ht = 0;
    for (const auto& e : entries) {
        if (e.section == Section::Hashtag) {
            ++ht;
        } else {
            ++wp;
        }
    }
    // A loaded file carries no capacity metadata; section sizes stand in.
    return Vocabulary(std::move(entries), wp, ht);
}

} // namespace vocabdrift
