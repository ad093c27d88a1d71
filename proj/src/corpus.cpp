#include "vocabdrift/corpus.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "vocabdrift/errors.hpp"

namespace vocabdrift::corpus {
namespace {

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool iprefix(std::string_view token, std::string_view prefix) {
    if (token.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char a = token[i];
        if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
        if (a != prefix[i]) return false;
    }
    return true;
}

bool is_url_like(std::string_view token) {
    return iprefix(token, "http://") || iprefix(token, "https://") || iprefix(token, "t.co/");
}

bool is_mention(std::string_view token) {
    return token.size() >= 2 && token[0] == '@' && is_word_char(token[1]);
}

// RFC-lite: local@domain.tld, tld alphabetic and at least two chars.
bool is_email(std::string_view token) {
    const std::size_t at = token.find('@');
    if (at == 0 || at == std::string_view::npos) return false;
    if (token.find('@', at + 1) != std::string_view::npos) return false;

    const std::string_view local = token.substr(0, at);
    for (char c : local) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '.' || c == '_' ||
              c == '%' || c == '+' || c == '-'))
            return false;
    }

    const std::string_view domain = token.substr(at + 1);
    if (domain.empty() || domain.front() == '.' || domain.back() == '.') return false;
    std::size_t label_start = 0;
    std::size_t last_label_start = 0;
    for (std::size_t i = 0; i <= domain.size(); ++i) {
        if (i == domain.size() || domain[i] == '.') {
            if (i == label_start) return false; // empty label
            last_label_start = label_start;
            label_start = i + 1;
        } else if (!(std::isalnum(static_cast<unsigned char>(domain[i])) != 0 || domain[i] == '-')) {
            return false;
        }
    }
    const std::string_view tld = domain.substr(last_label_start);
    if (tld.size() < 2 || last_label_start == 0) return false; // need at least one dot
    for (char c : tld) {
        if (std::isalpha(static_cast<unsigned char>(c)) == 0) return false;
    }
    return true;
}

void lowercase_ascii(std::string& s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
}

} // namespace

bool is_hashtag(std::string_view token) {
    return token.size() >= 2 && token[0] == '#';
}

bool is_entity_token(std::string_view token) {
    return token == kUrlToken || token == kMentionToken || token == kEmailToken;
}

std::string normalize_text(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        while (i < raw.size() && is_ascii_space(raw[i])) ++i;
        if (i >= raw.size()) break;
        std::size_t j = i;
        while (j < raw.size() && !is_ascii_space(raw[j])) ++j;
        const std::string_view token = raw.substr(i, j - i);
        i = j;

        if (!out.empty()) out.push_back(' ');
        if (is_url_like(token)) {
            out.append(kUrlToken);
        } else if (is_email(token)) {
            out.append(kEmailToken);
        } else if (is_mention(token)) {
            out.append(kMentionToken);
        } else if (is_entity_token(token)) {
            out.append(token); // canonical forms stay intact
        } else {
            std::string lowered(token);
            lowercase_ascii(lowered);
            out.append(lowered);
        }
    }
    return out;
}

std::vector<std::string_view> split_tokens(std::string_view text) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ') ++j;
        tokens.push_back(text.substr(i, j - i));
        i = j;
    }
    return tokens;
}

Document normalize_record(const RawRecord& rec) {
    Document doc;
    doc.id = rec.id;
    doc.text = normalize_text(rec.text);
    doc.epoch = rec.epoch;
    doc.token_count = static_cast<int>(split_tokens(doc.text).size());
    return doc;
}

namespace {

struct ParsedLine {
    Document doc;
    std::string error; // empty on success
};

ParsedLine parse_line(const std::string& line, std::size_t line_no) {
    ParsedLine result;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        result.error = "line " + std::to_string(line_no) + ": not a JSON object";
        return result;
    }
    if (!obj.contains("id") || !obj["id"].is_string() || obj["id"].get<std::string>().empty()) {
        result.error = "line " + std::to_string(line_no) + ": missing or empty string field \"id\"";
        return result;
    }
    if (!obj.contains("text") || !obj["text"].is_string()) {
        result.error = "line " + std::to_string(line_no) + ": missing string field \"text\"";
        return result;
    }
    if (!obj.contains("year") || !obj["year"].is_number_integer()) {
        result.error = "line " + std::to_string(line_no) + ": missing integer field \"year\"";
        return result;
    }
    RawRecord rec{obj["id"].get<std::string>(), obj["text"].get<std::string>(),
                  obj["year"].get<int>()};
    result.doc = normalize_record(rec);
    return result;
}

} // namespace

std::vector<Document> ingest(const std::string& path, std::optional<int> epoch_filter,
                             ExecMode mode) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    std::vector<ParsedLine> parsed(lines.size());
    const auto n = static_cast<std::int64_t>(lines.size());
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            parsed[static_cast<std::size_t>(i)] =
                parse_line(lines[static_cast<std::size_t>(i)], static_cast<std::size_t>(i) + 1);
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            parsed[static_cast<std::size_t>(i)] =
                parse_line(lines[static_cast<std::size_t>(i)], static_cast<std::size_t>(i) + 1);
        }
    }

    // First error in file order wins, independent of scheduling.
    for (const auto& p : parsed) {
        if (!p.error.empty()) throw InputError(path + ": " + p.error);
    }

    std::vector<Document> docs;
    docs.reserve(parsed.size());
    std::unordered_set<std::string> seen;
    seen.reserve(parsed.size());
    for (const auto& p : parsed) {
        if (!seen.insert(p.doc.id).second) {
            throw InputError(path + ": duplicate id \"" + p.doc.id + "\"");
        }
        if (epoch_filter && p.doc.epoch != *epoch_filter) continue;
        docs.push_back(p.doc);
    }
    return docs;
}

void write_jsonl(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write corpus file: " + path);
    for (const auto& doc : docs) {
        nlohmann::json obj;
        obj["id"] = doc.id;
        obj["text"] = doc.text;
        obj["year"] = doc.epoch;
        out << obj.dump() << '\n';
    }
}

} // namespace vocabdrift::corpus
