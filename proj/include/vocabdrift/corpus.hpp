#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vocabdrift/parallel.hpp"

namespace vocabdrift::corpus {

/// Canonical replacement tokens. Kept uppercase so they survive
/// lowercasing and stay atomic vocabulary entries.
inline constexpr std::string_view kUrlToken = "URL";
inline constexpr std::string_view kMentionToken = "@USER";
inline constexpr std::string_view kEmailToken = "EMAIL";

struct RawRecord {
    std::string id;
    std::string text;
    int epoch = 0;
};

struct Document {
    std::string id;
    std::string text;   // normalized
    int epoch = 0;
    int token_count = 0; // whitespace tokens in normalized text
};

/// Lowercases, rewrites URLs / @-mentions / emails to their canonical
/// tokens, and collapses whitespace. Idempotent.
std::string normalize_text(std::string_view raw);

Document normalize_record(const RawRecord& rec);

/// Splits on single spaces; assumes normalized text.
std::vector<std::string_view> split_tokens(std::string_view text);

bool is_hashtag(std::string_view token);
bool is_entity_token(std::string_view token);

/// Reads a JSONL corpus ({"id","text","year"} per line), normalizes every
/// record, and returns documents in file order. Duplicate ids and
/// malformed lines raise InputError naming the offender.
std::vector<Document> ingest(const std::string& path,
                             std::optional<int> epoch_filter = std::nullopt,
                             ExecMode mode = default_exec_mode());

void write_jsonl(const std::string& path, const std::vector<Document>& docs);

} // namespace vocabdrift::corpus
