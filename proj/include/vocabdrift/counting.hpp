#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/parallel.hpp"

namespace vocabdrift {

using TokenCounts = std::unordered_map<std::string, std::int64_t>;

/// Maps a whitespace token to the string that should be counted, or to an
/// empty optional-like skip. Returning an empty string skips the token.
using TokenProjection = std::function<std::string(std::string_view)>;

/// Counts projected whitespace tokens over a document set. The OpenMP path
/// keeps per-thread maps and merges by summation, so the result is
/// independent of scheduling.
TokenCounts count_tokens(std::span<const corpus::Document> docs,
                         const TokenProjection& project,
                         ExecMode mode = default_exec_mode());

/// (token, count) pairs ordered by count descending, ties lexicographic
/// ascending. The canonical rank order used everywhere.
std::vector<std::pair<std::string, std::int64_t>> rank_tokens(const TokenCounts& counts);

std::vector<std::pair<std::string, std::int64_t>> top_k_ranked(const TokenCounts& counts,
                                                               std::size_t k);

} // namespace vocabdrift
