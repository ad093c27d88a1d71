#include "vocabdrift/counting.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vocabdrift {
namespace {

void count_into(TokenCounts& counts, const corpus::Document& doc,
                const TokenProjection& project) {
    for (std::string_view token : corpus::split_tokens(doc.text)) {
        std::string projected = project(token);
        if (projected.empty()) continue;
        ++counts[std::move(projected)];
    }
}

} // namespace

TokenCounts count_tokens(std::span<const corpus::Document> docs,
                         const TokenProjection& project, ExecMode mode) {
    const auto n = static_cast<std::int64_t>(docs.size());
#ifdef _OPENMP
    if (mode == ExecMode::Parallel && n > 1) {
        std::vector<TokenCounts> locals(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
        {
            TokenCounts& mine = locals[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
            for (std::int64_t i = 0; i < n; ++i) {
                count_into(mine, docs[static_cast<std::size_t>(i)], project);
            }
        }
        // Summation merge: contents are order-independent.
        TokenCounts merged;
        for (auto& local : locals) {
            for (auto& [token, count] : local) merged[token] += count;
        }
        return merged;
    }
#else
    (void)mode;
#endif
    TokenCounts counts;
    for (std::int64_t i = 0; i < n; ++i) {
        count_into(counts, docs[static_cast<std::size_t>(i)], project);
    }
    return counts;
}

std::vector<std::pair<std::string, std::int64_t>> rank_tokens(const TokenCounts& counts) {
    std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

std::vector<std::pair<std::string, std::int64_t>> top_k_ranked(const TokenCounts& counts,
                                                               std::size_t k) {
    auto ranked = rank_tokens(counts);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

} // namespace vocabdrift
