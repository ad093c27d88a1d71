#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/parallel.hpp"
#include "vocabdrift/signals.hpp"

namespace vocabdrift::sampler {

using corpus::Document;
using signals::SignalScore;

struct SamplingConfig {
    double alpha = 0.5;        // blend between signal and length weight
    double min_weight = 1e-6;  // floor for the combined weight
    std::uint64_t seed = 0;
    std::vector<std::size_t> iteration_sizes;
};

/// alpha * w_s + (1 - alpha) * w_t clamped to [min_weight, 1].
double combined_weight(double w_s, double w_t, const SamplingConfig& cfg);

/// Weighted-reservoir key u^(1/cw); taking the k largest keys realizes
/// weighted sampling without replacement. u must lie in (0,1).
double sampling_key(double u, double w_s, double w_t, const SamplingConfig& cfg);

struct SampleManifest {
    int iteration = 1;
    std::vector<std::string> doc_ids; // descending key order
    std::uint64_t seed = 0;
    signals::SignalKind signal = signals::SignalKind::TokenShift;

    void save(const std::string& path) const;
    static SampleManifest load(const std::string& path);
};

/// Draws k documents without replacement; per-document u comes from
/// hashing (seed, doc id) so the outcome is independent of pool order and
/// evaluation order. Key ties fall to the smaller doc id.
SampleManifest weighted_sample(std::span<const SignalScore> pool, std::size_t k,
                               const SamplingConfig& cfg,
                               ExecMode mode = default_exec_mode());

/// Yields scores for the documents still in play at a given iteration
/// (1-based). Iteration 1 is the new-token / length-only regime.
using SignalProvider =
    std::function<std::vector<SignalScore>(int iteration, std::span<const Document> remaining)>;

/// Hard-example mining loop: one manifest per configured iteration size,
/// previously sampled ids excluded, scores refreshed each round.
std::vector<SampleManifest> run_iterative_sampling(std::span<const Document> pool_docs,
                                                   const SignalProvider& provider,
                                                   const SamplingConfig& cfg,
                                                   ExecMode mode = default_exec_mode());

/// "a,b,c" or "paper-ratio:<budget>" (10/24, 8/24, 6/24 shares).
std::vector<std::size_t> parse_iteration_sizes(const std::string& text);

} // namespace vocabdrift::sampler
