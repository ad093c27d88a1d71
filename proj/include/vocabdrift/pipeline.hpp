#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/sampler.hpp"
#include "vocabdrift/signals.hpp"
#include "vocabdrift/vocab_update.hpp"

namespace vocabdrift::pipeline {

using corpus::Document;

/// Streaming loss monitor: a window breaches when its mean exceeds
/// baseline * (1 + rel_threshold); `patience` consecutive breaches
/// trigger a retraining epoch and re-anchor the baseline.
struct MonitorState {
    std::optional<double> baseline_mean_loss;
    std::size_t window_size = 1000;
    double rel_threshold = 0.05;
    int patience = 2;
    int consecutive_breaches = 0;
};

struct MonitorStep {
    MonitorState state;
    bool breached = false;
    bool triggered = false;
};

MonitorStep monitor_step(const MonitorState& state, double window_mean_loss);

struct MonitorRow {
    std::size_t window = 0;
    double mean_loss = 0.0;
    double baseline = 0.0;
    bool breached = false;
    bool triggered = false;
};

/// Windows a corpus, scores each window with the surrogate loss against
/// the first window's distribution, and feeds the monitor. The first
/// window anchors the baseline.
std::vector<MonitorRow> monitor_corpus(std::span<const Document> stream,
                                       const Vocabulary& vocab,
                                       MonitorState state,
                                       ExecMode mode = default_exec_mode());

void save_monitor_csv(const std::string& path, std::span<const MonitorRow> rows);

struct EpochConfig {
    signals::SignalKind signal = signals::SignalKind::TokenShift;
    sampler::SamplingConfig sampling;
    std::int64_t min_count = 1;
    std::size_t shift_top_k = 40;
    std::optional<std::size_t> top_x;
    // Optional checkpoint files for iterations >= 2; the first-iteration
    // scores carry over when absent (no external training step ran).
    std::vector<std::pair<std::string, std::string>> checkpoint_pairs;
};

struct EpochPlan {
    std::vector<vocab_update::SectionPlan> vocab_plans;
    std::vector<sampler::SampleManifest> manifests;
    std::size_t trigger_window = 0; // 0 = externally triggered
};

/// One incremental epoch: update the vocabulary from the new corpus, score
/// it with the configured signal, mine hard examples iteratively, and
/// write vocabulary, plan, manifests, shift report, and coverage stats
/// into `out_dir`.
EpochPlan run_epoch(const Vocabulary& current_vocab,
                    std::span<const Document> old_corpus,
                    std::span<const Document> new_corpus,
                    const EpochConfig& cfg,
                    const std::string& out_dir,
                    ExecMode mode = default_exec_mode());

/// Aggregates a run directory into summary.json plus a manifest-size
/// table; errors list any missing artifacts. An absent or empty monitor
/// trace becomes a zero-row table.
void emit_report(const std::string& run_dir);

} // namespace vocabdrift::pipeline
