#include "vocabdrift/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "vocabdrift/drift.hpp"
#include "vocabdrift/errors.hpp"
#include "vocabdrift/text_io.hpp"
#include "vocabdrift/tokenizer.hpp"

namespace fs = std::filesystem;

namespace vocabdrift::pipeline {

MonitorStep monitor_step(const MonitorState& state, double window_mean_loss) {
    if (!state.baseline_mean_loss.has_value()) {
        throw InvariantError("monitor baseline not initialized");
    }
    if (window_mean_loss < 0.0) throw InvariantError("window mean loss must be non-negative");

    MonitorStep step;
    step.state = state;
    const double limit = *state.baseline_mean_loss * (1.0 + state.rel_threshold);
    step.breached = window_mean_loss > limit;
    if (!step.breached) {
        step.state.consecutive_breaches = 0;
        return step;
    }
    step.state.consecutive_breaches = state.consecutive_breaches + 1;
    if (step.state.consecutive_breaches >= state.patience) {
        step.triggered = true;
        step.state.consecutive_breaches = 0;
        // Re-anchor so the next epoch is judged against the new regime.
        step.state.baseline_mean_loss = window_mean_loss;
    }
    return step;
}

std::vector<MonitorRow> monitor_corpus(std::span<const Document> stream, const Vocabulary& vocab,
                                       MonitorState state, ExecMode mode) {
    if (stream.empty()) throw InputError("monitor needs a non-empty stream");
    if (state.window_size == 0) throw InvariantError("window size must be positive");

    std::vector<std::span<const Document>> windows;
    for (std::size_t start = 0; start < stream.size(); start += state.window_size) {
        windows.push_back(stream.subspan(start, std::min(state.window_size,
                                                         stream.size() - start)));
    }

    signals::SurrogateMlmParams params;
    params.vocab = &vocab;
    const auto reference = windows.front();

    std::vector<MonitorRow> rows;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto losses = signals::surrogate_raw_losses(windows[w], reference, params, mode);
        double mean = 0.0;
        for (double l : losses) mean += l;
        mean /= static_cast<double>(losses.size());

        MonitorRow row;
        row.window = w;
        row.mean_loss = mean;
        if (!state.baseline_mean_loss.has_value()) {
            // The first window anchors the baseline and cannot breach.
            state.baseline_mean_loss = mean;
            row.baseline = mean;
            rows.push_back(row);
            continue;
        }
        const auto step = monitor_step(state, mean);
        row.baseline = *state.baseline_mean_loss;
        row.breached = step.breached;
        row.triggered = step.triggered;
        state = step.state;
        rows.push_back(row);
    }
    return rows;
}

void save_monitor_csv(const std::string& path, std::span<const MonitorRow> rows) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write monitor trace: " + path);
    out << "window,mean_loss,baseline,breached,triggered\n";
    for (const auto& r : rows) {
        out << r.window << ',' << format_double(r.mean_loss) << ',' << format_double(r.baseline)
            << ',' << (r.breached ? 1 : 0) << ',' << (r.triggered ? 1 : 0) << '\n';
    }
}

namespace {

struct ShiftRow {
    std::string kind;
    int epoch_a = 0;
    int epoch_b = 0;
    std::size_t k = 0;
    double shift = 0.0;
};

void save_shift_csv(const std::string& path, std::span<const ShiftRow> rows) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write shift report: " + path);
    out << "kind,epoch_a,epoch_b,k,shift\n";
    for (const auto& r : rows) {
        out << r.kind << ',' << r.epoch_a << ',' << r.epoch_b << ',' << r.k << ','
            << format_double(r.shift) << '\n';
    }
}

struct CoverageRow {
    std::string vocab_label;
    tokenizer::CoverageStats stats;
};

void save_coverage_csv(const std::string& path, std::span<const CoverageRow> rows) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write coverage stats: " + path);
    out << "vocab,oov_rate,fertility,words,pieces,oov_words\n";
    for (const auto& r : rows) {
        out << r.vocab_label << ',' << format_double(r.stats.oov_rate) << ','
            << format_double(r.stats.fertility) << ',' << r.stats.word_count << ','
            << r.stats.piece_count << ',' << r.stats.oov_word_count << '\n';
    }
}

std::unordered_set<std::string> added_tokens(const std::vector<vocab_update::SectionPlan>& plans) {
    std::unordered_set<std::string> added;
    for (const auto& plan : plans) {
        for (const auto& t : plan.added) added.insert(t);
    }
    return added;
}

} // namespace

EpochPlan run_epoch(const Vocabulary& current_vocab, std::span<const Document> old_corpus,
                    std::span<const Document> new_corpus, const EpochConfig& cfg,
                    const std::string& out_dir, ExecMode mode) {
    if (old_corpus.empty() || new_corpus.empty()) {
        throw InputError("run_epoch needs non-empty old and new corpora");
    }
    fs::create_directories(out_dir);
    const auto path_in = [&](std::string_view name) {
        return (fs::path(out_dir) / name).string();
    };

    EpochPlan plan;
    plan.trigger_window = 0; // externally triggered run

    auto update = vocab_update::update_vocabulary(current_vocab, new_corpus, cfg.min_count, mode);
    plan.vocab_plans = update.plans;
    update.vocabulary.save_tsv(path_in("vocab.tsv"));
    vocab_update::save_plan_json(path_in("plan.json"), update.plans);

    // Shift report over all kinds present in both corpora.
    std::vector<ShiftRow> shift_rows;
    for (const auto kind :
         {drift::TokenKind::NaturalWord, drift::TokenKind::Wordpiece, drift::TokenKind::Hashtag}) {
        try {
            const auto a = drift::top_k_vocab(old_corpus, kind, cfg.shift_top_k, {}, mode);
            const auto b = drift::top_k_vocab(new_corpus, kind, cfg.shift_top_k, {}, mode);
            shift_rows.push_back(ShiftRow{std::string(drift::token_kind_name(kind)), a.epoch,
                                          b.epoch, cfg.shift_top_k, drift::vocab_shift(a, b)});
        } catch (const InputError&) {
            // A corpus without tokens of this kind contributes no row.
        }
    }
    save_shift_csv(path_in("shift_report.csv"), shift_rows);

    std::vector<CoverageRow> coverage_rows;
    coverage_rows.push_back({"current", tokenizer::coverage_stats(current_vocab, new_corpus, mode)});
    coverage_rows.push_back({"updated", tokenizer::coverage_stats(update.vocabulary, new_corpus, mode)});
    save_coverage_csv(path_in("stats.csv"), coverage_rows);

    // Signal provider. Iteration 1 follows the first-iteration rules; later
    // iterations consult checkpoint files when provided and otherwise keep
    // the latest available signal (no external training ran in between).
    const auto new_token_set = added_tokens(update.plans);
    const Vocabulary& vocab = update.vocabulary;
    auto base_scores = [&, new_token_set](std::span<const Document> remaining) {
        switch (cfg.signal) {
            case signals::SignalKind::TokenShift: {
                std::map<std::string, double> token_scores;
                for (const auto& t : new_token_set) token_scores.emplace(t, 1.0);
                return signals::score_documents_token(remaining, token_scores, vocab, mode);
            }
            case signals::SignalKind::SentenceShift: {
                std::vector<signals::SignalScore> scores(remaining.size());
                for (std::size_t i = 0; i < remaining.size(); ++i) {
                    scores[i].doc_id = remaining[i].id;
                    scores[i].w_s = 0.0; // length-only on the first pass
                    scores[i].w_t = signals::normalize_length(remaining[i].token_count);
                    scores[i].kind = signals::SignalKind::SentenceShift;
                }
                std::sort(scores.begin(), scores.end(),
                          [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
                return scores;
            }
            case signals::SignalKind::MlmLoss: {
                signals::SurrogateMlmParams params;
                params.vocab = &vocab;
                return signals::surrogate_mlm_loss(remaining, old_corpus, params, mode);
            }
        }
        throw InvariantError("unhandled signal kind");
    };

    std::vector<std::vector<signals::SignalScore>> iteration_scores;
    sampler::SignalProvider provider = [&](int iteration, std::span<const Document> remaining) {
        std::vector<signals::SignalScore> scores;
        const std::size_t pair_index = static_cast<std::size_t>(iteration) - 2;
        if (iteration >= 2 && pair_index < cfg.checkpoint_pairs.size()) {
            const auto& [prev_path, curr_path] = cfg.checkpoint_pairs[pair_index];
            const auto prev = signals::EmbeddingSnapshot::load_tsv(prev_path);
            const auto curr = signals::EmbeddingSnapshot::load_tsv(curr_path);
            if (cfg.signal == signals::SignalKind::SentenceShift) {
                scores = signals::score_documents_sentence(prev, curr, remaining, mode);
            } else {
                const std::size_t top_x =
                    cfg.top_x.value_or(signals::default_top_x(prev, curr));
                const auto token_scores = signals::token_shift_scores(prev, curr, top_x);
                scores = signals::score_documents_token(remaining, token_scores, vocab, mode);
            }
        } else {
            scores = base_scores(remaining);
        }
        iteration_scores.push_back(scores);
        return scores;
    };

    plan.manifests = sampler::run_iterative_sampling(new_corpus, provider, cfg.sampling, mode);
    for (const auto& manifest : plan.manifests) {
        manifest.save(path_in("manifest_" + std::to_string(manifest.iteration) + ".txt"));
    }
    for (std::size_t i = 0; i < iteration_scores.size(); ++i) {
        signals::save_scores_tsv(path_in("scores_" + std::to_string(i + 1) + ".tsv"),
                                 iteration_scores[i]);
    }

    // Placeholder trace: a forced epoch ran without the streaming monitor.
    save_monitor_csv(path_in("monitor_trace.csv"), {});
    return plan;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        for (auto part : split_on(line, ',')) row.emplace_back(part);
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json csv_to_json(const std::vector<std::vector<std::string>>& rows) {
    nlohmann::json out = nlohmann::json::array();
    if (rows.empty()) return out;
    const auto& header = rows.front();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        nlohmann::json obj;
        for (std::size_t c = 0; c < header.size() && c < rows[r].size(); ++c) {
            obj[header[c]] = rows[r][c];
        }
        out.push_back(std::move(obj));
    }
    return out;
}

} // namespace

void emit_report(const std::string& run_dir) {
    const auto path_in = [&](std::string_view name) {
        return (fs::path(run_dir) / name).string();
    };

    std::vector<std::string> missing;
    for (const char* name : {"vocab.tsv", "plan.json", "shift_report.csv", "stats.csv"}) {
        if (!fs::exists(path_in(name))) missing.emplace_back(name);
    }
    std::vector<fs::path> manifest_paths;
    if (fs::exists(run_dir)) {
        for (const auto& entry : fs::directory_iterator(run_dir)) {
            const auto name = entry.path().filename().string();
            if (name.rfind("manifest_", 0) == 0 && name.ends_with(".txt")) {
                manifest_paths.push_back(entry.path());
            }
        }
    }
    std::sort(manifest_paths.begin(), manifest_paths.end());
    if (manifest_paths.empty()) missing.emplace_back("manifests");
    if (!missing.empty()) {
        std::string joined;
        for (const auto& m : missing) {
            if (!joined.empty()) joined += ", ";
            joined += m;
        }
        throw InputError("run directory missing: " + joined);
    }

    nlohmann::json summary;

    const Vocabulary vocab = Vocabulary::load_tsv(path_in("vocab.tsv"));
    summary["vocabulary"] = {
        {"file", "vocab.tsv"},
        {"entries", vocab.entries().size()},
        {"specials", vocab.section_size(Section::Special)},
        {"wordpieces", vocab.section_size(Section::Wordpiece)},
        {"hashtags", vocab.section_size(Section::Hashtag)},
    };

    {
        std::ifstream in(path_in("plan.json"));
        nlohmann::json plan = nlohmann::json::parse(in, nullptr, false);
        if (plan.is_discarded()) throw InputError("plan.json is not valid JSON");
        nlohmann::json counts;
        for (const auto& [section, obj] : plan.items()) {
            counts[section] = {{"kept", obj.value("kept", nlohmann::json::array()).size()},
                               {"removed", obj.value("removed", nlohmann::json::array()).size()},
                               {"added", obj.value("added", nlohmann::json::array()).size()},
                               {"retained", obj.value("retained", nlohmann::json::array()).size()}};
        }
        summary["plan"] = std::move(counts);
    }

    summary["shift"] = csv_to_json(read_csv(path_in("shift_report.csv")));
    summary["coverage"] = csv_to_json(read_csv(path_in("stats.csv")));

    // Year-over-year shift rates reported for the original 2013-2019
    // Twitter top-40K analysis; kept as documentation labels only.
    summary["reference_shift_rates"] = {
        {"corpus", "twitter-2013-2019-top40k"},
        {"natural_word", {{"2013_to_2014", 0.1831}, {"2013_to_2019", 0.3749}}},
        {"wordpiece", {{"2013_to_2014", 0.1963}, {"2013_to_2019", 0.3847}}},
        {"hashtag", {{"2013_to_2014", 0.5875}, {"2013_to_2019", 0.7831}}},
    };

    nlohmann::json manifest_summaries = nlohmann::json::array();
    {
        std::ofstream sizes(path_in("manifest_sizes.csv"));
        if (!sizes) throw InputError("cannot write manifest_sizes.csv");
        sizes << "iteration,size,signal,seed\n";
        for (const auto& mp : manifest_paths) {
            const auto manifest = sampler::SampleManifest::load(mp.string());
            sizes << manifest.iteration << ',' << manifest.doc_ids.size() << ','
                  << signals::signal_kind_name(manifest.signal) << ',' << manifest.seed << '\n';
            manifest_summaries.push_back({{"iteration", manifest.iteration},
                                          {"size", manifest.doc_ids.size()},
                                          {"signal", signals::signal_kind_name(manifest.signal)},
                                          {"file", mp.filename().string()}});
        }
    }
    summary["manifests"] = std::move(manifest_summaries);

    // Missing or empty trace reads as a zero-row table.
    nlohmann::json monitor = nlohmann::json::array();
    if (fs::exists(path_in("monitor_trace.csv"))) {
        monitor = csv_to_json(read_csv(path_in("monitor_trace.csv")));
    }
    std::size_t triggers = 0;
    for (const auto& row : monitor) {
        if (row.value("triggered", "0") == "1") ++triggers;
    }
    summary["monitor"] = {{"rows", monitor.size()}, {"triggers", triggers},
                          {"trace", std::move(monitor)}};

    std::ofstream out(path_in("summary.json"));
    if (!out) throw InputError("cannot write summary.json");
    out << summary.dump(2) << '\n';
}

} // namespace vocabdrift::pipeline
