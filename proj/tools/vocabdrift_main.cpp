#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/drift.hpp"
#include "vocabdrift/errors.hpp"
#include "vocabdrift/pipeline.hpp"
#include "vocabdrift/sampler.hpp"
#include "vocabdrift/signals.hpp"
#include "vocabdrift/text_io.hpp"
#include "vocabdrift/tokenizer.hpp"
#include "vocabdrift/vocab_update.hpp"

namespace vd = vocabdrift;

namespace {

std::uint64_t effective_seed(std::uint64_t cli_seed) {
    // VOCABDRIFT_SEED wins over --seed for scripted reruns.
    if (const char* env = std::getenv("VOCABDRIFT_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return cli_seed;
}

std::unordered_set<std::string> load_token_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vd::InputError("cannot open token list: " + path);
    std::unordered_set<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) tokens.insert(line);
    }
    return tokens;
}

vd::HashtagMode parse_mode(const std::string& text) {
    if (text == "whole") return vd::HashtagMode::WholeHashtags;
    if (text == "break") return vd::HashtagMode::BreakDown;
    throw vd::InputError("mode must be \"whole\" or \"break\"");
}

struct ScoreArgs {
    std::string signal = "token";
    std::string docs;
    std::string vocab;
    std::string prev;
    std::string curr;
    std::string ref;
    std::string ext;
    std::string new_tokens;
    std::size_t top_x = 0; // 0 = default (5% of shared tokens)
    int max_masks = 5;
    std::optional<std::uint64_t> mask_seed;
};

std::vector<vd::signals::SignalScore> compute_scores(const ScoreArgs& args,
                                                     std::span<const vd::corpus::Document> docs) {
    const auto kind = vd::signals::parse_signal_kind(args.signal);
    std::optional<vd::Vocabulary> vocab;
    if (!args.vocab.empty()) vocab = vd::Vocabulary::load_tsv(args.vocab);

    if (!args.ext.empty()) {
        const auto raw = vd::signals::load_raw_scores_tsv(args.ext);
        return vd::signals::scores_from_raw(docs, raw, kind, vocab ? &*vocab : nullptr);
    }

    switch (kind) {
        case vd::signals::SignalKind::TokenShift: {
            if (!vocab) throw vd::InputError("token signal needs --vocab");
            std::map<std::string, double> token_scores;
            if (!args.prev.empty() && !args.curr.empty()) {
                const auto prev = vd::signals::EmbeddingSnapshot::load_tsv(args.prev);
                const auto curr = vd::signals::EmbeddingSnapshot::load_tsv(args.curr);
                const std::size_t top_x =
                    args.top_x > 0 ? args.top_x : vd::signals::default_top_x(prev, curr);
                token_scores = vd::signals::token_shift_scores(prev, curr, top_x);
            } else if (!args.new_tokens.empty()) {
                // First iteration: no preceding checkpoint, new tokens score 1.
                token_scores = vd::signals::token_shift_scores(
                    std::nullopt, vd::signals::EmbeddingSnapshot{}, 1,
                    load_token_list(args.new_tokens));
            } else {
                throw vd::InputError("token signal needs --prev/--curr or --new-tokens");
            }
            return vd::signals::score_documents_token(docs, token_scores, *vocab);
        }
        case vd::signals::SignalKind::SentenceShift: {
            if (args.curr.empty()) throw vd::InputError("sentence signal needs --curr");
            const auto curr = vd::signals::EmbeddingSnapshot::load_tsv(args.curr);
            std::optional<vd::signals::EmbeddingSnapshot> prev;
            if (!args.prev.empty()) prev = vd::signals::EmbeddingSnapshot::load_tsv(args.prev);
            return vd::signals::score_documents_sentence(prev, curr, docs);
        }
        case vd::signals::SignalKind::MlmLoss: {
            std::vector<vd::corpus::Document> reference;
            if (!args.ref.empty()) {
                reference = vd::corpus::ingest(args.ref);
            } else {
                reference.assign(docs.begin(), docs.end()); // self-surprisal
            }
            vd::signals::SurrogateMlmParams params;
            params.max_masks = args.max_masks;
            params.mask_seed = args.mask_seed;
            params.vocab = vocab ? &*vocab : nullptr;
            return vd::signals::surrogate_mlm_loss(docs, reference, params);
        }
    }
    throw vd::InvariantError("unhandled signal kind");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic-vocabulary toolkit: subword vocabularies, drift analytics, "
                 "hard-example sampling"};
    app.require_subcommand(1);

    try {
        // ---- preprocess ----
        auto* preprocess = app.add_subcommand("preprocess", "normalize a JSONL corpus");
        std::string pre_in, pre_out;
        std::optional<int> pre_year;
        preprocess->add_option("--in", pre_in)->required();
        preprocess->add_option("--out", pre_out)->required();
        preprocess->add_option("--year", pre_year, "keep only this epoch");
        preprocess->callback([&] {
            const auto docs = vd::corpus::ingest(pre_in, pre_year);
            vd::corpus::write_jsonl(pre_out, docs);
            std::cerr << "preprocess: " << docs.size() << " documents -> " << pre_out << '\n';
        });

        // ---- build-vocab ----
        auto* build = app.add_subcommand("build-vocab", "induce a subword vocabulary");
        std::string bv_in, bv_out, bv_mode = "whole", bv_preset;
        vd::tokenizer::InductionParams bv_params;
        build->add_option("--in", bv_in)->required();
        build->add_option("--out", bv_out)->required();
        build->add_option("--wp-cap", bv_params.wordpiece_capacity, "wordpiece capacity");
        auto* ht_opt = build->add_option("--ht-cap", bv_params.hashtag_capacity, "hashtag capacity");
        build->add_option("--mode", bv_mode, "whole|break");
        build->add_option("--min-count", bv_params.min_count);
        build->add_option("--preset", bv_preset, "desk|paper capacity preset");
        build->callback([&] {
            if (bv_preset == "paper") {
                const auto preset = vd::tokenizer::paper_preset();
                bv_params.wordpiece_capacity = preset.wordpiece_capacity;
                bv_params.hashtag_capacity = preset.hashtag_capacity;
            } else if (!bv_preset.empty() && bv_preset != "desk") {
                throw vd::InputError("unknown preset: " + bv_preset);
            }
            bv_params.mode = parse_mode(bv_mode);
            if (bv_params.mode == vd::HashtagMode::BreakDown) {
                if (ht_opt->count() > 0 && bv_params.hashtag_capacity != 0) {
                    throw vd::InputError("break mode keeps no hashtag section; --ht-cap must be 0");
                }
                bv_params.hashtag_capacity = 0;
            }
            const auto docs = vd::corpus::ingest(bv_in);
            const auto vocab = vd::tokenizer::induce_vocabulary(docs, bv_params);
            vocab.save_tsv(bv_out);
            std::cerr << "build-vocab: " << vocab.entries().size() << " entries -> " << bv_out
                      << '\n';
        });

        // ---- tokenize ----
        auto* tok = app.add_subcommand("tokenize", "segment a corpus into pieces");
        std::string tk_vocab, tk_in, tk_out;
        tok->add_option("--vocab", tk_vocab)->required();
        tok->add_option("--in", tk_in)->required();
        tok->add_option("--out", tk_out)->required();
        tok->callback([&] {
            const auto vocab = vd::Vocabulary::load_tsv(tk_vocab);
            const auto docs = vd::corpus::ingest(tk_in);
            std::ofstream out(tk_out);
            if (!out) throw vd::InputError("cannot write " + tk_out);
            for (const auto& doc : docs) {
                const auto result = vd::tokenizer::tokenize_document(vocab, doc);
                nlohmann::json obj;
                obj["id"] = doc.id;
                obj["pieces"] = result.pieces;
                obj["word_count"] = result.word_count;
                obj["oov_word_count"] = result.oov_word_count;
                out << obj.dump() << '\n';
            }
        });

        // ---- stats ----
        auto* stats = app.add_subcommand("stats", "OOV rate and fertility of a corpus");
        std::string st_vocab, st_in;
        stats->add_option("--vocab", st_vocab)->required();
        stats->add_option("--in", st_in)->required();
        stats->callback([&] {
            const auto vocab = vd::Vocabulary::load_tsv(st_vocab);
            const auto docs = vd::corpus::ingest(st_in);
            const auto s = vd::tokenizer::coverage_stats(vocab, docs);
            std::cout << "oov_rate\t" << vd::format_double(s.oov_rate) << '\n'
                      << "fertility\t" << vd::format_double(s.fertility) << '\n'
                      << "words\t" << s.word_count << '\n'
                      << "pieces\t" << s.piece_count << '\n'
                      << "oov_words\t" << s.oov_word_count << '\n';
        });

        // ---- shift-report ----
        auto* shift = app.add_subcommand("shift-report", "top-K vocabulary shift between corpora");
        std::string sh_a, sh_b, sh_kind = "word", sh_out;
        std::size_t sh_k = 40000;
        shift->add_option("--a", sh_a)->required();
        shift->add_option("--b", sh_b)->required();
        shift->add_option("--kind", sh_kind, "word|wordpiece|hashtag");
        shift->add_option("--k", sh_k)->required();
        shift->add_option("--out", sh_out)->required();
        shift->callback([&] {
            const auto kind = vd::drift::parse_token_kind(sh_kind);
            const auto docs_a = vd::corpus::ingest(sh_a);
            const auto docs_b = vd::corpus::ingest(sh_b);
            const auto va = vd::drift::top_k_vocab(docs_a, kind, sh_k);
            const auto vb = vd::drift::top_k_vocab(docs_b, kind, sh_k);
            std::ofstream out(sh_out);
            if (!out) throw vd::InputError("cannot write " + sh_out);
            out << "kind,epoch_a,epoch_b,k,shift\n";
            out << sh_kind << ',' << va.epoch << ',' << vb.epoch << ',' << sh_k << ','
                << vd::format_double(vd::drift::vocab_shift(va, vb)) << '\n';
        });

        // ---- cooc-shift ----
        auto* cooc = app.add_subcommand("cooc-shift", "semantic shift of an anchor token");
        std::string cs_a, cs_b, cs_anchor;
        std::size_t cs_m = 1000;
        cooc->add_option("--a", cs_a)->required();
        cooc->add_option("--b", cs_b)->required();
        cooc->add_option("--anchor", cs_anchor)->required();
        cooc->add_option("--m", cs_m, "profile size");
        cooc->callback([&] {
            const auto docs_a = vd::corpus::ingest(cs_a);
            const auto docs_b = vd::corpus::ingest(cs_b);
            auto pa = vd::drift::cooccurrence_profile(docs_a, cs_anchor, cs_m);
            auto pb = vd::drift::cooccurrence_profile(docs_b, cs_anchor, cs_m);
            // Equal-size profiles: truncate to the shorter of the two.
            const std::size_t m = std::min(pa.top_words.size(), pb.top_words.size());
            if (m == 0) throw vd::InputError("anchor has no co-occurring words");
            pa.top_words.resize(m);
            pb.top_words.resize(m);
            std::cout << "anchor,epoch_a,epoch_b,m,shift\n";
            std::cout << cs_anchor << ',' << pa.epoch << ',' << pb.epoch << ',' << m << ','
                      << vd::format_double(vd::drift::semantic_shift_rate(pa, pb)) << '\n';
        });

        // ---- update-vocab ----
        auto* update = app.add_subcommand("update-vocab", "fixed-size vocabulary refresh");
        std::string uv_current, uv_new, uv_out, uv_plan;
        std::int64_t uv_min_count = 1;
        update->add_option("--current", uv_current)->required();
        update->add_option("--new", uv_new)->required();
        update->add_option("--min-count", uv_min_count);
        update->add_option("--out", uv_out)->required();
        update->add_option("--plan", uv_plan)->required();
        update->callback([&] {
            const auto current = vd::Vocabulary::load_tsv(uv_current);
            const auto docs = vd::corpus::ingest(uv_new);
            const auto result = vd::vocab_update::update_vocabulary(current, docs, uv_min_count);
            result.vocabulary.save_tsv(uv_out);
            vd::vocab_update::save_plan_json(uv_plan, result.plans);
            for (const auto& plan : result.plans) {
                std::cerr << "update-vocab[" << vd::section_name(plan.section)
                          << "]: kept " << plan.kept.size() << ", removed " << plan.removed.size()
                          << ", added " << plan.added.size() << ", retained "
                          << plan.retained.size() << '\n';
            }
        });

        // ---- score ----
        auto* score = app.add_subcommand("score", "per-document drift signals");
        ScoreArgs sc;
        std::string sc_out;
        std::uint64_t sc_mask_seed = 0;
        score->add_option("--signal", sc.signal, "token|sentence|mlm")->required();
        score->add_option("--docs", sc.docs)->required();
        score->add_option("--out", sc_out)->required();
        score->add_option("--vocab", sc.vocab);
        score->add_option("--prev", sc.prev);
        score->add_option("--curr", sc.curr);
        score->add_option("--ref", sc.ref);
        score->add_option("--ext", sc.ext, "externally computed raw scores");
        score->add_option("--new-tokens", sc.new_tokens, "first-iteration new-token list");
        score->add_option("--top-x", sc.top_x);
        score->add_option("--max-masks", sc.max_masks);
        auto* mask_seed_opt = score->add_option("--mask-seed", sc_mask_seed,
                                                "randomize mask positions");
        score->callback([&] {
            if (mask_seed_opt->count() > 0) sc.mask_seed = sc_mask_seed;
            const auto docs = vd::corpus::ingest(sc.docs);
            const auto scores = compute_scores(sc, docs);
            vd::signals::save_scores_tsv(sc_out, scores);
        });

        // ---- sample ----
        auto* sample = app.add_subcommand("sample", "one weighted draw from a score file");
        std::string sm_scores, sm_out;
        std::size_t sm_k = 0;
        int sm_iteration = 1;
        vd::sampler::SamplingConfig sm_cfg;
        sample->add_option("--scores", sm_scores)->required();
        sample->add_option("--k", sm_k)->required();
        sample->add_option("--alpha", sm_cfg.alpha);
        sample->add_option("--seed", sm_cfg.seed);
        sample->add_option("--min-weight", sm_cfg.min_weight);
        sample->add_option("--iteration", sm_iteration);
        sample->add_option("--out", sm_out)->required();
        sample->callback([&] {
            sm_cfg.seed = effective_seed(sm_cfg.seed);
            const auto scores = vd::signals::load_scores_tsv(sm_scores);
            auto manifest = vd::sampler::weighted_sample(scores, sm_k, sm_cfg);
            manifest.iteration = sm_iteration;
            manifest.save(sm_out);
        });

        // ---- mine ----
        auto* mine = app.add_subcommand("mine", "iterative hard-example mining");
        ScoreArgs mn;
        std::string mn_sizes, mn_out_dir;
        vd::sampler::SamplingConfig mn_cfg;
        mine->add_option("--docs", mn.docs)->required();
        mine->add_option("--signal", mn.signal, "token|sentence|mlm")->required();
        mine->add_option("--sizes", mn_sizes, "a,b,c or paper-ratio:<budget>")->required();
        mine->add_option("--seed", mn_cfg.seed);
        mine->add_option("--alpha", mn_cfg.alpha);
        mine->add_option("--min-weight", mn_cfg.min_weight);
        mine->add_option("--out-dir", mn_out_dir)->required();
        mine->add_option("--vocab", mn.vocab);
        mine->add_option("--prev", mn.prev);
        mine->add_option("--curr", mn.curr);
        mine->add_option("--ref", mn.ref);
        mine->add_option("--new-tokens", mn.new_tokens);
        mine->add_option("--top-x", mn.top_x);
        mine->add_option("--max-masks", mn.max_masks);
        mine->callback([&] {
            mn_cfg.seed = effective_seed(mn_cfg.seed);
            mn_cfg.iteration_sizes = vd::sampler::parse_iteration_sizes(mn_sizes);
            const auto docs = vd::corpus::ingest(mn.docs);
            const auto provider = [&](int, std::span<const vd::corpus::Document> remaining) {
                return compute_scores(mn, remaining);
            };
            const auto manifests = vd::sampler::run_iterative_sampling(docs, provider, mn_cfg);
            std::filesystem::create_directories(mn_out_dir);
            for (const auto& manifest : manifests) {
                manifest.save((std::filesystem::path(mn_out_dir) /
                               ("manifest_" + std::to_string(manifest.iteration) + ".txt"))
                                  .string());
            }
            std::cerr << "mine: " << manifests.size() << " manifests -> " << mn_out_dir << '\n';
        });

        // ---- pipeline ----
        auto* pipe = app.add_subcommand("pipeline", "vocabulary update + mining epoch");
        std::string pl_old, pl_new, pl_vocab, pl_signal = "token", pl_sizes, pl_out;
        vd::pipeline::EpochConfig pl_cfg;
        std::size_t pl_top_x = 0;
        pipe->add_option("--old", pl_old)->required();
        pipe->add_option("--new", pl_new)->required();
        pipe->add_option("--vocab", pl_vocab)->required();
        pipe->add_option("--signal", pl_signal, "token|sentence|mlm");
        pipe->add_option("--sizes", pl_sizes)->required();
        pipe->add_option("--alpha", pl_cfg.sampling.alpha);
        pipe->add_option("--seed", pl_cfg.sampling.seed);
        pipe->add_option("--min-weight", pl_cfg.sampling.min_weight);
        pipe->add_option("--min-count", pl_cfg.min_count);
        pipe->add_option("--shift-k", pl_cfg.shift_top_k);
        pipe->add_option("--top-x", pl_top_x);
        pipe->add_option("--out", pl_out)->required();
        pipe->callback([&] {
            pl_cfg.signal = vd::signals::parse_signal_kind(pl_signal);
            pl_cfg.sampling.seed = effective_seed(pl_cfg.sampling.seed);
            pl_cfg.sampling.iteration_sizes = vd::sampler::parse_iteration_sizes(pl_sizes);
            if (pl_top_x > 0) pl_cfg.top_x = pl_top_x;
            const auto vocab = vd::Vocabulary::load_tsv(pl_vocab);
            const auto old_docs = vd::corpus::ingest(pl_old);
            const auto new_docs = vd::corpus::ingest(pl_new);
            vd::pipeline::run_epoch(vocab, old_docs, new_docs, pl_cfg, pl_out);
            vd::pipeline::emit_report(pl_out);
            std::cerr << "pipeline: epoch artifacts -> " << pl_out << '\n';
        });

        // ---- monitor ----
        auto* monitor = app.add_subcommand("monitor", "windowed surrogate-loss drift monitor");
        std::string mo_stream, mo_vocab, mo_out;
        vd::pipeline::MonitorState mo_state;
        monitor->add_option("--stream", mo_stream)->required();
        monitor->add_option("--vocab", mo_vocab)->required();
        monitor->add_option("--window", mo_state.window_size);
        monitor->add_option("--delta", mo_state.rel_threshold);
        monitor->add_option("--patience", mo_state.patience);
        monitor->add_option("--out", mo_out, "write the trace here instead of stdout");
        monitor->callback([&] {
            const auto vocab = vd::Vocabulary::load_tsv(mo_vocab);
            const auto docs = vd::corpus::ingest(mo_stream);
            const auto rows = vd::pipeline::monitor_corpus(docs, vocab, mo_state);
            if (!mo_out.empty()) {
                vd::pipeline::save_monitor_csv(mo_out, rows);
            } else {
                std::cout << "window,mean_loss,baseline,breached,triggered\n";
                for (const auto& r : rows) {
                    std::cout << r.window << ',' << vd::format_double(r.mean_loss) << ','
                              << vd::format_double(r.baseline) << ',' << (r.breached ? 1 : 0)
                              << ',' << (r.triggered ? 1 : 0) << '\n';
                }
            }
        });

        // ---- report ----
        auto* report = app.add_subcommand("report", "summarize a pipeline run directory");
        std::string rp_dir;
        report->add_option("--dir", rp_dir)->required();
        report->callback([&] { vd::pipeline::emit_report(rp_dir); });

        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const vd::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const vd::InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
