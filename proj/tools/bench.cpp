// Times each data-parallel kernel in serial and OpenMP mode over a
// synthetic corpus and checks that both paths agree.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/counting.hpp"
#include "vocabdrift/hash.hpp"
#include "vocabdrift/parallel.hpp"
#include "vocabdrift/sampler.hpp"
#include "vocabdrift/signals.hpp"
#include "vocabdrift/tokenizer.hpp"

namespace vd = vocabdrift;
using vd::corpus::Document;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

// Zipf-flavored synthetic tweets: a few thousand lexicon words, short docs,
// occasional hashtags.
std::vector<Document> synthetic_corpus(std::size_t n_docs, std::uint64_t seed) {
    std::vector<std::string> lexicon;
    for (int i = 0; i < 4000; ++i) {
        std::string word;
        std::uint64_t h = vd::splitmix64(seed + 7919 * static_cast<std::uint64_t>(i));
        const int len = 3 + static_cast<int>(h % 7);
        for (int c = 0; c < len; ++c) {
            h = vd::splitmix64(h);
            word.push_back(static_cast<char>('a' + h % 26));
        }
        lexicon.push_back(std::move(word));
    }

    std::vector<Document> docs(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
        std::uint64_t h = vd::splitmix64(seed ^ (0x51ED2701 + i));
        std::string text;
        const int words = 4 + static_cast<int>(h % 14);
        for (int w = 0; w < words; ++w) {
            h = vd::splitmix64(h);
            // Square the draw to skew towards the head of the lexicon.
            const double u = vd::unit_interval(h);
            const auto idx = static_cast<std::size_t>(u * u * (lexicon.size() - 1));
            if (!text.empty()) text.push_back(' ');
            if (h % 17 == 0) text.push_back('#');
            text.append(lexicon[idx]);
        }
        docs[i].id = "d" + std::to_string(i);
        docs[i].text = std::move(text);
        docs[i].epoch = 2013;
        docs[i].token_count = words;
    }
    return docs;
}

template <typename Fn>
double time_best_of(int reps, const Fn& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        fn();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-24s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms, equal ? "match" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel benchmark: serial reference vs OpenMP"};
    std::size_t n_docs = 200000;
    int reps = 3;
    std::uint64_t seed = 42;
    app.add_option("--docs", n_docs, "synthetic corpus size");
    app.add_option("--reps", reps, "repetitions, best time wins");
    app.add_option("--seed", seed);
    CLI11_PARSE(app, argc, argv);

    std::printf("workers: %d, corpus: %zu docs\n", vd::worker_count(vd::ExecMode::Parallel),
                n_docs);
    const auto docs = synthetic_corpus(n_docs, seed);

    const auto word_projection = [](std::string_view tok) { return std::string(tok); };
    vd::TokenCounts counts_serial;
    vd::TokenCounts counts_parallel;
    const double count_s = time_best_of(reps, [&] {
        counts_serial = vd::count_tokens(docs, word_projection, vd::ExecMode::Serial);
    });
    const double count_p = time_best_of(reps, [&] {
        counts_parallel = vd::count_tokens(docs, word_projection, vd::ExecMode::Parallel);
    });
    report("count_tokens", count_s, count_p, counts_serial == counts_parallel);

    vd::tokenizer::InductionParams params;
    params.wordpiece_capacity = 1200;
    params.hashtag_capacity = 200;
    const auto vocab = vd::tokenizer::induce_vocabulary(docs, params);

    vd::TokenCounts pieces_serial;
    vd::TokenCounts pieces_parallel;
    const double pieces_s = time_best_of(reps, [&] {
        pieces_serial = vd::tokenizer::count_pieces(vocab, docs, vd::ExecMode::Serial);
    });
    const double pieces_p = time_best_of(reps, [&] {
        pieces_parallel = vd::tokenizer::count_pieces(vocab, docs, vd::ExecMode::Parallel);
    });
    report("count_pieces", pieces_s, pieces_p, pieces_serial == pieces_parallel);

    const std::span<const Document> reference(docs.data(), std::min<std::size_t>(docs.size(), 20000));
    std::vector<vd::signals::SignalScore> loss_serial;
    std::vector<vd::signals::SignalScore> loss_parallel;
    vd::signals::SurrogateMlmParams mlm;
    mlm.vocab = &vocab;
    const double loss_s = time_best_of(reps, [&] {
        loss_serial = vd::signals::surrogate_mlm_loss(docs, reference, mlm, vd::ExecMode::Serial);
    });
    const double loss_p = time_best_of(reps, [&] {
        loss_parallel = vd::signals::surrogate_mlm_loss(docs, reference, mlm, vd::ExecMode::Parallel);
    });
    bool loss_equal = loss_serial.size() == loss_parallel.size();
    for (std::size_t i = 0; loss_equal && i < loss_serial.size(); ++i) {
        loss_equal = loss_serial[i].doc_id == loss_parallel[i].doc_id &&
                     loss_serial[i].w_s == loss_parallel[i].w_s &&
                     loss_serial[i].w_t == loss_parallel[i].w_t;
    }
    report("surrogate_mlm_loss", loss_s, loss_p, loss_equal);

    vd::sampler::SamplingConfig cfg;
    cfg.seed = seed;
    const std::size_t k = std::max<std::size_t>(1, docs.size() / 10);
    vd::sampler::SampleManifest pick_serial;
    vd::sampler::SampleManifest pick_parallel;
    const double key_s = time_best_of(reps, [&] {
        pick_serial = vd::sampler::weighted_sample(loss_serial, k, cfg, vd::ExecMode::Serial);
    });
    const double key_p = time_best_of(reps, [&] {
        pick_parallel = vd::sampler::weighted_sample(loss_serial, k, cfg, vd::ExecMode::Parallel);
    });
    report("weighted_sample", key_s, key_p, pick_serial.doc_ids == pick_parallel.doc_ids);

    return 0;
}
