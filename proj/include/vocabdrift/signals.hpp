#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/parallel.hpp"
#include "vocabdrift/vocabulary.hpp"

namespace vocabdrift::signals {

using corpus::Document;

enum class SignalKind { TokenShift, SentenceShift, MlmLoss };

std::string_view signal_kind_name(SignalKind k);
SignalKind parse_signal_kind(std::string_view name);

/// token -> vector (or doc id -> vector) from one checkpoint file.
struct EmbeddingSnapshot {
    std::size_t dim = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;
    std::string label;

    static EmbeddingSnapshot load_tsv(const std::string& path);
    void save_tsv(const std::string& path) const;
};

using SentenceEmbeddingSet = EmbeddingSnapshot; // keyed by doc id

struct SignalScore {
    std::string doc_id;
    double w_s = 0.0; // drift signal in [0,1]
    double w_t = 0.0; // length weight in [0,1]
    SignalKind kind = SignalKind::TokenShift;
};

/// 1 - cos(u,v); errors on zero vectors or mismatched dims.
double cosine_distance(std::span<const double> u, std::span<const double> v);

/// min(1, piece_count / 10).
double normalize_length(int piece_count);

/// Per-token drift: the top_x largest embedding shifts between two
/// checkpoints (ties lexicographic), everything else scoring zero. With no
/// previous checkpoint, every token in `new_tokens` scores 1.
std::map<std::string, double> token_shift_scores(
    const std::optional<EmbeddingSnapshot>& prev,
    const EmbeddingSnapshot& curr,
    std::size_t top_x,
    const std::unordered_set<std::string>& new_tokens = {});

/// top_x default: 5% of the shared token set, at least 1.
std::size_t default_top_x(const EmbeddingSnapshot& prev, const EmbeddingSnapshot& curr);

/// Sums token scores over each document's pieces and normalizes by the
/// pool maximum. Results ordered by doc id.
std::vector<SignalScore> score_documents_token(std::span<const Document> docs,
                                               const std::map<std::string, double>& token_scores,
                                               const Vocabulary& vocab,
                                               ExecMode mode = default_exec_mode());

/// Sentence-embedding shift per document. A missing previous set is the
/// first-iteration rule: w_s = 0 everywhere and length drives sampling.
std::vector<SignalScore> score_documents_sentence(
    const std::optional<SentenceEmbeddingSet>& prev,
    const SentenceEmbeddingSet& curr,
    std::span<const Document> docs,
    ExecMode mode = default_exec_mode());

struct SurrogateMlmParams {
    int max_masks = 5;
    std::optional<std::uint64_t> mask_seed; // rarest-first when unset
    const Vocabulary* vocab = nullptr;      // induced from the reference when null
};

/// Model-free stand-in for masked-token loss: surprisal of masked pieces
/// under an add-one-smoothed unigram distribution built from the
/// reference corpus.
std::vector<SignalScore> surrogate_mlm_loss(std::span<const Document> docs,
                                            std::span<const Document> reference_docs,
                                            const SurrogateMlmParams& params = {},
                                            ExecMode mode = default_exec_mode());

/// Unnormalized per-document surrogate losses in input order; this is what
/// the drift monitor averages per window.
std::vector<double> surrogate_raw_losses(std::span<const Document> docs,
                                         std::span<const Document> reference_docs,
                                         const SurrogateMlmParams& params = {},
                                         ExecMode mode = default_exec_mode());

/// Pool-max normalization of externally supplied raw scores (TSV
/// doc_id<TAB>raw). Every doc must be covered.
std::vector<SignalScore> scores_from_raw(std::span<const Document> docs,
                                         const std::unordered_map<std::string, double>& raw,
                                         SignalKind kind,
                                         const Vocabulary* vocab = nullptr);

std::unordered_map<std::string, double> load_raw_scores_tsv(const std::string& path);

/// Test-only sentence surrogate: mean of the snapshot vectors of a
/// document's whitespace tokens.
SentenceEmbeddingSet mean_sentence_embeddings(const EmbeddingSnapshot& tokens,
                                              std::span<const Document> docs);

void save_scores_tsv(const std::string& path, std::span<const SignalScore> scores);
std::vector<SignalScore> load_scores_tsv(const std::string& path);

} // namespace vocabdrift::signals
