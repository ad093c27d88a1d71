#include "vocabdrift/signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vocabdrift/errors.hpp"
#include "vocabdrift/hash.hpp"
#include "vocabdrift/text_io.hpp"
#include "vocabdrift/tokenizer.hpp"

namespace vocabdrift::signals {

std::string_view signal_kind_name(SignalKind k) {
    switch (k) {
        case SignalKind::TokenShift: return "token";
        case SignalKind::SentenceShift: return "sentence";
        case SignalKind::MlmLoss: return "mlm";
    }
    return "token";
}

SignalKind parse_signal_kind(std::string_view name) {
    if (name == "token") return SignalKind::TokenShift;
    if (name == "sentence") return SignalKind::SentenceShift;
    if (name == "mlm") return SignalKind::MlmLoss;
    throw InputError("unknown signal kind: " + std::string(name));
}

EmbeddingSnapshot EmbeddingSnapshot::load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open embedding file: " + path);
    EmbeddingSnapshot snap;
    snap.label = path;

    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty embedding file");
    {
        const auto parts = split_on(line, '\t');
        if (parts.size() != 2 || parts[0] != "dim") {
            throw InputError(path + ": first line must be dim<TAB>D");
        }
        snap.dim = static_cast<std::size_t>(std::strtoull(std::string(parts[1]).c_str(), nullptr, 10));
        if (snap.dim == 0) throw InputError(path + ": dimension must be positive");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto parts = split_on(line, '\t');
        if (parts.size() != 2) {
            throw InputError(path + ": line " + std::to_string(line_no) +
                             ": expected token<TAB>values");
        }
        std::vector<double> vec;
        vec.reserve(snap.dim);
        const std::string values(parts[1]);
        const char* p = values.c_str();
        char* next = nullptr;
        while (*p != '\0') {
            const double v = std::strtod(p, &next);
            if (next == p) break;
            vec.push_back(v);
            p = next;
        }
        if (vec.size() != snap.dim) {
            throw InputError(path + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(snap.dim) + " values");
        }
        if (!snap.vectors.emplace(std::string(parts[0]), std::move(vec)).second) {
            throw InputError(path + ": duplicate token \"" + std::string(parts[0]) + "\"");
        }
    }
    return snap;
}

void EmbeddingSnapshot::save_tsv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write embedding file: " + path);
    out << "dim\t" << dim << '\n';
    std::vector<const std::string*> keys;
    keys.reserve(vectors.size());
    for (const auto& [token, vec] : vectors) keys.push_back(&token);
    std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) { return *a < *b; });
    for (const auto* token : keys) {
        out << *token << '\t';
        const auto& vec = vectors.at(*token);
        for (std::size_t i = 0; i < vec.size(); ++i) {
            if (i > 0) out << ' ';
            out << format_double(vec[i]);
        }
        out << '\n';
    }
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw InvariantError("cosine distance: dimension mismatch");
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw InputError("cosine distance: zero vector");
    return 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
}

double normalize_length(int piece_count) {
    if (piece_count < 0) throw InvariantError("negative piece count");
    return std::min(1.0, static_cast<double>(piece_count) / 10.0);
}

std::map<std::string, double> token_shift_scores(const std::optional<EmbeddingSnapshot>& prev,
                                                 const EmbeddingSnapshot& curr,
                                                 std::size_t top_x,
                                                 const std::unordered_set<std::string>& new_tokens) {
    if (top_x == 0) throw InvariantError("top_x must be >= 1");
    std::map<std::string, double> scores;
    if (!prev.has_value()) {
        // First iteration: no preceding checkpoint, new tokens carry the
        // whole signal.
        for (const auto& t : new_tokens) scores.emplace(t, 1.0);
        return scores;
    }

    std::vector<std::pair<std::string, double>> shifts;
    for (const auto& [token, vec] : prev->vectors) {
        const auto it = curr.vectors.find(token);
        if (it == curr.vectors.end()) continue;
        shifts.emplace_back(token, cosine_distance(vec, it->second));
    }
    if (shifts.empty()) {
        throw InputError("token shift: the two snapshots share no tokens");
    }
    std::sort(shifts.begin(), shifts.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (shifts.size() > top_x) shifts.resize(top_x);
    for (auto& [token, dist] : shifts) scores.emplace(std::move(token), dist);
    return scores;
}

std::size_t default_top_x(const EmbeddingSnapshot& prev, const EmbeddingSnapshot& curr) {
    std::size_t shared = 0;
    for (const auto& [token, vec] : prev.vectors) {
        if (curr.vectors.find(token) != curr.vectors.end()) ++shared;
    }
    return std::max<std::size_t>(1, (shared + 19) / 20);
}

namespace {

struct RawScore {
    double raw = 0.0;
    int piece_count = 0;
};

std::vector<SignalScore> normalize_pool(std::span<const Document> docs,
                                        const std::vector<RawScore>& raws, SignalKind kind) {
    double max_raw = 0.0;
    for (const auto& r : raws) max_raw = std::max(max_raw, r.raw);

    std::vector<SignalScore> scores(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        scores[i].doc_id = docs[i].id;
        scores[i].kind = kind;
        scores[i].w_s = max_raw > 0.0 ? raws[i].raw / max_raw : 0.0;
        scores[i].w_t = normalize_length(raws[i].piece_count);
    }
    std::sort(scores.begin(), scores.end(),
              [](const SignalScore& a, const SignalScore& b) { return a.doc_id < b.doc_id; });
    return scores;
}

template <typename Fn>
void per_document(std::size_t count, ExecMode mode, const Fn& fn) {
    const auto n = static_cast<std::int64_t>(count);
#ifdef _OPENMP
    if (mode == ExecMode::Parallel && n > 1) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)mode;
#endif
    for (std::int64_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

} // namespace

std::vector<SignalScore> score_documents_token(std::span<const Document> docs,
                                               const std::map<std::string, double>& token_scores,
                                               const Vocabulary& vocab, ExecMode mode) {
    std::vector<RawScore> raws(docs.size());
    per_document(docs.size(), mode, [&](std::size_t i) {
        const auto result = tokenizer::tokenize_document(vocab, docs[i]);
        double raw = 0.0;
        for (const auto& piece : result.pieces) {
            const auto it = token_scores.find(piece);
            if (it != token_scores.end()) raw += it->second;
        }
        raws[i].raw = raw;
        raws[i].piece_count = static_cast<int>(result.pieces.size());
    });
    return normalize_pool(docs, raws, SignalKind::TokenShift);
}

std::vector<SignalScore> score_documents_sentence(const std::optional<SentenceEmbeddingSet>& prev,
                                                  const SentenceEmbeddingSet& curr,
                                                  std::span<const Document> docs, ExecMode mode) {
    // Coverage check first so the error names the offending id whichever
    // thread would have hit it.
    for (const auto& doc : docs) {
        if (curr.vectors.find(doc.id) == curr.vectors.end()) {
            throw InputError("sentence embeddings missing doc id \"" + doc.id + "\"");
        }
        if (prev.has_value() && prev->vectors.find(doc.id) == prev->vectors.end()) {
            throw InputError("sentence embeddings missing doc id \"" + doc.id + "\"");
        }
    }
    if (prev.has_value() && prev->dim != curr.dim) {
        throw InputError("sentence embeddings disagree on dimension");
    }

    // The parallel body must not throw; zero vectors surface as NaN and
    // are reported afterwards.
    std::vector<RawScore> raws(docs.size());
    per_document(docs.size(), mode, [&](std::size_t i) {
        // First iteration (no previous checkpoint): length alone drives
        // sampling, so the raw shift stays zero.
        double raw = 0.0;
        if (prev.has_value()) {
            const auto& u = prev->vectors.at(docs[i].id);
            const auto& v = curr.vectors.at(docs[i].id);
            double dot = 0.0;
            double nu = 0.0;
            double nv = 0.0;
            for (std::size_t d = 0; d < u.size(); ++d) {
                dot += u[d] * v[d];
                nu += u[d] * u[d];
                nv += v[d] * v[d];
            }
            raw = (nu == 0.0 || nv == 0.0)
                      ? std::numeric_limits<double>::quiet_NaN()
                      : 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
        }
        raws[i].raw = raw;
        raws[i].piece_count = docs[i].token_count;
    });
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (std::isnan(raws[i].raw)) {
            throw InputError("zero sentence embedding for doc id \"" + docs[i].id + "\"");
        }
    }
    return normalize_pool(docs, raws, SignalKind::SentenceShift);
}

namespace {

std::vector<RawScore> surrogate_raw(std::span<const Document> docs,
                                    std::span<const Document> reference_docs,
                                    const SurrogateMlmParams& params, ExecMode mode) {
    if (reference_docs.empty()) throw InputError("surrogate loss needs a reference corpus");
    if (params.max_masks < 1) throw InvariantError("max_masks must be >= 1");

    std::optional<Vocabulary> induced;
    const Vocabulary* vocab = params.vocab;
    if (vocab == nullptr) {
        tokenizer::InductionParams ip;
        ip.mode = HashtagMode::BreakDown;
        ip.hashtag_capacity = 0;
        induced = tokenizer::induce_vocabulary(reference_docs, ip, mode);
        vocab = &*induced;
    }

    const TokenCounts reference = tokenizer::count_pieces(*vocab, reference_docs, mode);
    std::int64_t total = 0;
    for (const auto& [piece, count] : reference) total += count;
    const auto distinct = static_cast<std::int64_t>(reference.size());
    const double denom = static_cast<double>(total + distinct);
    if (denom <= 0.0) throw InputError("surrogate loss: empty reference distribution");

    auto piece_logprob = [&](const std::string& piece) {
        const auto it = reference.find(piece);
        const std::int64_t count = it == reference.end() ? 0 : it->second;
        return std::log(static_cast<double>(count + 1) / denom);
    };

    std::vector<RawScore> raws(docs.size());
    per_document(docs.size(), mode, [&](std::size_t i) {
        const auto result = tokenizer::tokenize_document(*vocab, docs[i]);
        raws[i].piece_count = static_cast<int>(result.pieces.size());
        if (result.pieces.empty()) return; // degenerate doc scores zero

        const auto piece_total = result.pieces.size();
        const auto masks = std::min<std::size_t>(static_cast<std::size_t>(params.max_masks),
                                                 piece_total);
        std::vector<std::size_t> order(piece_total);
        for (std::size_t p = 0; p < piece_total; ++p) order[p] = p;
        if (params.mask_seed.has_value()) {
            std::vector<std::uint64_t> priority(piece_total);
            const std::uint64_t base =
                splitmix64(*params.mask_seed) ^ fnv1a64(docs[i].id);
            for (std::size_t p = 0; p < piece_total; ++p) {
                priority[p] = splitmix64(base + p);
            }
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (priority[a] != priority[b]) return priority[a] < priority[b];
                return a < b;
            });
        } else {
            // Rarest-first masking keeps scores reproducible run to run.
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const auto ca = reference.find(result.pieces[a]);
                const auto cb = reference.find(result.pieces[b]);
                const std::int64_t fa = ca == reference.end() ? 0 : ca->second;
                const std::int64_t fb = cb == reference.end() ? 0 : cb->second;
                if (fa != fb) return fa < fb;
                return a < b;
            });
        }
        double loss = 0.0;
        for (std::size_t p = 0; p < masks; ++p) {
            loss -= piece_logprob(result.pieces[order[p]]);
        }
        raws[i].raw = loss / static_cast<double>(masks);
    });
    return raws;
}

} // namespace

std::vector<SignalScore> surrogate_mlm_loss(std::span<const Document> docs,
                                            std::span<const Document> reference_docs,
                                            const SurrogateMlmParams& params, ExecMode mode) {
    return normalize_pool(docs, surrogate_raw(docs, reference_docs, params, mode),
                          SignalKind::MlmLoss);
}

std::vector<double> surrogate_raw_losses(std::span<const Document> docs,
                                         std::span<const Document> reference_docs,
                                         const SurrogateMlmParams& params, ExecMode mode) {
    const auto raws = surrogate_raw(docs, reference_docs, params, mode);
    std::vector<double> losses(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) losses[i] = raws[i].raw;
    return losses;
}

std::vector<SignalScore> scores_from_raw(std::span<const Document> docs,
                                         const std::unordered_map<std::string, double>& raw,
                                         SignalKind kind, const Vocabulary* vocab) {
    std::vector<RawScore> raws(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto it = raw.find(docs[i].id);
        if (it == raw.end()) {
            throw InputError("external scores missing doc id \"" + docs[i].id + "\"");
        }
        raws[i].raw = it->second;
        raws[i].piece_count =
            vocab != nullptr
                ? static_cast<int>(tokenizer::tokenize_document(*vocab, docs[i]).pieces.size())
                : docs[i].token_count;
    }
    return normalize_pool(docs, raws, kind);
}

std::unordered_map<std::string, double> load_raw_scores_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scores file: " + path);
    std::unordered_map<std::string, double> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto parts = split_on(line, '\t');
        if (parts.size() != 2) {
            throw InputError(path + ": line " + std::to_string(line_no) +
                             ": expected doc_id<TAB>raw_score");
        }
        raw[std::string(parts[0])] = std::strtod(std::string(parts[1]).c_str(), nullptr);
    }
    return raw;
}

SentenceEmbeddingSet mean_sentence_embeddings(const EmbeddingSnapshot& tokens,
                                              std::span<const Document> docs) {
    SentenceEmbeddingSet set;
    set.dim = tokens.dim;
    set.label = tokens.label;
    for (const auto& doc : docs) {
        std::vector<double> mean(tokens.dim, 0.0);
        std::size_t found = 0;
        for (std::string_view tok : corpus::split_tokens(doc.text)) {
            const auto it = tokens.vectors.find(std::string(tok));
            if (it == tokens.vectors.end()) continue;
            ++found;
            for (std::size_t d = 0; d < tokens.dim; ++d) mean[d] += it->second[d];
        }
        if (found > 0) {
            for (auto& v : mean) v /= static_cast<double>(found);
        }
        set.vectors.emplace(doc.id, std::move(mean));
    }
    return set;
}

void save_scores_tsv(const std::string& path, std::span<const SignalScore> scores) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write scores file: " + path);
    out << "# signal=" << (scores.empty() ? "token" : signal_kind_name(scores.front().kind))
        << '\n';
    for (const auto& s : scores) {
        out << s.doc_id << '\t' << format_double(s.w_s) << '\t' << format_double(s.w_t) << '\n';
    }
}

std::vector<SignalScore> load_scores_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scores file: " + path);
    std::vector<SignalScore> scores;
    SignalKind kind = SignalKind::TokenShift;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (line.rfind("# signal=", 0) == 0 && eq != std::string::npos) {
                kind = parse_signal_kind(line.substr(eq + 1));
            }
            continue;
        }
        const auto parts = split_on(line, '\t');
        if (parts.size() != 3) {
            throw InputError(path + ": line " + std::to_string(line_no) +
                             ": expected doc_id<TAB>w_s<TAB>w_t");
        }
        SignalScore s;
        s.doc_id = std::string(parts[0]);
        s.w_s = std::strtod(std::string(parts[1]).c_str(), nullptr);
        s.w_t = std::strtod(std::string(parts[2]).c_str(), nullptr);
        s.kind = kind;
        scores.push_back(std::move(s));
    }
    return scores;
}

} // namespace vocabdrift::signals
