#include "vocabdrift/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <unordered_set>

#include "vocabdrift/errors.hpp"
#include "vocabdrift/hash.hpp"
#include "vocabdrift/text_io.hpp"

namespace vocabdrift::sampler {

double combined_weight(double w_s, double w_t, const SamplingConfig& cfg) {
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw InvariantError("alpha must lie in [0,1]");
    if (!(cfg.min_weight > 0.0)) throw InvariantError("min_weight must be positive");
    const double blended = cfg.alpha * w_s + (1.0 - cfg.alpha) * w_t;
    return std::clamp(blended, cfg.min_weight, 1.0);
}

double sampling_key(double u, double w_s, double w_t, const SamplingConfig& cfg) {
    if (!(u > 0.0 && u < 1.0)) throw InvariantError("u must lie in the open interval (0,1)");
    return std::pow(u, 1.0 / combined_weight(w_s, w_t, cfg));
}

void SampleManifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write manifest file: " + path);
    out << "# seed=" << seed << '\n';
    out << "# iteration=" << iteration << '\n';
    out << "# signal=" << signals::signal_kind_name(signal) << '\n';
    for (const auto& id : doc_ids) out << id << '\n';
}

SampleManifest SampleManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest file: " + path);
    SampleManifest manifest;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(0, eq);
            const std::string value = line.substr(eq + 1);
            if (key == "# seed") {
                manifest.seed = std::strtoull(value.c_str(), nullptr, 10);
            } else if (key == "# iteration") {
                manifest.iteration = std::atoi(value.c_str());
            } else if (key == "# signal") {
                manifest.signal = signals::parse_signal_kind(value);
            }
            continue;
        }
        manifest.doc_ids.push_back(line);
    }
    return manifest;
}

SampleManifest weighted_sample(std::span<const SignalScore> pool, std::size_t k,
                               const SamplingConfig& cfg, ExecMode mode) {
    if (k < 1 || k > pool.size()) {
        throw InputError("sample size " + std::to_string(k) + " out of range for a pool of " +
                         std::to_string(pool.size()));
    }

    // Validate outside the parallel region; the key loop must not throw.
    combined_weight(0.0, 0.0, cfg);
    for (const auto& s : pool) {
        if (s.w_s < 0.0 || s.w_s > 1.0 || s.w_t < 0.0 || s.w_t > 1.0) {
            throw InvariantError("signal weights out of [0,1] for doc \"" + s.doc_id + "\"");
        }
    }

    struct Keyed {
        double key;
        const SignalScore* score;
    };
    std::vector<Keyed> keyed(pool.size());
    const auto n = static_cast<std::int64_t>(pool.size());
    const std::uint64_t seed_state = splitmix64(cfg.seed);
    auto body = [&](std::int64_t i) {
        const auto& s = pool[static_cast<std::size_t>(i)];
        const double u = unit_interval(splitmix64(seed_state ^ fnv1a64(s.doc_id)));
        keyed[static_cast<std::size_t>(i)] = {sampling_key(u, s.w_s, s.w_t, cfg), &s};
    };
#ifdef _OPENMP
    if (mode == ExecMode::Parallel && n > 1) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) body(i);
    } else
#endif
    {
        (void)mode;
        for (std::int64_t i = 0; i < n; ++i) body(i);
    }

    // Top-k keys realize weighted sampling without replacement; ties go to
    // the smaller doc id so the pick never depends on pool order.
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k), keyed.end(),
                      [](const Keyed& a, const Keyed& b) {
                          if (a.key != b.key) return a.key > b.key;
                          return a.score->doc_id < b.score->doc_id;
                      });

    SampleManifest manifest;
    manifest.seed = cfg.seed;
    manifest.signal = pool.empty() ? signals::SignalKind::TokenShift : pool.front().kind;
    manifest.doc_ids.reserve(k);
    for (std::size_t i = 0; i < k; ++i) manifest.doc_ids.push_back(keyed[i].score->doc_id);
    return manifest;
}

std::vector<SampleManifest> run_iterative_sampling(std::span<const Document> pool_docs,
                                                   const SignalProvider& provider,
                                                   const SamplingConfig& cfg, ExecMode mode) {
    if (cfg.iteration_sizes.empty()) throw InvariantError("iteration_sizes must be non-empty");

    std::vector<SampleManifest> manifests;
    std::unordered_set<std::string> taken;
    taken.reserve(pool_docs.size());

    std::vector<Document> remaining(pool_docs.begin(), pool_docs.end());
    for (std::size_t it = 0; it < cfg.iteration_sizes.size(); ++it) {
        const int iteration = static_cast<int>(it) + 1;
        const std::size_t k = cfg.iteration_sizes[it];
        if (k == 0) throw InvariantError("iteration sizes must be positive");
        if (remaining.size() < k) {
            throw InputError("pool exhausted at iteration " + std::to_string(iteration) +
                             ": need " + std::to_string(k) + ", have " +
                             std::to_string(remaining.size()));
        }

        const auto scores = provider(iteration, remaining);
        if (scores.size() != remaining.size()) {
            throw InvariantError("signal provider scored " + std::to_string(scores.size()) +
                                 " docs, expected " + std::to_string(remaining.size()));
        }

        SamplingConfig iter_cfg = cfg;
        iter_cfg.seed = iteration_seed(cfg.seed, iteration);
        SampleManifest manifest = weighted_sample(scores, k, iter_cfg, mode);
        manifest.iteration = iteration;
        manifest.seed = cfg.seed;
        for (const auto& id : manifest.doc_ids) taken.insert(id);
        manifests.push_back(std::move(manifest));

        std::vector<Document> next;
        next.reserve(remaining.size() - k);
        for (auto& doc : remaining) {
            if (taken.find(doc.id) == taken.end()) next.push_back(std::move(doc));
        }
        remaining = std::move(next);
    }
    return manifests;
}

std::vector<std::size_t> parse_iteration_sizes(const std::string& text) {
    std::vector<std::size_t> sizes;
    constexpr std::string_view kPreset = "paper-ratio:";
    if (text.rfind(kPreset, 0) == 0) {
        const std::string budget_text = text.substr(kPreset.size());
        const long long budget = std::atoll(budget_text.c_str());
        if (budget < 3) throw InputError("paper-ratio budget must be at least 3");
        // 10/24, 8/24 and the remainder of the budget.
        const auto first = static_cast<std::size_t>((budget * 10 + 12) / 24);
        const auto second = static_cast<std::size_t>((budget * 8 + 12) / 24);
        const auto third = static_cast<std::size_t>(budget) - first - second;
        if (first == 0 || second == 0 || third == 0) {
            throw InputError("paper-ratio budget too small to fill three iterations");
        }
        return {first, second, third};
    }
    for (const auto part : split_on(text, ',')) {
        const long long v = std::atoll(std::string(part).c_str());
        if (v < 1) throw InputError("iteration sizes must be positive integers: " + text);
        sizes.push_back(static_cast<std::size_t>(v));
    }
    if (sizes.empty()) throw InputError("no iteration sizes given");
    return sizes;
}

} // namespace vocabdrift::sampler
