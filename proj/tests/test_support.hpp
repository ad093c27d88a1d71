#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "vocabdrift/corpus.hpp"
#include "vocabdrift/hash.hpp"

namespace testsupport {

/// Deterministic generator for property tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(vocabdrift::splitmix64(seed)) {}

    std::uint64_t next() {
        state_ = vocabdrift::splitmix64(state_);
        return state_;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    double unit() { return vocabdrift::unit_interval(next()); }

    std::string word(std::size_t min_len, std::size_t max_len, int alphabet = 6) {
        const std::size_t len = min_len + below(max_len - min_len + 1);
        std::string w;
        for (std::size_t i = 0; i < len; ++i) {
            w.push_back(static_cast<char>('a' + below(static_cast<std::uint64_t>(alphabet))));
        }
        return w;
    }

private:
    std::uint64_t state_;
};

inline vocabdrift::corpus::Document doc(std::string id, std::string text, int epoch = 2013) {
    vocabdrift::corpus::Document d;
    d.id = std::move(id);
    d.text = std::move(text);
    d.epoch = epoch;
    d.token_count = static_cast<int>(vocabdrift::corpus::split_tokens(d.text).size());
    return d;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("vocabdrift_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace testsupport
