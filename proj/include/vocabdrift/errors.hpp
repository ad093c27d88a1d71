#pragma once

#include <stdexcept>
#include <string>

namespace vocabdrift {

/// Bad external input: unreadable files, malformed records, out-of-range
/// CLI arguments. Maps to exit code 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A violated internal contract (caller bug or corrupted state).
/// Maps to exit code 2.
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

} // namespace vocabdrift
