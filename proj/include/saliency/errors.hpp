#pragma once

#include <stdexcept>
#include <string>

namespace saliency {

// Bad external inputs: unreadable files, malformed JSON/CSV, shape or
// schema mismatches between user-supplied artifacts. CLI exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Degenerate or invalid computations discovered mid-analysis: all-zero
// importance, non-finite gradients, too few samples. CLI exit code 1.
class ComputeError : public std::runtime_error {
public:
    explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace saliency
