#pragma once

#include <stdexcept>
#include <string>

namespace lzeval {

/// Rejected or malformed input (bad argument values, size mismatches, bad files).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Geometric configuration too degenerate to solve (too few points, collinear
/// correspondences, rank loss).
struct DegenerateError : std::runtime_error {
    explicit DegenerateError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem and serialization failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lzeval
