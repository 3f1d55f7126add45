#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heatlab {

// A field operation received or produced NaN/inf values.
class invalid_field_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operation requested on a boundary kind it does not support.
class unsupported_boundary_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Expression text failed to parse. `offset` is the byte position of the
// offending token (== text size at end of input).
class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t offset, std::string expected, const std::string& message)
        : std::runtime_error(message), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

// Expression evaluation failed: unbound variable or non-finite result.
class eval_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative linear solve failed to reach its tolerance.
class solve_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scenario/sweep configuration rejected; `path` is a JSON pointer into the file.
class config_error : public std::runtime_error {
public:
    config_error(std::string path, const std::string& message)
        : std::runtime_error("schema error at " + path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace heatlab
