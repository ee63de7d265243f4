#pragma once

#include <stdexcept>
#include <string>

namespace flair {

// Shape disagreement between operands (names the offending op/node).
struct dimension_error : std::runtime_error {
    explicit dimension_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated precondition of a documented contract.
struct contract_error : std::logic_error {
    explicit contract_error(const std::string& msg) : std::logic_error(msg) {}
};

// Bad or inconsistent run configuration (CLI exits with code 2).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss or gradient during training (CLI exits with code 3).
struct divergence_error : std::runtime_error {
    divergence_error(const std::string& msg, long iteration)
        : std::runtime_error(msg + " (iteration " + std::to_string(iteration) + ")"),
          iteration(iteration) {}
    long iteration;
};

// Numerical routine failed to converge or produced unusable output.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File IO / codec failure.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace flair
