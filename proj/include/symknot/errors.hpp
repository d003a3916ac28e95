#pragma once

#include <stdexcept>
#include <string>

namespace symknot {

// Bad input: rejected before any computation starts. Maps to CLI exit code 1.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Computation started but could not finish (singular configuration,
// quadrature refinement exhausted, optimizer stall). Maps to CLI exit code 2.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace symknot
