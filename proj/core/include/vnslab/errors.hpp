#pragma once

#include <stdexcept>
#include <string>

namespace vnslab {

// Bad user input: invalid config, violated scenario precondition, support
// outside the domain, mass mismatch. CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime: solver non-convergence, budget violation
// where an operation must refuse, uncovered time interval. Exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vnslab
