#pragma once

#include <stdexcept>
#include <string>

namespace egl {

// Bad arguments or malformed input from the caller/user. CLI exit code 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Structural defects in a model object (reducible chain, bad matrix, ...).
// CLI exit code 3.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric failures: non-convergence, overflow, domain violations. CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace egl
