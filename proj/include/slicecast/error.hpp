#pragma once

#include <stdexcept>
#include <string>

namespace slicecast {

// Bad input: malformed files, inconsistent records, invalid configuration.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Degenerate numerics: zero variance, rank deficiency, zero-norm embeddings.
// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace slicecast
