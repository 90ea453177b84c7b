#pragma once

#include <stdexcept>
#include <string>

namespace csbp {

// Analysis could not reach a decision (probing cap without certificate,
// undecidable divergence probe). Maps to CLI exit code 3.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure: quadrature non-convergence, series truncation failure,
// cross-check divergence, solver box violation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed mechanism or experiment specification. Maps to CLI exit code 2.
class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace csbp
