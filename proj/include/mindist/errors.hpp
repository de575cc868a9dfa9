#pragma once

#include <stdexcept>
#include <string>

namespace mindist {

// Base class for everything this library throws on purpose. Catching
// mindist::Error at the CLI boundary separates "bad problem / bad math"
// from genuine bugs (which surface as other exception types).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Text that does not parse as an expression or as a problem document.
// `offset` is the byte position in the source text (0-based), or npos
// when the error has no meaningful location (e.g. unexpected end).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset);
    std::size_t offset;
};

// Structurally valid input with inadmissible content: negative radius,
// mismatched ambient dimensions, unknown document fields, ...
class ValidationError : public Error {
public:
    using Error::Error;
};

// A compiled expression hit a math-domain problem at evaluation time
// (division by zero, log of a non-positive value, sqrt of a negative).
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& msg, std::size_t offset);
    std::size_t offset;
};

// A clamped parameter left its interval (periodic parameters wrap and
// never raise this).
class DomainViolation : public Error {
public:
    using Error::Error;
};

// The induced metric stopped being positive definite: its Cholesky
// factorization met a non-positive pivot.
class SingularMetric : public Error {
public:
    using Error::Error;
};

// The two surface points coincide where the potential's radial slope
// is genuinely singular (r -> 0 with a sub-quadratic power law).
class DegenerateSeparation : public Error {
public:
    using Error::Error;
};

// Integration produced a NaN or infinity; message carries the offending
// state snapshot.
class NonFiniteState : public Error {
public:
    using Error::Error;
};

// Requested brute-force grid exceeds the evaluation budget. Raised
// before any evaluation happens.
class CapExceeded : public Error {
public:
    CapExceeded(const std::string& msg, double requested_pairs, double cap);
    double requested_pairs;
    double cap;
};

// AllStartsFailed lives in solver.hpp: it carries the best non-converged
// SolveResult, so it needs the solver's types.

} // namespace mindist
