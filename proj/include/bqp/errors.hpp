#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bqp {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An argument is outside its admissible range (weights, probabilities, prices, grids).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Too few observations for the requested statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient scatter or covariance input; the posterior scale matrix must be
/// positive definite and is rejected rather than regularized.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// A strict existence inequality `lhs > rhs` failed. Carries both sides for
/// diagnostics: for the global minimum quantile portfolio these are q_alpha^2
/// and the (rescaled) frontier slope.
class ExistenceError : public Error {
public:
    ExistenceError(const std::string& what, double lhs, double rhs)
        : Error(what), lhs_(lhs), rhs_(rhs) {}

    double lhs() const noexcept { return lhs_; }
    double rhs() const noexcept { return rhs_; }

private:
    double lhs_;
    double rhs_;
};

/// Inputs are individually valid but combined incorrectly (e.g. a Bayesian risk
/// specification applied to plug-in moment estimates).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; `line` is 1-based, 0 when not attributable to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An aggregation produced no usable observations (e.g. every simulation run
/// was filtered out by the existence conditions).
class EmptyResultError : public Error {
public:
    using Error::Error;
};

}  // namespace bqp
