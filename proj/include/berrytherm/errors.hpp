// errors.hpp — exception hierarchy shared by all modules

#pragma once

#include <stdexcept>
#include <string>

namespace berrytherm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition or constraint violation on user-facing parameters.
struct DomainError : Error {
    using Error::Error;
};

// Numerical procedure did not produce a certified answer.
struct NumericalError : Error {
    using Error::Error;
};

struct ConvergenceError : NumericalError {
    ConvergenceError(const std::string& what, double last_residual, int iterations)
        : NumericalError(what), residual(last_residual), iterations(iterations) {}
    double residual;
    int iterations;
};

// Truncated Fock space too small for the requested accuracy.
struct TruncationError : NumericalError {
    TruncationError(const std::string& what, double estimate, int required = 0)
        : NumericalError(what), estimate(estimate), required(required) {}
    double estimate;
    int required;  // suggested cutoff / n_max, 0 if unknown
};

struct AmbiguityError : NumericalError {
    AmbiguityError(const std::string& what, double overlap)
        : NumericalError(what), overlap(overlap) {}
    double overlap;
};

struct LevelCrossingError : NumericalError {
    LevelCrossingError(const std::string& what, double overlap, int point)
        : NumericalError(what), overlap(overlap), point(point) {}
    double overlap;
    int point;
};

}  // namespace berrytherm
