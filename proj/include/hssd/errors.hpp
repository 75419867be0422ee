#ifndef HSSD_ERRORS_HPP
#define HSSD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hssd {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input table is missing a required column or has an inconsistent layout.
class SchemaError : public Error {
public:
    using Error::Error;
};

// A cell failed to parse; message carries the source line number.
class ParseError : public Error {
public:
    using Error::Error;
};

// A parsed value violates a domain invariant (e.g. fluorescence <= 0).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Not enough data to run the requested estimation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// A species has no control observations, so d cannot be estimated.
class NoControlError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Sample with zero variance where spread is required.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

// Too many bootstrap resamples failed for the interval to be trusted.
class UnstableFitError : public Error {
public:
    UnstableFitError(const std::string& msg, double failure_fraction)
        : Error(msg), failure_fraction(failure_fraction) {}
    double failure_fraction;
};

// MCMC could not start from a finite log-posterior.
class InitializationError : public Error {
public:
    using Error::Error;
};

// Gelman-Rubin statistic is undefined (zero within-chain variance).
class UndefinedDiagnosticError : public Error {
public:
    using Error::Error;
};

// Root bracketing or another numerical procedure failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace hssd

#endif // HSSD_ERRORS_HPP
