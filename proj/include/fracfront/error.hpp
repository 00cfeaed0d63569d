#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace fracfront {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. alpha not in (0,1)).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration: bad keys, malformed values, grids too small.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller broke a precondition (grid mismatch, non-positive tail samples, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// An iterative or quadrature procedure failed to reach its tolerance.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    explicit NumericalError(const std::string& what) : Error(what) {}

    /// Achieved error / gap at the point of failure (NaN if not meaningful).
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_ = std::numeric_limits<double>::quiet_NaN();
};

/// The truncated domain is too small for the speed bracket to change sign.
class DomainTooSmall : public Error {
public:
    using Error::Error;
};

/// A result violates a property that must hold for a correct discretization.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

} // namespace fracfront
