#pragma once

#include <stdexcept>
#include <string>

namespace calr {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter is outside the admissible set (non-positive beta, infeasible
/// lambda, region mismatch, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// k0(delta) came out negative: delta is above the admissible threshold.
class DeltaTooLarge : public Error {
public:
    DeltaTooLarge(const std::string& what, double k0)
        : Error(what), k0_(k0) {}
    double k0() const noexcept { return k0_; }

private:
    double k0_;
};

/// An adaptive quadrature failed to reach its tolerance.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double value, double error)
        : Error(what), value_(value), error_(error) {}
    double value() const noexcept { return value_; }
    double achieved_error() const noexcept { return error_; }

private:
    double value_;
    double error_;
};

/// A bound or certificate was requested outside the range where it is proven.
class NotApplicable : public Error {
public:
    using Error::Error;
};

}  // namespace calr
