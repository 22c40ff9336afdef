#pragma once

#include <stdexcept>
#include <string>

namespace vbr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed coefficient documents and invalid configuration.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Arguments outside an operation's domain (order out of range, w >= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A quadrature rule failed to reach its tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Root search or extremum selection could not produce an answer.
class SearchError : public Error {
public:
    using Error::Error;
};

}  // namespace vbr
