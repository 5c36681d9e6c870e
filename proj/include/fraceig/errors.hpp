#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fraceig {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDomain : public Error {
public:
    using Error::Error;
};

class EmptyDomain : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class EmptyGrid : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Thrown when an iterative solver exhausts its budget. The last iterate is
/// kept so callers can inspect or restart from it.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, std::vector<double> last_iterate,
                       double last_value, double last_residual)
        : Error(what), last_iterate_(std::move(last_iterate)), last_value_(last_value),
          last_residual_(last_residual) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    double last_value() const noexcept { return last_value_; }
    double last_residual() const noexcept { return last_residual_; }

private:
    std::vector<double> last_iterate_;
    double last_value_;
    double last_residual_;
};

}  // namespace fraceig
