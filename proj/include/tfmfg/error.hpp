#pragma once

#include <stdexcept>
#include <string>

namespace tfmfg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (grid mismatch, bad index, bad length).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative solve stopped without reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, int step = -1)
        : Error(what), residual_(residual), step_(step) {}

    double residual() const noexcept { return residual_; }
    /// Time index at which the failure happened, -1 if not tied to a step.
    int step() const noexcept { return step_; }

private:
    double residual_;
    int step_;
};

/// The discrete scheme left its admissible set (M-matrix sign pattern, positivity, mass).
class SchemeError : public Error {
public:
    SchemeError(const std::string& what, int step = -1) : Error(what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace tfmfg
