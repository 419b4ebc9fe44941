#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spectra {

// Raised when an iterative method stops short of its tolerance or a
// numerical invariant (Herglotz sign, PSD) is violated. Precondition
// failures use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, std::size_t index, double residual = 0.0)
        : NumericalError(what, residual), index_(index) {}

    // Off-diagonal / grid index at which iteration gave up.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

} // namespace spectra
