#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration with an absolute error target.
// The rule itself comes from Boost.Math; failure to reach the target throws
// NumericalError carrying the achieved error estimate.

#include <complex>
#include <functional>
#include <span>

namespace spectra {

struct QuadratureOptions {
    double abs_tol = 1e-9;
    unsigned max_depth = 25;   // bisection levels allowed for any one piece
};

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& options = {});

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f, double a, double b,
                                       const QuadratureOptions& options = {});

/// Sum of integrals over consecutive breakpoints (sorted ascending). Use when
/// the integrand has kinks or narrow peaks at known locations.
double integrate_piecewise(const std::function<double(double)>& f, std::span<const double> breakpoints,
                           const QuadratureOptions& options = {});

std::complex<double> integrate_complex_piecewise(const std::function<std::complex<double>(double)>& f,
                                                 std::span<const double> breakpoints,
                                                 const QuadratureOptions& options = {});

} // namespace spectra
