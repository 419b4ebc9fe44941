#pragma once

/**
 * @file limitlaw.hpp
 * @brief Limiting spectral laws F_{c,H} of sample covariance matrices.
 *
 * The Marcenko-Pastur law (H = delta_1) is available in closed form. For a
 * general discrete population measure H the companion Stieltjes transform
 * mu(z) = m_{F_underline}(z) is the unique solution in the upper half plane of
 *
 *     mu = -1 / (z - c * sum_k w_k t_k / (1 + t_k mu)),
 *
 * and the density of F_{c,H} at x is Im m(x + i eta) / pi with
 * m = (mu + (1 - c)/z) / c. Densities are evaluated at a small eta > 0 rather
 * than exactly on the real axis.
 */

#include "spectra/ensembles.hpp"

#include <complex>
#include <span>
#include <vector>

namespace spectra {

using Complex = std::complex<double>;

struct SpectralLaw {
    SpectralLaw(double c, DiscreteMeasure h);

    double c;
    DiscreteMeasure h;

    /// H is a single atom; F_{c,H} is then a scaled Marcenko-Pastur law.
    bool is_scaled_mp() const { return h.atoms().size() == 1; }
};

struct Interval {
    double lower;
    double upper;
};

/// [(1 - sqrt c)^2, (1 + sqrt c)^2]
Interval mp_support(double c);

/// Continuous part of the Marcenko-Pastur density (the atom 1 - 1/c at the
/// origin for c > 1 is not included).
double mp_density(double c, double x);

/// Interval guaranteed to contain the support of the continuous part of F_{c,H}:
/// [(1 - sqrt c)^2 min t, (1 + sqrt c)^2 max t], lower end clamped at 0.
Interval support_bounds(const SpectralLaw& law);

/// Mass of F_{c,H} at the origin: 1 - 1/c when c > 1, else 0.
double point_mass_at_zero(const SpectralLaw& law);

struct SolverOptions {
    double tolerance = 1e-10;         // fixed-point residual accepted on return
    int max_iterations = 20000;       // damped fixed-point cap per continuation level
    double damping = 0.5;             // initial omega
    double continuation_factor = 0.5; // Im(z) shrink per level
};

/// Companion Stieltjes transform mu(z) of the limit law. Throws
/// ConvergenceError carrying the last residual if no accepted solution is found.
Complex solve_silverstein(const SpectralLaw& law, Complex z, const SolverOptions& options = {});

/// |mu + (z - c int t dH / (1 + t mu))^-1|
double fixed_point_residual(const SpectralLaw& law, Complex mu, Complex z);

/// z(mu) = -1/mu + c int t dH / (1 + t mu)
Complex inverse_companion(const SpectralLaw& law, Complex mu);

/// mu = -(1 - c)/z + c m
Complex companion_from_primary(double c, Complex m, Complex z);
/// m = (mu + (1 - c)/z) / c
Complex primary_from_companion(double c, Complex mu, Complex z);

/// Stieltjes transform m(z) of F_{c,H} itself.
Complex law_stieltjes(const SpectralLaw& law, Complex z, const SolverOptions& options = {});

/// Im m(x + i eta) / pi. Rejects x == 0 and H with atoms <= 0.
double limit_density(const SpectralLaw& law, double x, double eta = 1e-6);

/// Closed form for scaled Marcenko-Pastur laws, limit_density otherwise.
double law_density(const SpectralLaw& law, double x, double eta = 1e-6);

class DensityCurve {
public:
    DensityCurve(std::vector<double> grid, std::vector<double> values);

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return grid_.size(); }

    /// Trapezoid rule over the grid.
    double integral() const;

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

struct CdfCurve {
    std::vector<double> grid;
    std::vector<double> values;     // continuous part only
    double point_mass_at_zero = 0.0;
};

/// Uniform grid of `points` values from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

DensityCurve limit_density_curve(const SpectralLaw& law, std::span<const double> grid, double eta = 1e-6);

/// Cumulative trapezoid integral of law_density over the grid.
CdfCurve limit_cdf(const SpectralLaw& law, std::span<const double> grid, double eta = 1e-6);

} // namespace spectra
