#pragma once

// Kernel estimator of the spectral density of a sample covariance matrix:
//
//     f_n(x) = (p h)^-1 sum_i K((x - mu_i) / h),
//
// where mu_1..mu_p are the eigenvalues, plus its distribution function
// F_n(x) = int_{-inf}^x f_n, bandwidth rules and a numerical admissibility
// report for candidate kernels.

#include "spectra/limitlaw.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace spectra {

struct KernelSpec {
    std::string name;
    std::function<double(double)> k;
    std::function<double(double)> derivative;
    /// Closed-form int_{-inf}^u K; empty when only numerical integration is available.
    std::function<double(double)> cdf;
    /// K(u) is treated as exactly zero for |u| > tail_radius.
    double tail_radius = std::numeric_limits<double>::infinity();
};

/// Standard normal density, with closed-form CDF.
KernelSpec gaussian_kernel();

struct KernelCheck {
    std::string condition;
    double measured;
    bool passed;
};

struct KernelReport {
    std::vector<KernelCheck> checks;
    bool all_passed() const;
};

/// Four numerical checks on [-50, 50]: int K = 1 (1e-6), sup |K| finite,
/// |x K(x)| decreasing through |x| = 10, 20, 50 and below 1e-8 at 50, and
/// int |K'| finite and equal to the total variation of K on a fine grid.
KernelReport check_kernel(const KernelSpec& kernel);

struct DefaultBandwidth {};   // h = 0.5 n^(-1/3)
struct PowerBandwidth {            // h = coef * n^(-exponent)
    double coef;
    double exponent;
};
struct FixedBandwidth {
    double h;
};

using BandwidthRule = std::variant<DefaultBandwidth, PowerBandwidth, FixedBandwidth>;

/// n is the sample size of the covariance matrix, not its dimension.
double bandwidth(const BandwidthRule& rule, std::size_t n);

class EmpiricalSpectrum {
public:
    /// Sorts the eigenvalues. Rejects empty or non-finite input and n == 0.
    EmpiricalSpectrum(std::vector<double> eigenvalues, std::size_t n);

    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
    std::size_t p() const noexcept { return eigenvalues_.size(); }
    std::size_t n() const noexcept { return n_; }
    double ratio() const noexcept { return static_cast<double>(p()) / static_cast<double>(n_); }
    double min() const noexcept { return eigenvalues_.front(); }
    double max() const noexcept { return eigenvalues_.back(); }

    /// F^{A_n}(x): fraction of eigenvalues <= x.
    double esd(double x) const;

private:
    std::vector<double> eigenvalues_;
    std::size_t n_;
};

double kde_density(const EmpiricalSpectrum& spectrum, const KernelSpec& kernel, double h, double x);

double kde_cdf(const EmpiricalSpectrum& spectrum, const KernelSpec& kernel, double h, double x);

DensityCurve kde_density_curve(const EmpiricalSpectrum& spectrum, const KernelSpec& kernel, double h,
                               std::span<const double> grid);

} // namespace spectra
