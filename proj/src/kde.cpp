#include "spectra/kde.hpp"

#include "spectra/error.hpp"
#include "spectra/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spectra {

namespace {

constexpr double kCheckRange = 50.0;

std::vector<double> integer_breakpoints(double lo, double hi)
{
    std::vector<double> pts{lo};
    for (double t = std::floor(lo) + 1.0; t < hi; t += 1.0) {
        pts.push_back(t);
    }
    pts.push_back(hi);
    return pts;
}

void require_bandwidth(double h)
{
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("kernel estimate: bandwidth must be > 0");
    }
}

// Index range of eigenvalues within tail_radius * h of x.
std::pair<std::size_t, std::size_t> window(const std::vector<double>& mu, double x, double reach)
{
    if (!std::isfinite(reach)) {
        return {0, mu.size()};
    }
    const auto lo = std::lower_bound(mu.begin(), mu.end(), x - reach);
    const auto hi = std::upper_bound(lo, mu.end(), x + reach);
    return {static_cast<std::size_t>(lo - mu.begin()), static_cast<std::size_t>(hi - mu.begin())};
}

double numeric_kernel_cdf(const KernelSpec& kernel, double u)
{
    if (u <= -kCheckRange) {
        return 0.0;
    }
    const double upper = std::min(u, kCheckRange);
    const auto pts = integer_breakpoints(-kCheckRange, upper);
    return integrate_piecewise(kernel.k, pts, {1e-10, 25});
}

} // namespace

KernelSpec gaussian_kernel()
{
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    KernelSpec spec;
    spec.name = "gaussian";
    spec.k = [norm](double u) { return norm * std::exp(-0.5 * u * u); };
    spec.derivative = [norm](double u) { return -u * norm * std::exp(-0.5 * u * u); };
    spec.cdf = [](double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); };
    spec.tail_radius = 12.0;
    return spec;
}

bool KernelReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const KernelCheck& c) { return c.passed; });
}

KernelReport check_kernel(const KernelSpec& kernel)
{
    KernelReport report;
    const auto pts = integer_breakpoints(-kCheckRange, kCheckRange);
    const QuadratureOptions opts{1e-9, 25};

    try {
        const double total = integrate_piecewise(kernel.k, pts, opts);
        report.checks.push_back({"integral equals 1", total, std::abs(total - 1.0) <= 1e-6});
    } catch (const NumericalError& e) {
        report.checks.push_back({"integral equals 1", e.residual(), false});
    }

    const auto grid = uniform_grid(-kCheckRange, kCheckRange, 100001);
    double sup = 0.0;
    double variation = 0.0;
    double previous = kernel.k(grid.front());
    for (double x : grid) {
        const double v = kernel.k(x);
        sup = std::max(sup, std::abs(v));
        variation += std::abs(v - previous);
        previous = v;
    }
    report.checks.push_back({"sup |K| finite", sup, std::isfinite(sup)});

    const auto xk = [&](double x) { return std::max(std::abs(x * kernel.k(x)), std::abs(x * kernel.k(-x))); };
    const double d10 = xk(10.0), d20 = xk(20.0), d50 = xk(50.0);
    report.checks.push_back({"|x K(x)| -> 0", d50, d10 >= d20 && d20 >= d50 && d50 < 1e-8});

    try {
        const double tv = integrate_piecewise([&](double x) { return std::abs(kernel.derivative(x)); }, pts, opts);
        const bool ok = std::isfinite(tv) && std::abs(tv - variation) <= 1e-3 * std::max(1.0, variation);
        report.checks.push_back({"int |K'| finite", tv, ok});
    } catch (const NumericalError& e) {
        report.checks.push_back({"int |K'| finite", e.residual(), false});
    }
    return report;
}

double bandwidth(const BandwidthRule& rule, std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("bandwidth: n must be >= 1");
    }
    const double nn = static_cast<double>(n);
    const double h = std::visit(
        [nn](const auto& r) -> double {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, DefaultBandwidth>) {
                return 0.5 * std::pow(nn, -1.0 / 3.0);
            } else if constexpr (std::is_same_v<R, PowerBandwidth>) {
                return r.coef * std::pow(nn, -r.exponent);
            } else {
                return r.h;
            }
        },
        rule);
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("bandwidth: rule produced a nonpositive bandwidth");
    }
    return h;
}

EmpiricalSpectrum::EmpiricalSpectrum(std::vector<double> eigenvalues, std::size_t n)
    : eigenvalues_(std::move(eigenvalues)), n_(n)
{
    if (eigenvalues_.empty()) {
        throw std::invalid_argument("EmpiricalSpectrum: no eigenvalues");
    }
    if (n_ == 0) {
        throw std::invalid_argument("EmpiricalSpectrum: n must be >= 1");
    }
    for (double v : eigenvalues_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("EmpiricalSpectrum: non-finite eigenvalue");
        }
    }
    std::sort(eigenvalues_.begin(), eigenvalues_.end());
}

double EmpiricalSpectrum::esd(double x) const
{
    const auto it = std::upper_bound(eigenvalues_.begin(), eigenvalues_.end(), x);
    return static_cast<double>(it - eigenvalues_.begin()) / static_cast<double>(p());
}

double kde_density(const EmpiricalSpectrum& spectrum, const KernelSpec& kernel, double h, double x)
{
    require_bandwidth(h);
    const auto& mu = spectrum.eigenvalues();
    const auto [lo, hi] = window(mu, x, kernel.tail_radius * h);
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        sum += kernel.k((x - mu[i]) / h);
    }
    return sum / (static_cast<double>(spectrum.p()) * h);
}

double kde_cdf(const EmpiricalSpectrum& spectrum, const KernelSpec& kernel, double h, double x)
{
    require_bandwidth(h);
    const auto& mu = spectrum.eigenvalues();
    double sum = 0.0;
    if (kernel.cdf) {
        for (double m : mu) {
            sum += kernel.cdf((x - m) / h);
        }
    } else {
        for (double m : mu) {
            sum += numeric_kernel_cdf(kernel, (x - m) / h);
        }
    }
    return sum / static_cast<double>(spectrum.p());
}

DensityCurve kde_density_curve(const EmpiricalSpectrum& spectrum, const KernelSpec& kernel, double h,
                               std::span<const double> grid)
{
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = kde_density(spectrum, kernel, h, grid[i]);
    }
    return DensityCurve(std::vector<double>(grid.begin(), grid.end()), std::move(values));
}

} // namespace spectra
