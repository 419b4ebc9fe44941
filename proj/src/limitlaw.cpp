#include "spectra/limitlaw.hpp"

#include "spectra/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace spectra {

SpectralLaw::SpectralLaw(double ratio, DiscreteMeasure measure) : c(ratio), h(std::move(measure))
{
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("SpectralLaw: c must be > 0");
    }
}

Interval mp_support(double c)
{
    if (!(c > 0.0)) {
        throw std::invalid_argument("mp_support: c must be > 0");
    }
    const double r = std::sqrt(c);
    return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

double mp_density(double c, double x)
{
    const Interval s = mp_support(c);
    if (x <= s.lower || x >= s.upper || x <= 0.0) {
        return 0.0;
    }
    return std::sqrt((s.upper - x) * (x - s.lower)) / (2.0 * std::numbers::pi * c * x);
}

Interval support_bounds(const SpectralLaw& law)
{
    const Interval mp = mp_support(law.c);
    const double lower = law.c < 1.0 ? mp.lower * law.h.min_location() : 0.0;
    return {std::max(0.0, lower), mp.upper * law.h.max_location()};
}

double point_mass_at_zero(const SpectralLaw& law)
{
    return law.c > 1.0 ? 1.0 - 1.0 / law.c : 0.0;
}

Complex companion_from_primary(double c, Complex m, Complex z)
{
    if (z == Complex(0.0, 0.0)) {
        throw std::invalid_argument("companion_from_primary: z = 0");
    }
    return -(1.0 - c) / z + c * m;
}

Complex primary_from_companion(double c, Complex mu, Complex z)
{
    if (z == Complex(0.0, 0.0)) {
        throw std::invalid_argument("primary_from_companion: z = 0");
    }
    return (mu + (1.0 - c) / z) / c;
}

namespace {

struct PopulationSums {
    Complex first;   // sum w t / (1 + t mu)
    Complex second;  // sum w t^2 / (1 + t mu)^2
};

PopulationSums population_sums(const DiscreteMeasure& h, Complex mu)
{
    PopulationSums s{};
    for (const auto& atom : h.atoms()) {
        const Complex q = 1.0 / (1.0 + atom.location * mu);
        const Complex tq = atom.location * q;
        s.first += atom.mass * tq;
        s.second += atom.mass * tq * tq;
    }
    return s;
}

bool usable(Complex mu)
{
    return std::isfinite(mu.real()) && std::isfinite(mu.imag()) && mu.imag() > 0.0;
}

class LevelSolver {
public:
    LevelSolver(const SpectralLaw& law, const SolverOptions& options) : law_(law), options_(options) {}

    double last_residual() const { return last_residual_; }

    std::optional<Complex> solve(Complex z, Complex start)
    {
        if (auto mu = newton(z, start)) {
            return mu;
        }
        return damped_fixed_point(z, start);
    }

    // d mu / d z at a solution, for the continuation predictor.
    Complex slope(Complex mu) const
    {
        const PopulationSums s = population_sums(law_.h, mu);
        return 1.0 / (1.0 / (mu * mu) - law_.c * s.second);
    }

private:
    // Damped Newton on g(mu) = z(mu) - z; |g| is the line-search merit and
    // iterates are kept in the upper half plane.
    std::optional<Complex> newton(Complex z, Complex mu)
    {
        if (!usable(mu)) {
            return std::nullopt;
        }
        auto g_of = [&](Complex m) { return inverse_companion(law_, m) - z; };
        Complex g = g_of(mu);
        const double eps = std::numeric_limits<double>::epsilon();
        for (int it = 0; it < 100 && std::abs(g) > 0.0; ++it) {
            const Complex dg = 1.0 / (mu * mu) - law_.c * population_sums(law_.h, mu).second;
            if (dg == Complex(0.0, 0.0) || !std::isfinite(std::abs(dg))) {
                break;
            }
            const Complex step = g / dg;
            double lambda = 1.0;
            bool moved = false;
            for (int bt = 0; bt < 40; ++bt, lambda *= 0.5) {
                const Complex cand = mu - lambda * step;
                if (!usable(cand)) {
                    continue;
                }
                const Complex cand_g = g_of(cand);
                if (std::abs(cand_g) < std::abs(g)) {
                    mu = cand;
                    g = cand_g;
                    moved = true;
                    break;
                }
            }
            if (!moved || std::abs(lambda * step) <= 4.0 * eps * std::abs(mu)) {
                break;
            }
        }
        last_residual_ = fixed_point_residual(law_, mu, z);
        if (usable(mu) && last_residual_ <= options_.tolerance) {
            return mu;
        }
        return std::nullopt;
    }

    std::optional<Complex> damped_fixed_point(Complex z, Complex mu)
    {
        if (!usable(mu)) {
            mu = -1.0 / z;
        }
        double omega = options_.damping;
        double res = fixed_point_residual(law_, mu, z);
        int restarts = 0;
        for (int it = 0; it < options_.max_iterations; ++it) {
            const Complex g = -1.0 / (z - law_.c * population_sums(law_.h, mu).first);
            const Complex next = (1.0 - omega) * mu + omega * g;
            if (!usable(next)) {
                // Left the upper half plane: restart from the last iterate with a smaller step.
                omega *= 0.5;
                if (++restarts > 30) {
                    break;
                }
                continue;
            }
            const double next_res = fixed_point_residual(law_, next, z);
            if (next_res > res) {
                omega = std::max(omega * 0.5, 1e-4);
            }
            mu = next;
            res = next_res;
            if (res <= options_.tolerance) {
                last_residual_ = res;
                return mu;
            }
        }
        last_residual_ = res;
        return std::nullopt;
    }

    const SpectralLaw& law_;
    const SolverOptions& options_;
    double last_residual_ = 0.0;
};

} // namespace

double fixed_point_residual(const SpectralLaw& law, Complex mu, Complex z)
{
    const Complex g = -1.0 / (z - law.c * population_sums(law.h, mu).first);
    return std::abs(mu - g);
}

Complex inverse_companion(const SpectralLaw& law, Complex mu)
{
    return -1.0 / mu + law.c * population_sums(law.h, mu).first;
}

Complex solve_silverstein(const SpectralLaw& law, Complex z, const SolverOptions& options)
{
    if (!(z.imag() > 0.0)) {
        throw std::invalid_argument("solve_silverstein: Im z must be > 0");
    }
    LevelSolver solver(law, options);
    auto fail = [&](double y) -> ConvergenceError {
        std::ostringstream msg;
        msg << "solve_silverstein: no converged solution at z = " << z.real() << " + " << y
            << "i (residual " << solver.last_residual() << ")";
        return ConvergenceError(msg.str(), 0, solver.last_residual());
    };

    const double target = z.imag();
    double y = std::max(1.0, target);
    Complex level_z(z.real(), y);
    std::optional<Complex> mu = solver.solve(level_z, -1.0 / level_z);
    if (!mu) {
        throw fail(y);
    }

    // Continuation toward the requested imaginary part.
    double ratio = options.continuation_factor;
    while (y > target) {
        const double y_next = std::max(target, y * ratio);
        const Complex next_z(z.real(), y_next);
        std::optional<Complex> next;
        const Complex predicted = *mu + solver.slope(*mu) * (next_z - level_z);
        if (usable(predicted)) {
            next = solver.solve(next_z, predicted);
        }
        if (!next) {
            next = solver.solve(next_z, *mu);
        }
        if (!next) {
            ratio = std::sqrt(ratio);
            if (ratio > 1.0 - 1e-9) {
                throw fail(y_next);
            }
            continue;
        }
        mu = next;
        y = y_next;
        level_z = next_z;
        ratio = std::max(options.continuation_factor, ratio * ratio);
    }
    return *mu;
}

Complex law_stieltjes(const SpectralLaw& law, Complex z, const SolverOptions& options)
{
    return primary_from_companion(law.c, solve_silverstein(law, z, options), z);
}

double limit_density(const SpectralLaw& law, double x, double eta)
{
    if (x == 0.0) {
        throw std::invalid_argument("limit_density: x must be nonzero");
    }
    if (!(eta > 0.0)) {
        throw std::invalid_argument("limit_density: eta must be > 0");
    }
    for (const auto& atom : law.h.atoms()) {
        if (!(atom.location > 0.0)) {
            throw std::invalid_argument("limit_density: population atoms must be > 0");
        }
    }
    const Complex z(x, eta);
    Complex m = law_stieltjes(law, z);
    // Drop the atom at the origin (c > 1): it contributes -(1 - 1/c)/z to m.
    m += point_mass_at_zero(law) / z;
    const double d = m.imag() / std::numbers::pi;
    if (d < -1e-9) {
        throw NumericalError("limit_density: negative density " + std::to_string(d), d);
    }
    return std::max(d, 0.0);
}

double law_density(const SpectralLaw& law, double x, double eta)
{
    if (law.is_scaled_mp()) {
        const double sigma = law.h.atoms().front().location;
        if (sigma > 0.0) {
            return mp_density(law.c, x / sigma) / sigma;
        }
    }
    return limit_density(law, x, eta);
}

DensityCurve::DensityCurve(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values))
{
    if (grid_.size() != values_.size()) {
        throw std::invalid_argument("DensityCurve: grid and values differ in length");
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!std::isfinite(grid_[i]) || !std::isfinite(values_[i])) {
            throw std::invalid_argument("DensityCurve: non-finite entry");
        }
        if (i > 0 && !(grid_[i] > grid_[i - 1])) {
            throw std::invalid_argument("DensityCurve: grid must be strictly increasing");
        }
        if (values_[i] < 0.0) {
            throw std::invalid_argument("DensityCurve: negative value");
        }
    }
}

double DensityCurve::integral() const
{
    double total = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        total += 0.5 * (values_[i] + values_[i - 1]) * (grid_[i] - grid_[i - 1]);
    }
    return total;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points)
{
    if (points < 2 || !(hi > lo)) {
        throw std::invalid_argument("uniform_grid: need points >= 2 and hi > lo");
    }
    std::vector<double> grid(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = lo + step * static_cast<double>(i);
    }
    grid.back() = hi;
    return grid;
}

DensityCurve limit_density_curve(const SpectralLaw& law, std::span<const double> grid, double eta)
{
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = grid[i] == 0.0 ? 0.0 : law_density(law, grid[i], eta);
    }
    return DensityCurve(std::vector<double>(grid.begin(), grid.end()), std::move(values));
}

CdfCurve limit_cdf(const SpectralLaw& law, std::span<const double> grid, double eta)
{
    const DensityCurve density = limit_density_curve(law, grid, eta);
    CdfCurve cdf;
    cdf.grid = density.grid();
    cdf.values.resize(grid.size());
    cdf.point_mass_at_zero = point_mass_at_zero(law);
    double total = 0.0;
    cdf.values[0] = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        total += 0.5 * (density.values()[i] + density.values()[i - 1]) * (grid[i] - grid[i - 1]);
        cdf.values[i] = total;
    }
    return cdf;
}

} // namespace spectra
