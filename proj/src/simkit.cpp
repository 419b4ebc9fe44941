#include "spectra/simkit.hpp"

#include "spectra/parallel.hpp"
#include "spectra/specmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spectra {

namespace {

double sorted_sum(std::vector<double> terms)
{
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) {
        total += t;
    }
    return total;
}

} // namespace

std::vector<double> standard_eval_points()
{
    return {0.30, 0.511, 0.722, 0.933, 1.144, 1.356, 1.567, 1.778, 1.989, 2.20};
}

void ExperimentConfig::validate() const
{
    if (p == 0) {
        throw std::invalid_argument("p must be >= 1");
    }
    if (n == 0) {
        throw std::invalid_argument("n must be >= 1");
    }
    if (replicates == 0) {
        throw std::invalid_argument("replicates must be >= 1");
    }
    if (p >= n && !allow_c_at_least_one) {
        throw std::invalid_argument("p must be < n (c in (0,1))");
    }
    if (population_dim(population) != p) {
        throw std::invalid_argument("population dimension does not match p");
    }
    if (eval_points.empty()) {
        throw std::invalid_argument("eval_points must not be empty");
    }
    if (!kernel.k) {
        throw std::invalid_argument("kernel has no evaluator");
    }
    spectra::bandwidth(bandwidth, n);
}

std::optional<SpectralLaw> natural_limit(const PopulationSpec& population, double c)
{
    if (std::holds_alternative<IdentityPopulation>(population)) {
        return SpectralLaw(c, DiscreteMeasure::point_mass(1.0));
    }
    if (const auto* diag = std::get_if<DiagonalPopulation>(&population)) {
        return SpectralLaw(c, diag->measure);
    }
    return std::nullopt;
}

PopulationSpec with_dimension(const PopulationSpec& population, std::size_t p)
{
    return std::visit(
        [p](const auto& spec) -> PopulationSpec {
            using S = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<S, IdentityPopulation>) {
                return IdentityPopulation{p};
            } else if constexpr (std::is_same_v<S, DiagonalPopulation>) {
                return DiagonalPopulation{spec.measure, p};
            } else {
                const double ratio = static_cast<double>(spec.n2) / static_cast<double>(spec.p);
                return WishartPopulation{spec.entry, p,
                                         static_cast<std::size_t>(std::llround(ratio * static_cast<double>(p)))};
            }
        },
        population);
}

EmpiricalSpectrum sample_spectrum(const ExperimentConfig& config, std::uint64_t replicate)
{
    const Population pop = build_population(config.population, config.seed, replicate);
    const DenseMatrix x = sample_entries(config.ensemble, config.p, config.n, config.seed, replicate);
    return EmpiricalSpectrum(eigvalsh(sample_covariance(pop.t_sqrt, x)), config.n);
}

DensityCurve run_density_curve(const ExperimentConfig& config, std::uint64_t replicate)
{
    config.validate();
    const double h = bandwidth(config.bandwidth, config.n);
    return kde_density_curve(sample_spectrum(config, replicate), config.kernel, h, config.eval_points);
}

std::vector<std::vector<double>> replicate_estimates(const ExperimentConfig& config)
{
    config.validate();
    const double h = bandwidth(config.bandwidth, config.n);
    std::vector<std::vector<double>> values(config.replicates);
    parallel_for(config.replicates, [&](std::size_t i) {
        const auto spectrum = sample_spectrum(config, i);
        auto& row = values[i];
        row.reserve(config.eval_points.size());
        for (double x : config.eval_points) {
            row.push_back(kde_density(spectrum, config.kernel, h, x));
        }
    });
    return values;
}

DensityCurve run_average_curve(const ExperimentConfig& config)
{
    const auto values = replicate_estimates(config);
    std::vector<double> mean(config.eval_points.size());
    for (std::size_t j = 0; j < mean.size(); ++j) {
        std::vector<double> column(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            column[i] = values[i][j];
        }
        mean[j] = sorted_sum(std::move(column)) / static_cast<double>(values.size());
    }
    return DensityCurve(config.eval_points, std::move(mean));
}

std::string to_string(MseMode mode)
{
    return mode == MseMode::VsLimit ? "vs_limit" : "vs_average";
}

MseTable mse_from_estimates(const std::vector<double>& eval_points, const std::vector<std::vector<double>>& values,
                            const std::optional<std::vector<double>>& reference)
{
    if (values.empty()) {
        throw std::invalid_argument("mse: no replicates");
    }
    const std::size_t points = eval_points.size();
    if (reference && reference->size() != points) {
        throw std::invalid_argument("mse: reference length differs from eval_points");
    }
    MseTable table{eval_points, std::vector<double>(points), reference ? MseMode::VsLimit : MseMode::VsAverage,
                   values.size()};
    const double count = static_cast<double>(values.size());
    for (std::size_t j = 0; j < points; ++j) {
        std::vector<double> column(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i].size() != points) {
                throw std::invalid_argument("mse: replicate row length differs from eval_points");
            }
            column[i] = values[i][j];
        }
        const double centre = reference ? (*reference)[j] : sorted_sum(column) / count;
        for (double& v : column) {
            v = (v - centre) * (v - centre);
        }
        table.mse[j] = sorted_sum(std::move(column)) / count;
    }
    return table;
}

MseTable run_mse_experiment(const ExperimentConfig& config)
{
    const auto values = replicate_estimates(config);
    std::optional<std::vector<double>> reference;
    if (config.limit) {
        reference.emplace();
        for (double x : config.eval_points) {
            reference->push_back(x > 0.0 ? law_density(*config.limit, x) : 0.0);
        }
    }
    return mse_from_estimates(config.eval_points, values, reference);
}

double kolmogorov_distance(const EmpiricalSpectrum& spectrum, const std::function<double(double)>& reference_cdf)
{
    const auto& mu = spectrum.eigenvalues();
    const double p = static_cast<double>(mu.size());
    double worst = 0.0;
    std::size_t i = 0;
    while (i < mu.size()) {
        std::size_t j = i;
        while (j < mu.size() && mu[j] == mu[i]) {
            ++j;
        }
        // Left limits are compared with left limits so that jumps of the
        // reference at an eigenvalue are handled.
        const double g_left = reference_cdf(std::nextafter(mu[i], -std::numeric_limits<double>::infinity()));
        const double g = reference_cdf(mu[i]);
        worst = std::max(
            {worst, std::abs(static_cast<double>(i) / p - g_left), std::abs(static_cast<double>(j) / p - g)});
        i = j;
    }
    return std::min(worst, 1.0);
}

std::function<double(double)> tabulated_cdf(const SpectralLaw& law, std::size_t points)
{
    const Interval bounds = support_bounds(law);
    const double span = bounds.upper - bounds.lower;
    const double lo = std::max(bounds.lower - 0.01 * span, bounds.lower > 0.0 ? 1e-12 : 1e-9);
    const double hi = bounds.upper + 0.01 * span;
    CdfCurve cdf = limit_cdf(law, uniform_grid(lo, hi, points));
    const double atom = cdf.point_mass_at_zero;
    // Renormalize the continuous part so the table reaches exactly 1 - atom.
    const double total = cdf.values.back();
    if (total > 0.0) {
        for (double& v : cdf.values) {
            v *= (1.0 - atom) / total;
        }
    }
    return [grid = std::move(cdf.grid), values = std::move(cdf.values), atom](double x) {
        if (x < 0.0) {
            return 0.0;
        }
        if (x <= grid.front()) {
            return atom;
        }
        if (x >= grid.back()) {
            return 1.0;
        }
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - grid.begin());
        const double t = (x - grid[k - 1]) / (grid[k] - grid[k - 1]);
        return atom + values[k - 1] + t * (values[k] - values[k - 1]);
    };
}

RateReport rate_check(const ExperimentConfig& base, const std::vector<std::size_t>& n_values)
{
    if (n_values.size() < 3) {
        throw std::invalid_argument("need >= 3 n-values");
    }
    for (std::size_t k = 1; k < n_values.size(); ++k) {
        if (!(n_values[k] > n_values[k - 1])) {
            throw std::invalid_argument("rate_check: n-values must be increasing");
        }
    }
    base.validate();
    const double c = static_cast<double>(base.p) / static_cast<double>(base.n);
    std::optional<SpectralLaw> limit = base.limit ? base.limit : natural_limit(base.population, c);
    if (!limit) {
        throw std::invalid_argument("rate_check: population has no known limit law");
    }
    const auto reference = tabulated_cdf(*limit);

    RateReport report{n_values, {}, 0.0};
    for (std::size_t n : n_values) {
        ExperimentConfig config = base;
        config.n = n;
        config.p = static_cast<std::size_t>(std::llround(c * static_cast<double>(n)));
        config.population = with_dimension(base.population, config.p);
        config.validate();
        std::vector<double> distances(config.replicates);
        parallel_for(config.replicates, [&](std::size_t i) {
            distances[i] = kolmogorov_distance(sample_spectrum(config, i), reference);
        });
        report.distances.push_back(sorted_sum(std::move(distances)) / static_cast<double>(config.replicates));
    }

    double mx = 0.0, my = 0.0;
    const double k = static_cast<double>(n_values.size());
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        mx += std::log(static_cast<double>(n_values[i])) / k;
        my += std::log(report.distances[i]) / k;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        const double dx = std::log(static_cast<double>(n_values[i])) - mx;
        sxy += dx * (std::log(report.distances[i]) - my);
        sxx += dx * dx;
    }
    report.fitted_exponent = sxy / sxx;
    return report;
}

} // namespace spectra
