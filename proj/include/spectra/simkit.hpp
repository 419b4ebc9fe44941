#pragma once

/**
 * @file simkit.hpp
 * @brief Monte-Carlo experiments on sample covariance spectra: single density
 * curves, replicated MSE tables, averaged curves and Kolmogorov-distance rate
 * checks.
 *
 * Replicate i of an experiment draws its X (and a Wishart T, if any) from the
 * streams keyed by (config.seed, i), so results do not depend on thread count
 * or completion order.
 */

#include "spectra/ensembles.hpp"
#include "spectra/kde.hpp"
#include "spectra/limitlaw.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spectra {

/// 0.30, 0.511, 0.722, 0.933, 1.144, 1.356, 1.567, 1.778, 1.989, 2.20
std::vector<double> standard_eval_points();

struct ExperimentConfig {
    EntryDistribution ensemble = EntryDistribution::shifted_exponential();
    PopulationSpec population = IdentityPopulation{50};
    std::size_t p = 50;
    std::size_t n = 200;
    std::size_t replicates = 50;
    BandwidthRule bandwidth = DefaultBandwidth{};
    KernelSpec kernel = gaussian_kernel();
    std::vector<double> eval_points = standard_eval_points();
    std::uint64_t seed = 1;
    std::optional<SpectralLaw> limit;
    bool allow_c_at_least_one = false;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// F_{c,H} for identity and diagonal populations; nullopt for Wishart-type T.
std::optional<SpectralLaw> natural_limit(const PopulationSpec& population, double c);

/// Same population family at dimension p (Wishart keeps its n2/p ratio).
PopulationSpec with_dimension(const PopulationSpec& population, std::size_t p);

/// Eigenvalues of n^-1 T^{1/2} X X^T T^{1/2} for replicate i.
EmpiricalSpectrum sample_spectrum(const ExperimentConfig& config, std::uint64_t replicate);

/// f_n on config.eval_points for one replicate.
DensityCurve run_density_curve(const ExperimentConfig& config, std::uint64_t replicate = 0);

/// Mean of f_n over config.replicates replicates.
DensityCurve run_average_curve(const ExperimentConfig& config);

enum class MseMode { VsLimit, VsAverage };

std::string to_string(MseMode mode);

struct MseTable {
    std::vector<double> eval_points;
    std::vector<double> mse;
    MseMode mode;
    std::size_t replicates;
};

/// Per-replicate estimates, values[i][j] = f_n^{(i)}(x_j).
std::vector<std::vector<double>> replicate_estimates(const ExperimentConfig& config);

/// Reduces replicate estimates to an MSE table. Against `reference` when
/// given, else against the replicate mean. Sums are taken in sorted order, so
/// the result does not depend on the order of the replicates.
MseTable mse_from_estimates(const std::vector<double>& eval_points, const std::vector<std::vector<double>>& values,
                            const std::optional<std::vector<double>>& reference);

/// Against config.limit when present, else against the averaged estimate.
MseTable run_mse_experiment(const ExperimentConfig& config);

/// sup over jump points of max(|F(x-) - G(x-)|, |F(x) - G(x)|), F the ESD.
double kolmogorov_distance(const EmpiricalSpectrum& spectrum, const std::function<double(double)>& reference_cdf);

/// CDF of F_{c,H} (including the atom at 0 when c > 1), tabulated on `points`
/// nodes across the support and linearly interpolated.
std::function<double(double)> tabulated_cdf(const SpectralLaw& law, std::size_t points = 4001);

struct RateReport {
    std::vector<std::size_t> n_values;
    std::vector<double> distances;
    double fitted_exponent;
};

/// Mean Kolmogorov distance to F_{c,H} for each n, with p = round(c n) and c
/// taken from the base config; fitted_exponent is the least-squares slope of
/// log distance against log n.
RateReport rate_check(const ExperimentConfig& base, const std::vector<std::size_t>& n_values);

} // namespace spectra
