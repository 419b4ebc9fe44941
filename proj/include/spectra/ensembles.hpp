#pragma once

/**
 * @file ensembles.hpp
 * @brief Entry distributions for X and population matrices T.
 *
 * Entry distributions are standardized (mean 0, variance 1). Populations are
 * identity, diagonal with a prescribed spectral measure, or Wishart-type
 * T = n2^-1 Y Y^T built from an independent p x n2 entry matrix.
 */

#include "spectra/rng.hpp"
#include "spectra/specmat.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace spectra {

class EntryDistribution {
public:
    enum class Kind { ShiftedExponential, Rademacher, Custom };

    /// Exp(1) - 1, drawn as -log(U) - 1. Tail function P(X > x) = e^{-(x+1)}.
    static EntryDistribution shifted_exponential();
    /// +-1 with probability 1/2 each.
    static EntryDistribution rademacher();
    /// Arbitrary inverse-CDF sampler on (0,1). The caller is responsible for
    /// the mean-0 / variance-1 standardization.
    static EntryDistribution custom(std::string name, std::function<double(double)> inverse_cdf);

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

    double draw(Xoshiro256& rng) const;

private:
    EntryDistribution(Kind kind, std::string name, std::function<double(double)> inverse_cdf);

    Kind kind_;
    std::string name_;
    std::function<double(double)> inverse_cdf_;
};

/// Finitely supported probability measure.
class DiscreteMeasure {
public:
    struct Atom {
        double location;
        double mass;
    };

    /// Masses must be > 0 and sum to 1 within 1e-12.
    explicit DiscreteMeasure(std::vector<Atom> atoms);

    static DiscreteMeasure point_mass(double location);
    /// Mass 1/k at each value (duplicates kept as separate atoms).
    static DiscreteMeasure empirical(std::span<const double> values);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    double moment(int k) const;
    double min_location() const;
    double max_location() const;

private:
    std::vector<Atom> atoms_;
};

struct IdentityPopulation {
    std::size_t p;
};

struct DiagonalPopulation {
    DiscreteMeasure measure;
    std::size_t p;
};

struct WishartPopulation {
    EntryDistribution entry;
    std::size_t p;
    std::size_t n2;
};

using PopulationSpec = std::variant<IdentityPopulation, DiagonalPopulation, WishartPopulation>;

std::size_t population_dim(const PopulationSpec& spec);

struct Population {
    SymMatrix t;
    SymMatrix t_sqrt;
    DiscreteMeasure h_n;   // empirical spectral distribution of t
};

/// p x n matrix of i.i.d. draws from the kData stream of (seed, replicate).
DenseMatrix sample_entries(const EntryDistribution& dist, std::size_t p, std::size_t n,
                           std::uint64_t seed, std::uint64_t replicate = 0);

/// Population matrix, its square root and H_n. Wishart draws use the
/// kPopulation stream of (seed, replicate).
Population build_population(const PopulationSpec& spec, std::uint64_t seed,
                            std::uint64_t replicate = 0);

/// Integer multiplicities summing to p, proportional to the atom masses;
/// remainders go to the largest fractional parts (ties to the earlier atom).
std::vector<std::size_t> diagonal_multiplicities(const DiscreteMeasure& measure, std::size_t p);

} // namespace spectra
