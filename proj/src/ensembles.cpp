#include "spectra/ensembles.hpp"

#include "spectra/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spectra {

EntryDistribution::EntryDistribution(Kind kind, std::string name,
                                     std::function<double(double)> inverse_cdf)
    : kind_(kind), name_(std::move(name)), inverse_cdf_(std::move(inverse_cdf))
{
}

EntryDistribution EntryDistribution::shifted_exponential()
{
    return {Kind::ShiftedExponential, "exp", {}};
}

EntryDistribution EntryDistribution::rademacher()
{
    return {Kind::Rademacher, "bion", {}};
}

EntryDistribution EntryDistribution::custom(std::string name,
                                            std::function<double(double)> inverse_cdf)
{
    if (!inverse_cdf) {
        throw std::invalid_argument("EntryDistribution::custom: empty sampler");
    }
    return {Kind::Custom, std::move(name), std::move(inverse_cdf)};
}

double EntryDistribution::draw(Xoshiro256& rng) const
{
    switch (kind_) {
    case Kind::ShiftedExponential:
        return -std::log(rng.uniform_open()) - 1.0;
    case Kind::Rademacher:
        return rng.coin() ? 1.0 : -1.0;
    case Kind::Custom:
        return inverse_cdf_(rng.uniform_open());
    }
    return 0.0;
}

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms))
{
    if (atoms_.empty()) {
        throw std::invalid_argument("DiscreteMeasure: no atoms");
    }
    double total = 0.0;
    for (const Atom& a : atoms_) {
        if (!std::isfinite(a.location)) {
            throw std::invalid_argument("DiscreteMeasure: non-finite location");
        }
        if (!(a.mass > 0.0) || !std::isfinite(a.mass)) {
            throw std::invalid_argument("DiscreteMeasure: masses must be positive");
        }
        total += a.mass;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("DiscreteMeasure: masses sum to " + std::to_string(total) +
                                    ", expected 1");
    }
}

DiscreteMeasure DiscreteMeasure::point_mass(double location)
{
    return DiscreteMeasure({{location, 1.0}});
}

DiscreteMeasure DiscreteMeasure::empirical(std::span<const double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("DiscreteMeasure::empirical: no values");
    }
    const double w = 1.0 / static_cast<double>(values.size());
    std::vector<Atom> atoms;
    atoms.reserve(values.size());
    for (double v : values) {
        atoms.push_back({v, w});
    }
    // Renormalize the roundoff in k * (1/k) onto the last atom.
    double total = 0.0;
    for (const Atom& a : atoms) {
        total += a.mass;
    }
    atoms.back().mass += 1.0 - total;
    return DiscreteMeasure(std::move(atoms));
}

double DiscreteMeasure::moment(int k) const
{
    double s = 0.0;
    for (const Atom& a : atoms_) {
        s += a.mass * std::pow(a.location, k);
    }
    return s;
}

double DiscreteMeasure::min_location() const
{
    return std::min_element(atoms_.begin(), atoms_.end(),
                            [](const Atom& a, const Atom& b) { return a.location < b.location; })
        ->location;
}

double DiscreteMeasure::max_location() const
{
    return std::max_element(atoms_.begin(), atoms_.end(),
                            [](const Atom& a, const Atom& b) { return a.location < b.location; })
        ->location;
}

std::size_t population_dim(const PopulationSpec& spec)
{
    return std::visit([](const auto& s) { return s.p; }, spec);
}

DenseMatrix sample_entries(const EntryDistribution& dist, std::size_t p, std::size_t n,
                           std::uint64_t seed, std::uint64_t replicate)
{
    if (p == 0 || n == 0) {
        throw std::invalid_argument("sample_entries: p and n must be >= 1");
    }
    Xoshiro256 rng(StreamKey{seed, replicate, kDataStream});
    std::vector<double> entries(p * n);
    for (double& v : entries) {
        v = dist.draw(rng);
    }
    return DenseMatrix(p, n, std::move(entries));
}

std::vector<std::size_t> diagonal_multiplicities(const DiscreteMeasure& measure, std::size_t p)
{
    const auto& atoms = measure.atoms();
    std::vector<std::size_t> counts(atoms.size());
    std::vector<double> remainder(atoms.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double exact = atoms[i].mass * static_cast<double>(p);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < p; ++k) {
        ++counts[order[k % order.size()]];
        ++assigned;
    }
    return counts;
}

namespace {

Population identity_population(std::size_t p)
{
    return {SymMatrix::identity(p), SymMatrix::identity(p), DiscreteMeasure::point_mass(1.0)};
}

Population diagonal_population(const DiagonalPopulation& spec)
{
    for (const auto& atom : spec.measure.atoms()) {
        if (!(atom.location > 0.0)) {
            throw std::invalid_argument("diagonal population: atom locations must be > 0");
        }
    }
    const auto counts = diagonal_multiplicities(spec.measure, spec.p);
    std::vector<double> diag;
    diag.reserve(spec.p);
    std::vector<DiscreteMeasure::Atom> realized;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) {
            continue;
        }
        diag.insert(diag.end(), counts[i], spec.measure.atoms()[i].location);
        realized.push_back({spec.measure.atoms()[i].location,
                            static_cast<double>(counts[i]) / static_cast<double>(spec.p)});
    }
    std::vector<double> roots(diag.size());
    std::transform(diag.begin(), diag.end(), roots.begin(), [](double v) { return std::sqrt(v); });
    double total = 0.0;
    for (const auto& a : realized) {
        total += a.mass;
    }
    realized.back().mass += 1.0 - total;
    return {SymMatrix::diagonal(diag), SymMatrix::diagonal(roots), DiscreteMeasure(std::move(realized))};
}

Population wishart_population(const WishartPopulation& spec, std::uint64_t seed, std::uint64_t replicate)
{
    if (spec.n2 < spec.p) {
        throw std::invalid_argument("wishart population: n2 must be >= p");
    }
    Xoshiro256 rng(StreamKey{seed, replicate, kPopulationStream});
    std::vector<double> y(spec.p * spec.n2);
    for (double& v : y) {
        v = spec.entry.draw(rng);
    }
    SymMatrix t = sample_covariance(SymMatrix::identity(spec.p), DenseMatrix(spec.p, spec.n2, std::move(y)));
    const EigenDecomposition ed = eigh(t);
    if (ed.eigenvalues.front() <= 1e-10) {
        throw NumericalError("population not positive definite (min eigenvalue " +
                                 std::to_string(ed.eigenvalues.front()) + ")",
                             ed.eigenvalues.front());
    }

    // T^{1/2} from the decomposition already in hand.
    const std::size_t p = spec.p;
    std::vector<double> root(p);
    for (std::size_t k = 0; k < p; ++k) {
        root[k] = std::sqrt(ed.eigenvalues[k]);
    }
    std::vector<double> r(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                s += ed.eigenvectors(i, k) * root[k] * ed.eigenvectors(j, k);
            }
            r[i * p + j] = s;
        }
    }
    return {std::move(t), SymMatrix::from_upper(DenseMatrix(p, p, std::move(r))),
            DiscreteMeasure::empirical(ed.eigenvalues)};
}

} // namespace

Population build_population(const PopulationSpec& spec, std::uint64_t seed, std::uint64_t replicate)
{
    if (population_dim(spec) == 0) {
        throw std::invalid_argument("population: p must be >= 1");
    }
    struct Visitor {
        std::uint64_t seed;
        std::uint64_t replicate;
        Population operator()(const IdentityPopulation& s) const { return identity_population(s.p); }
        Population operator()(const DiagonalPopulation& s) const { return diagonal_population(s); }
        Population operator()(const WishartPopulation& s) const
        {
            return wishart_population(s, seed, replicate);
        }
    };
    return std::visit(Visitor{seed, replicate}, spec);
}

} // namespace spectra
