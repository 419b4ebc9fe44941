#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spectra/error.hpp"
#include "spectra/quadrature.hpp"
#include "spectra/specmat.hpp"
#include "spectra/stieltjes.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace spectra;

namespace {

const Complex I(0.0, 1.0);

SpectralLaw mp_law(double c)
{
    return SpectralLaw(c, DiscreteMeasure::point_mass(1.0));
}

SpectralLaw two_atom_law(double c)
{
    return SpectralLaw(c, DiscreteMeasure({{1.0, 0.5}, {2.0, 0.5}}));
}

EmpiricalSpectrum sampled_spectrum(const PopulationSpec& population, std::size_t p, std::size_t n,
                                   std::uint64_t seed)
{
    const auto pop = build_population(population, seed);
    const auto x = sample_entries(EntryDistribution::shifted_exponential(), p, n, seed);
    return EmpiricalSpectrum(eigvalsh(sample_covariance(pop.t_sqrt, x)), n);
}

double first_moment(const EmpiricalSpectrum& s)
{
    double sum = 0.0;
    for (double v : s.eigenvalues()) {
        sum += v;
    }
    return sum / static_cast<double>(s.p());
}

double second_moment(const EmpiricalSpectrum& s)
{
    double sum = 0.0;
    for (double v : s.eigenvalues()) {
        sum += v * v;
    }
    return sum / static_cast<double>(s.p());
}

} // namespace

TEST_CASE("stieltjes: empirical worked values")
{
    const Complex a = stieltjes(EmpiricalSource{EmpiricalSpectrum({1.0}, 4)}, I);
    CHECK(std::abs(a - Complex(0.5, 0.5)) <= 1e-15);
    const Complex b = stieltjes(EmpiricalSource{EmpiricalSpectrum({0.0, 2.0}, 8)}, 1.0 + I);
    CHECK(std::abs(b - Complex(0.0, 0.5)) <= 1e-15);
    CHECK_THROWS_AS(stieltjes(EmpiricalSource{EmpiricalSpectrum({1.0}, 4)}, Complex(1.0, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("stieltjes: kernel source approaches the empirical value as h -> 0")
{
    const EmpiricalSpectrum s({1.0}, 4);
    const Complex m = stieltjes(KdeSource{s, gaussian_kernel(), 1e-4}, I);
    CHECK(std::abs(m - Complex(0.5, 0.5)) <= 1e-3);
}

TEST_CASE("stieltjes: law source matches the quadratic root for H = delta_1")
{
    const double c = 0.25;
    for (const Complex z : {Complex(1.0, 0.1), Complex(-0.5, 0.3), Complex(3.0, 1e-3)}) {
        const Complex expected = primary_from_companion(c, test_support::mp_companion_root(c, z), z);
        CHECK(std::abs(stieltjes(LawSource{mp_law(c)}, z) - expected) <= 1e-8);
    }
}

TEST_CASE("mmse_sir_limit: worked values")
{
    CHECK(mmse_sir_limit(EmpiricalSource{EmpiricalSpectrum({1.0}, 4)}, 1.0, 1.0) == 0.5);
    // Positive root of mu^2 z + (z + 1 - c) mu + 1 = 0 at z = -1, c = 1/4, mapped to m(-1) (mpmath).
    const double oracle = 0.531128874149274826;
    CHECK(mmse_sir_limit(LawSource{mp_law(0.25)}, 1.0, 1.0) == doctest::Approx(oracle).epsilon(1e-7));

    // Independent route: integrate the closed-form density against 1/(x + 1).
    const auto s = mp_support(0.25);
    const double mid = 0.5 * (s.lower + s.upper), half = 0.5 * (s.upper - s.lower);
    const double quad = integrate(
        [&](double th) {
            const double x = mid + half * std::sin(th);
            return mp_density(0.25, x) / (x + 1.0) * half * std::cos(th);
        },
        -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, {1e-10, 25});
    CHECK(quad == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("mmse_sir_limit: linear in p1, rejects bad noise levels")
{
    const EmpiricalSpectrum spec({0.4, 0.9, 1.3, 2.0}, 16);
    const std::vector<TransformSource> sources{EmpiricalSource{spec}, KdeSource{spec, gaussian_kernel(), 0.05},
                                               LawSource{two_atom_law(0.25)}};
    for (const auto& src : sources) {
        const double one = mmse_sir_limit(src, 0.7, 1.0);
        CHECK(one > 0.0);
        CHECK(mmse_sir_limit(src, 0.7, 2.0) == 2.0 * one);
        CHECK_THROWS_AS(mmse_sir_limit(src, 0.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(mmse_sir_limit(src, -1.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(mmse_sir_limit(src, 1.0, 0.0), std::invalid_argument);
    }
    const EmpiricalSpectrum negative({-2.0, 1.0}, 8);
    CHECK_THROWS_AS(mmse_sir_limit(EmpiricalSource{negative}, 1.0, 1.0), NumericalError);
}

TEST_CASE("mmse_sir_limit: kernel estimate tracks the limit at 800 x 3200")
{
    const auto spec = sampled_spectrum(IdentityPopulation{800}, 800, 3200, 11);
    const double h = bandwidth(DefaultBandwidth{}, 3200);
    const double estimate = mmse_sir_limit(KdeSource{spec, gaussian_kernel(), h}, 1.0, 1.0);
    CHECK(std::abs(estimate - 0.531128874149274826) <= 0.01);
}

TEST_CASE("recover_s: exact-law sources satisfy s(z1) = int dH / (t - z1)")
{
    {
        const auto pt = recover_s(LawSource{mp_law(0.25)}, 0.25, 1.0 + 0.5 * I);
        CHECK(pt.z1.imag() > 0.0);
        CHECK(std::abs(pt.s - 1.0 / (1.0 - pt.z1)) <= 1e-6);
        CHECK(pt.z1 == -1.0 / pt.companion);
    }
    {
        const auto pt = recover_s(LawSource{two_atom_law(0.25)}, 0.25, 1.5 + 0.5 * I);
        CHECK(std::abs(pt.s - (0.5 / (1.0 - pt.z1) + 0.5 / (2.0 - pt.z1))) <= 1e-6);
    }
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> xr(-1.0, 6.0), yr(0.05, 3.0);
    for (int k = 0; k < 50; ++k) {
        const Complex z(xr(gen), yr(gen));
        const auto pt = recover_s(LawSource{two_atom_law(0.5)}, 0.5, z);
        CHECK(std::abs(pt.s - (0.5 / (1.0 - pt.z1) + 0.5 / (2.0 - pt.z1))) <= 1e-6);
    }
}

TEST_CASE("recover_s: corrupt transform is rejected")
{
    KernelSpec negative = gaussian_kernel();
    negative.k = [g = gaussian_kernel().k](double u) { return -g(u); };
    const KdeSource corrupt{EmpiricalSpectrum({1.0, 2.0}, 8), negative, 0.1};
    CHECK_THROWS_WITH_AS(recover_s(corrupt, 1.0, 1.5 + 0.1 * I), "companion transform left upper half-plane",
                         NumericalError);
    CHECK_THROWS_AS(recover_s(LawSource{mp_law(0.25)}, 1.5, I), std::invalid_argument);
}

TEST_CASE("recover_population: exact-law moments")
{
    const auto delta = recover_population(LawSource{mp_law(0.25)}, 0.25);
    CHECK(std::abs(delta.m1 - 1.0) <= 1e-3);
    CHECK(std::abs(delta.m2 - 1.0) <= 1e-3);
    CHECK(delta.m2 >= delta.m1 * delta.m1 - 1e-9);

    const auto two = recover_population(LawSource{two_atom_law(0.25)}, 0.25);
    CHECK(std::abs(two.m1 - 1.5) <= 1e-2);
    CHECK(std::abs(two.m2 - 2.5) <= 1e-2);
    CHECK(two.tr_t2_over_n == two.m2);
    CHECK(two.m2 >= two.m1 * two.m1 - 1e-9);
    CHECK(two.diagnostics.usable_points == two.s_values.size());
    CHECK(two.diagnostics.fit_residual <= two.diagnostics.contour.max_fit_residual);
}

TEST_CASE("recover_population: agrees with the direct moment identities on a kernel estimate")
{
    // For any spectrum, the first two H-moments implied by the transform are
    // F1 and F2 - c F1^2; the Gaussian kernel adds h^2 to F2.
    const auto spec = sampled_spectrum(DiagonalPopulation{DiscreteMeasure({{1.0, 0.5}, {2.0, 0.5}}), 200}, 200, 800, 5);
    const double h = bandwidth(DefaultBandwidth{}, 800);
    const double c = spec.ratio();
    const auto result = recover_population(KdeSource{spec, gaussian_kernel(), h}, c);
    const double f1 = first_moment(spec);
    const double f2 = second_moment(spec) + h * h;
    CHECK(std::abs(result.m1 - f1) <= 1e-3);
    CHECK(std::abs(result.m2 - (f2 - c * f1 * f1)) <= 1e-3);

    const auto raw = recover_population(EmpiricalSource{spec}, c);
    CHECK(std::abs(raw.m2 - (second_moment(spec) - c * f1 * f1)) <= 1e-3);
}

TEST_CASE("recover_population: guards")
{
    CHECK_THROWS_WITH_AS(recover_population(LawSource{mp_law(0.25)}, 1.0), "recovery requires c in (0,1)",
                         std::invalid_argument);
    RecoveryContour few;
    few.points = 3;
    few.fit_order = 2;
    CHECK_THROWS_AS(recover_population(LawSource{mp_law(0.25)}, 0.25, few), NumericalError);
    RecoveryContour strict;
    strict.fit_order = 2;
    strict.max_fit_residual = 1e-14;
    CHECK_THROWS_AS(recover_population(LawSource{two_atom_law(0.25)}, 0.25, strict), NumericalError);
}

TEST_CASE("invert_stieltjes: point mass and MP law")
{
    const auto delta = [](Complex z) { return 1.0 / (1.0 - z); };
    const auto inside = invert_stieltjes(delta, 0.5, 1.5, {1e-2, 1e-3, 1e-4});
    REQUIRE(inside.masses.size() == 3);
    CHECK(std::abs(inside.masses.back() - 1.0) <= 0.01);
    CHECK(std::abs(inside.extrapolated - 1.0) <= 0.01);
    CHECK(inside.masses[2] >= inside.masses[0]);

    const auto outside = invert_stieltjes(delta, 2.0, 3.0, {1e-2, 1e-3, 1e-4});
    CHECK(std::abs(outside.extrapolated) <= 0.01);

    const auto law = mp_law(0.25);
    const auto mp = invert_stieltjes([&](Complex z) { return law_stieltjes(law, z); }, 0.2, 2.3, {2e-2, 1e-2});
    CHECK(std::abs(mp.extrapolated - 1.0) <= 0.01);
    CHECK(mp.extrapolated >= -0.01);
    CHECK(mp.extrapolated <= 1.01);

    // Partial interval against direct quadrature of the density.
    const auto part = invert_stieltjes([&](Complex z) { return law_stieltjes(law, z); }, 0.8, 1.6, {2e-2, 1e-2});
    const double direct = integrate([](double x) { return mp_density(0.25, x); }, 0.8, 1.6, {1e-10, 25});
    CHECK(std::abs(part.extrapolated - direct) <= 0.01);

    CHECK_THROWS_AS(invert_stieltjes(delta, 0.5, 1.5, {1e-3, 1e-2}), std::invalid_argument);
    CHECK_THROWS_AS(invert_stieltjes(delta, 0.5, 1.5, {1e-2, 1e-2}), std::invalid_argument);
    CHECK_THROWS_AS(invert_stieltjes(delta, 0.5, 1.5, {}), std::invalid_argument);
}

TEST_CASE("property: Herglotz positivity on 1000 random (source, z) pairs")
{
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.1, 3.0), xr(-1.0, 5.0), logy(-2.0, 1.0);
    std::vector<TransformSource> sources;
    for (int k = 0; k < 3; ++k) {
        std::vector<double> mu(20);
        for (auto& v : mu) {
            v = u(gen);
        }
        const EmpiricalSpectrum spec(mu, 80);
        sources.emplace_back(EmpiricalSource{spec});
        sources.emplace_back(KdeSource{spec, gaussian_kernel(), 0.05 + 0.1 * k});
    }
    sources.emplace_back(LawSource{mp_law(0.25)});
    sources.emplace_back(LawSource{mp_law(2.0)});
    sources.emplace_back(LawSource{two_atom_law(0.5)});
    int positive = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto& src = sources[static_cast<std::size_t>(k) % sources.size()];
        const Complex z(xr(gen), std::pow(10.0, logy(gen)));
        positive += stieltjes(src, z).imag() > 0.0 ? 1 : 0;
    }
    CHECK(positive == 1000);
}

TEST_CASE("property: large-y asymptotics")
{
    const EmpiricalSpectrum spec({0.3, 1.1, 2.9}, 12);
    const double h = 0.1;
    const std::vector<std::pair<TransformSource, double>> cases{
        {EmpiricalSource{spec}, spec.max()},
        {KdeSource{spec, gaussian_kernel(), h}, spec.max() + 10.0 * h},
        {LawSource{two_atom_law(0.25)}, support_bounds(two_atom_law(0.25)).upper},
    };
    for (const auto& [src, reach] : cases) {
        const double bound = 2.0 * (1.0 + reach * reach);
        for (double y : {100.0, 300.0, 1000.0}) {
            const Complex z(0.0, y);
            CHECK(std::abs(stieltjes(src, z) + 1.0 / z) <= bound / (y * y));
        }
    }
}

TEST_CASE("property: companion round trip")
{
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-4.0, 4.0), y(1e-3, 4.0), cr(0.05, 0.95);
    for (int k = 0; k < 1000; ++k) {
        const double c = cr(gen);
        const Complex z(u(gen), y(gen));
        const Complex m(u(gen), y(gen));
        const Complex back = primary_from_companion(c, companion_from_primary(c, m, z), z);
        CHECK(std::abs(back - m) <= 1e-14 * std::max(1.0, std::abs(m) + std::abs(1.0 - c) / (c * std::abs(z))));
    }
}
