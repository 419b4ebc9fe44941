#include "spectra/stieltjes.hpp"

#include "spectra/error.hpp"
#include "spectra/parallel.hpp"
#include "spectra/quadrature.hpp"
#include "spectra/specmat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace spectra {

namespace {

constexpr double kKernelReach = 10.0;
constexpr double kLawImag = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Breakpoints every ~2h over the kernel estimate's effective support.
std::vector<double> kernel_breakpoints(const KdeSource& src)
{
    const double lo = src.spectrum.min() - kKernelReach * src.h;
    const double hi = src.spectrum.max() + kKernelReach * src.h;
    const auto pieces = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / (2.0 * src.h)), 1.0, 400.0));
    return uniform_grid(lo, hi, pieces + 1);
}

double support_edge(const TransformSource& source)
{
    return std::visit(Overloaded{
                          [](const EmpiricalSource& s) { return s.spectrum.max(); },
                          [](const KdeSource& s) { return s.spectrum.max() + kKernelReach * s.h; },
                          [](const LawSource& s) { return support_bounds(s.law).upper; },
                      },
                      source);
}

} // namespace

Complex stieltjes(const TransformSource& source, Complex z)
{
    if (!(z.imag() > 0.0)) {
        throw std::invalid_argument("stieltjes: Im z must be > 0");
    }
    return std::visit(Overloaded{
                          [z](const EmpiricalSource& s) {
                              Complex sum{};
                              for (double mu : s.spectrum.eigenvalues()) {
                                  sum += 1.0 / (mu - z);
                              }
                              return sum / static_cast<double>(s.spectrum.p());
                          },
                          [z](const KdeSource& s) {
                              const auto pts = kernel_breakpoints(s);
                              return integrate_complex_piecewise(
                                  [&](double x) { return kde_density(s.spectrum, s.kernel, s.h, x) / (x - z); }, pts,
                                  {1e-9, 30});
                          },
                          [z](const LawSource& s) { return law_stieltjes(s.law, z); },
                      },
                      source);
}

double mmse_sir_limit(const TransformSource& source, double sigma2, double p1)
{
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw std::invalid_argument("mmse_sir_limit: sigma2 must be > 0");
    }
    if (!(p1 > 0.0) || !std::isfinite(p1)) {
        throw std::invalid_argument("mmse_sir_limit: p1 must be > 0");
    }
    const double value = std::visit(
        Overloaded{
            [sigma2](const EmpiricalSource& s) {
                if (!(s.spectrum.min() + sigma2 > 0.0)) {
                    throw NumericalError("mmse_sir_limit: spectrum reaches -sigma2");
                }
                double sum = 0.0;
                for (double mu : s.spectrum.eigenvalues()) {
                    sum += 1.0 / (mu + sigma2);
                }
                return sum / static_cast<double>(s.spectrum.p());
            },
            [sigma2](const KdeSource& s) {
                const auto pts = kernel_breakpoints(s);
                if (!(pts.front() + sigma2 > 0.0)) {
                    throw NumericalError("mmse_sir_limit: kernel estimate support reaches -sigma2");
                }
                return integrate_piecewise(
                    [&](double x) { return kde_density(s.spectrum, s.kernel, s.h, x) / (x + sigma2); }, pts,
                    {1e-9, 30});
            },
            [sigma2](const LawSource& s) {
                // m is real on the negative axis; approach it from just above.
                return law_stieltjes(s.law, Complex(-sigma2, kLawImag)).real();
            },
        },
        source);
    return p1 * value;
}

RecoveredPoint recover_s(const TransformSource& source, double c, Complex z)
{
    if (!(c > 0.0) || !(c <= 1.0)) {
        throw std::invalid_argument("recover_s: c must be in (0, 1]");
    }
    const Complex m = stieltjes(source, z);
    const Complex mu = companion_from_primary(c, m, z);
    if (!(mu.imag() > 0.0)) {
        throw NumericalError("companion transform left upper half-plane", mu.imag());
    }
    const Complex z1 = -1.0 / mu;
    if (!(z1.imag() > 0.0)) {
        throw NumericalError("companion transform left upper half-plane", z1.imag());
    }
    return {z, mu, z1, mu * (c - 1.0 - z * mu) / c};
}

RecoveryResult recover_population(const TransformSource& source, double c, const RecoveryContour& contour)
{
    if (!(c > 0.0 && c < 1.0)) {
        throw std::invalid_argument("recovery requires c in (0,1)");
    }
    if (contour.fit_order < 2 || contour.points < 2 || !(contour.im > 0.0) ||
        !(contour.end_offset > contour.start_offset)) {
        throw std::invalid_argument("recover_population: invalid contour");
    }
    RecoveryResult result;
    result.diagnostics.contour = contour;
    result.diagnostics.support_edge = support_edge(source);

    const auto xs = uniform_grid(result.diagnostics.support_edge + contour.start_offset,
                                 result.diagnostics.support_edge + contour.end_offset, contour.points);
    std::vector<std::optional<RecoveredPoint>> samples(xs.size());
    parallel_for(xs.size(), [&](std::size_t j) {
        try {
            samples[j] = recover_s(source, c, Complex(xs[j], contour.im));
        } catch (const NumericalError&) {
            samples[j].reset();
        }
    });
    for (const auto& s : samples) {
        if (s && std::isfinite(std::abs(s->s))) {
            result.s_values.push_back(*s);
        }
    }
    const std::size_t usable = result.s_values.size();
    result.diagnostics.usable_points = usable;
    if (usable < std::max<std::size_t>(4, contour.fit_order)) {
        std::ostringstream msg;
        msg << "recover_population: only " << usable << " usable contour points";
        throw NumericalError(msg.str());
    }

    // Real least squares on stacked real and imaginary parts of
    //   -s(z1) - 1/z1 = sum_k m_k z1^-(k+1),  k = 1..order.
    // Rows are scaled by |z1|^2 so the leading unknown has unit-size coefficients.
    const std::size_t order = contour.fit_order;
    std::vector<double> design(2 * usable * order);
    std::vector<double> rhs(2 * usable);
    double s_scale = 0.0;
    for (std::size_t j = 0; j < usable; ++j) {
        const auto& pt = result.s_values[j];
        const Complex w = 1.0 / pt.z1;
        const double scale = std::norm(pt.z1);
        const Complex target = (-pt.s - w) * scale;
        Complex power = w * w * scale;
        for (std::size_t k = 0; k < order; ++k) {
            design[2 * j * order + k] = power.real();
            design[(2 * j + 1) * order + k] = power.imag();
            power *= w;
        }
        rhs[2 * j] = target.real();
        rhs[2 * j + 1] = target.imag();
        s_scale = std::max(s_scale, std::abs(pt.s));
    }
    const auto coef = least_squares(DenseMatrix(2 * usable, order, std::move(design)), rhs);

    double worst = 0.0;
    for (std::size_t j = 0; j < usable; ++j) {
        const auto& pt = result.s_values[j];
        const Complex w = 1.0 / pt.z1;
        Complex fitted = w;
        Complex power = w * w;
        for (std::size_t k = 0; k < order; ++k) {
            fitted += coef[k] * power;
            power *= w;
        }
        worst = std::max(worst, std::abs(fitted + pt.s));
    }
    result.diagnostics.fit_residual = worst / s_scale;
    if (!(result.diagnostics.fit_residual <= contour.max_fit_residual)) {
        std::ostringstream msg;
        msg << "recover_population: fit residual " << result.diagnostics.fit_residual << " exceeds "
            << contour.max_fit_residual;
        throw NumericalError(msg.str(), result.diagnostics.fit_residual);
    }
    result.m1 = coef[0];
    result.m2 = coef[1];
    result.tr_t2_over_n = coef[1];
    if (!std::isfinite(result.m1) || !std::isfinite(result.m2)) {
        throw NumericalError("recover_population: non-finite moments");
    }
    return result;
}

InversionResult invert_stieltjes(const std::function<Complex(Complex)>& transform, double a, double b,
                                 const std::vector<double>& v_sequence)
{
    if (!(b > a)) {
        throw std::invalid_argument("invert_stieltjes: need a < b");
    }
    if (v_sequence.empty()) {
        throw std::invalid_argument("invert_stieltjes: empty v sequence");
    }
    for (std::size_t i = 0; i < v_sequence.size(); ++i) {
        if (!(v_sequence[i] > 0.0) || (i > 0 && !(v_sequence[i] < v_sequence[i - 1]))) {
            throw std::invalid_argument("invert_stieltjes: v sequence must be positive and strictly decreasing");
        }
    }
    InversionResult result;
    result.v = v_sequence;
    for (double v : v_sequence) {
        // Breakpoints on a scale of v keep the near-singular peaks resolved.
        const auto pieces = static_cast<std::size_t>(std::clamp(std::ceil((b - a) / (50.0 * v)), 8.0, 2000.0));
        const auto pts = uniform_grid(a, b, pieces + 1);
        const double mass = integrate_piecewise([&](double u) { return transform(Complex(u, v)).imag(); }, pts,
                                                {1e-6, 40}) /
                            std::numbers::pi;
        result.masses.push_back(mass);
    }
    if (result.masses.size() == 1) {
        result.extrapolated = result.masses.front();
    } else {
        const std::size_t k = result.masses.size();
        const double v1 = v_sequence[k - 2], v2 = v_sequence[k - 1];
        const double m1 = result.masses[k - 2], m2 = result.masses[k - 1];
        result.extrapolated = (v1 * m2 - v2 * m1) / (v1 - v2);
    }
    return result;
}

} // namespace spectra
