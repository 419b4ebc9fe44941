#pragma once

/**
 * @file stieltjes.hpp
 * @brief Stieltjes transforms of spectra, estimators and limit laws, and the
 * two applications built on them: the MMSE receiver SIR functional and
 * recovery of the population spectral distribution H.
 *
 * Recovery runs each contour point z through
 *
 *     mu  = -(1 - c)/z + c m(z)           (companion transform)
 *     z1  = -1/mu
 *     s   = mu (c - 1 - z mu) / c         (= int dH(t) / (t - z1))
 *
 * and fits -s(z1) ~ 1/z1 + m1/z1^2 + m2/z1^3 + ... by least squares.
 */

#include "spectra/kde.hpp"
#include "spectra/limitlaw.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace spectra {

struct EmpiricalSource {
    EmpiricalSpectrum spectrum;
};

struct KdeSource {
    EmpiricalSpectrum spectrum;
    KernelSpec kernel;
    double h;
};

struct LawSource {
    SpectralLaw law;
};

using TransformSource = std::variant<EmpiricalSource, KdeSource, LawSource>;

/// m(z) = int (x - z)^-1 dF(x). Kernel sources are integrated numerically
/// over [min - 10h, max + 10h] with absolute tolerance 1e-9.
Complex stieltjes(const TransformSource& source, Complex z);

/// p1 int (x + sigma2)^-1 dF(x).
double mmse_sir_limit(const TransformSource& source, double sigma2, double p1);

struct RecoveredPoint {
    Complex z;
    Complex companion;   // mu(z)
    Complex z1;
    Complex s;
};

/// Throws NumericalError "companion transform left upper half-plane" when
/// Im mu(z) <= 0 or Im z1 <= 0.
RecoveredPoint recover_s(const TransformSource& source, double c, Complex z);

struct RecoveryContour {
    double im = 0.5;                // Im z on the contour
    double start_offset = 5.0;      // first Re z beyond the right support edge
    double end_offset = 50.0;       // last Re z beyond the right support edge
    std::size_t points = 16;
    std::size_t fit_order = 8;      // number of fitted moments m1..m_k
    double max_fit_residual = 1e-6; // relative to max |s|
};

struct RecoveryDiagnostics {
    double fit_residual = 0.0;
    double support_edge = 0.0;
    std::size_t usable_points = 0;
    RecoveryContour contour;
};

struct RecoveryResult {
    std::vector<RecoveredPoint> s_values;
    double m1 = 0.0;
    double m2 = 0.0;
    double tr_t2_over_n = 0.0;   // int t^2 dH, i.e. p^-1 tr T^2
    RecoveryDiagnostics diagnostics;
};

/// Requires c in (0, 1).
RecoveryResult recover_population(const TransformSource& source, double c, const RecoveryContour& contour = {});

struct InversionResult {
    std::vector<double> v;
    std::vector<double> masses;
    double extrapolated = 0.0;   // linear extrapolation in v through the last two masses
};

/// (1/pi) int_a^b Im m(u + i v) du for each v of a strictly decreasing positive sequence.
InversionResult invert_stieltjes(const std::function<Complex(Complex)>& transform, double a, double b,
                                 const std::vector<double>& v_sequence);

} // namespace spectra
