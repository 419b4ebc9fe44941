#include "spectra/quadrature.hpp"

#include "spectra/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace spectra {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;

constexpr std::size_t kMaxPieces = 100000;

template <class Result>
struct Piece {
    double a;
    double b;
    Result value;
    double error;
    unsigned depth;

    bool operator<(const Piece& other) const { return error < other.error; }
};

// Globally adaptive bisection: always split the piece with the largest
// Kronrod-Gauss error estimate until the summed estimate meets abs_tol.
template <class Result, class F>
Result run(const F& f, double a, double b, const QuadratureOptions& options)
{
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("integrate: need finite a <= b");
    }
    if (a == b) {
        return Result{};
    }
    auto evaluate = [&f](double lo, double hi, unsigned depth) {
        double error = 0.0;
        const Result value = Rule::integrate(f, lo, hi, 0, 0.0, &error);
        return Piece<Result>{lo, hi, value, error, depth};
    };

    std::priority_queue<Piece<Result>> pieces;
    pieces.push(evaluate(a, b, 0));
    double total_error = pieces.top().error;
    while (total_error > options.abs_tol && pieces.top().depth < options.max_depth && pieces.size() < kMaxPieces) {
        const Piece<Result> worst = pieces.top();
        pieces.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Piece<Result> left = evaluate(worst.a, mid, worst.depth + 1);
        const Piece<Result> right = evaluate(mid, worst.b, worst.depth + 1);
        total_error += left.error + right.error - worst.error;
        pieces.push(left);
        pieces.push(right);
    }

    std::vector<Piece<Result>> done;
    done.reserve(pieces.size());
    while (!pieces.empty()) {
        done.push_back(pieces.top());
        pieces.pop();
    }
    std::sort(done.begin(), done.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    Result value{};
    double error = 0.0;
    for (const auto& piece : done) {
        value += piece.value;
        error += piece.error;
    }
    if (!(error <= options.abs_tol) || !std::isfinite(std::abs(value))) {
        std::ostringstream msg;
        msg << "integrate: achieved tolerance " << error << " exceeds " << options.abs_tol
            << " on [" << a << ", " << b << "]";
        throw NumericalError(msg.str(), error);
    }
    return value;
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& options)
{
    return run<double>(f, a, b, options);
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f, double a, double b,
                                       const QuadratureOptions& options)
{
    return run<std::complex<double>>(f, a, b, options);
}

namespace {

template <class Result, class F, class Single>
Result piecewise(const F& f, std::span<const double> breakpoints, const QuadratureOptions& options,
                 Single single)
{
    if (breakpoints.size() < 2) {
        throw std::invalid_argument("integrate_piecewise: need at least two breakpoints");
    }
    QuadratureOptions piece = options;
    piece.abs_tol = options.abs_tol / static_cast<double>(breakpoints.size() - 1);
    Result total{};
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        total += single(f, breakpoints[i], breakpoints[i + 1], piece);
    }
    return total;
}

} // namespace

double integrate_piecewise(const std::function<double(double)>& f, std::span<const double> breakpoints,
                           const QuadratureOptions& options)
{
    return piecewise<double>(f, breakpoints, options, [](const auto& g, double a, double b, const auto& o) {
        return integrate(g, a, b, o);
    });
}

std::complex<double> integrate_complex_piecewise(const std::function<std::complex<double>(double)>& f,
                                                 std::span<const double> breakpoints,
                                                 const QuadratureOptions& options)
{
    return piecewise<std::complex<double>>(f, breakpoints, options,
                                           [](const auto& g, double a, double b, const auto& o) {
                                               return integrate_complex(g, a, b, o);
                                           });
}

} // namespace spectra
