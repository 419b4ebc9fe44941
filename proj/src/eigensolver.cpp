// Symmetric eigensolver: Householder reduction to tridiagonal form followed
// by QL iteration with implicit Wilkinson shifts (the EISPACK tred2/tql2
// pair). The working matrix is stored column-major so that the inner loops,
// which walk down columns, touch contiguous memory.

#include "spectra/error.hpp"
#include "spectra/specmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace spectra {

namespace {

class ColumnMajor {
public:
    explicit ColumnMajor(const SymMatrix& m) : n_(m.dim()), a_(m.data().begin(), m.data().end())
    {
        // m is symmetric, so its row-major buffer already is its column-major buffer.
    }

    double& operator()(std::size_t r, std::size_t c) { return a_[c * n_ + r]; }
    double* column(std::size_t c) { return a_.data() + c * n_; }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::vector<double> a_;
};

// On return d holds the diagonal and e[1..n) the sub-diagonal (e[0] = 0).
// With want_vectors, v holds the orthogonal transformation.
void tridiagonalize(ColumnMajor& v, std::vector<double>& d, std::vector<double>& e, bool want_vectors)
{
    const std::size_t n = v.size();
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = v(n - 1, j);
    }

    for (std::size_t i = n - 1; i > 0; --i) {
        double scale = 0.0;
        double h = 0.0;
        for (std::size_t k = 0; k < i; ++k) {
            scale += std::abs(d[k]);
        }
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
                v(j, i) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] = 0.0;
            }

            // e = A u (lower triangle of the active block)
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                v(j, i) = f;
                double* col = v.column(j);
                g = e[j] + col[j] * f;
                for (std::size_t k = j + 1; k < i; ++k) {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) {
                e[j] -= hh * d[j];
            }
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                double* col = v.column(j);
                for (std::size_t k = j; k < i; ++k) {
                    col[k] -= (f * e[k] + g * d[k]);
                }
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    if (!want_vectors) {
        for (std::size_t j = 0; j < n; ++j) {
            d[j] = v(j, j);
        }
        e[0] = 0.0;
        return;
    }

    // Accumulate the Householder reflectors.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        v(n - 1, i) = v(i, i);
        v(i, i) = 1.0;
        const double h = d[i + 1];
        double* next = v.column(i + 1);
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) {
                d[k] = next[k] / h;
            }
            for (std::size_t j = 0; j <= i; ++j) {
                double* col = v.column(j);
                double g = 0.0;
                for (std::size_t k = 0; k <= i; ++k) {
                    g += next[k] * col[k];
                }
                for (std::size_t k = 0; k <= i; ++k) {
                    col[k] -= g * d[k];
                }
            }
        }
        for (std::size_t k = 0; k <= i; ++k) {
            next[k] = 0.0;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = v(n - 1, j);
        v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

void ql_implicit(ColumnMajor& v, std::vector<double>& d, std::vector<double>& e, bool want_vectors)
{
    const std::size_t n = v.size();
    for (std::size_t i = 1; i < n; ++i) {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    const std::size_t iteration_cap = 50 * n;
    std::size_t iterations = 0;
    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::ldexp(1.0, -52);

    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) {
                break;
            }
            ++m;
        }

        if (m > l) {
            do {
                if (++iterations > iteration_cap) {
                    throw ConvergenceError("eigh: QL iteration did not converge at off-diagonal index " +
                                               std::to_string(l),
                                           l, std::abs(e[l]));
                }
                // Wilkinson shift from the leading 2x2 block.
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) {
                    d[i] -= h;
                }
                f += h;

                // Implicit QL sweep.
                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t i = m; i-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if (want_vectors) {
                        double* ci = v.column(i);
                        double* ci1 = v.column(i + 1);
                        for (std::size_t k = 0; k < n; ++k) {
                            const double t = ci1[k];
                            ci1[k] = s * ci[k] + c * t;
                            ci[k] = c * ci[k] - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

} // namespace

EigenDecomposition eigh(const SymMatrix& m)
{
    const std::size_t n = m.dim();
    ColumnMajor v(m);
    std::vector<double> d(n), e(n);
    tridiagonalize(v, d, e, true);
    ql_implicit(v, d, e, true);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    std::vector<double> values(n);
    std::vector<double> vectors(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        values[k] = d[order[k]];
        const double* col = v.column(order[k]);
        for (std::size_t i = 0; i < n; ++i) {
            vectors[i * n + k] = col[i];
        }
    }
    return {std::move(values), DenseMatrix(n, n, std::move(vectors))};
}

std::vector<double> eigvalsh(const SymMatrix& m)
{
    const std::size_t n = m.dim();
    ColumnMajor v(m);
    std::vector<double> d(n), e(n);
    tridiagonalize(v, d, e, false);
    ql_implicit(v, d, e, false);
    std::sort(d.begin(), d.end());
    return d;
}

} // namespace spectra
