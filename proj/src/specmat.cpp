#include "spectra/specmat.hpp"

#include "spectra/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spectra {

namespace {

void require_finite(std::span<const double> values, const char* what)
{
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": non-finite entry");
        }
    }
}

// Dot product with four independent accumulators; lets the compiler keep
// several FMAs in flight without reassociating a single sum.
double dot(const double* a, const double* b, std::size_t n)
{
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) {
        s0 += a[k] * b[k];
    }
    return (s0 + s1) + (s2 + s3);
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0)
{
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
    }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries))
{
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
    }
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("DenseMatrix: entries length != rows*cols");
    }
    require_finite(data_, "DenseMatrix");
}

DenseMatrix DenseMatrix::transpose() const
{
    std::vector<double> t(data_.size());
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t[j * rows_ + i] = data_[i * cols_ + j];
        }
    }
    return DenseMatrix(cols_, rows_, std::move(t));
}

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0)
{
    if (dim == 0) {
        throw std::invalid_argument("SymMatrix: dimension must be >= 1");
    }
}

SymMatrix::SymMatrix(std::size_t dim, std::vector<double> entries)
    : dim_(dim), data_(std::move(entries))
{
    if (dim == 0) {
        throw std::invalid_argument("SymMatrix: dimension must be >= 1");
    }
    if (data_.size() != dim * dim) {
        throw std::invalid_argument("SymMatrix: entries length != dim*dim");
    }
    require_finite(data_, "SymMatrix");
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i + 1; j < dim; ++j) {
            const double a = data_[i * dim + j];
            const double b = data_[j * dim + i];
            if (!approx_equal(a, b)) {
                throw std::invalid_argument("SymMatrix: input is not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
            const double avg = 0.5 * (a + b);
            data_[i * dim + j] = avg;
            data_[j * dim + i] = avg;
        }
    }
}

SymMatrix SymMatrix::identity(std::size_t dim)
{
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m.data_[i * dim + i] = 1.0;
    }
    return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag)
{
    require_finite(diag, "SymMatrix::diagonal");
    SymMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m.data_[i * diag.size() + i] = diag[i];
    }
    return m;
}

SymMatrix SymMatrix::from_upper(const DenseMatrix& m)
{
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("SymMatrix::from_upper: matrix is not square");
    }
    const std::size_t n = m.rows();
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            s.data_[i * n + j] = m(i, j);
            s.data_[j * n + i] = m(i, j);
        }
    }
    return s;
}

double SymMatrix::trace() const
{
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        t += data_[i * dim_ + i];
    }
    return t;
}

double SymMatrix::frobenius_norm() const
{
    double s = 0.0;
    for (double v : data_) {
        s += v * v;
    }
    return std::sqrt(s);
}

bool SymMatrix::is_identity() const
{
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            if (data_[i * dim_ + j] != (i == j ? 1.0 : 0.0)) {
                return false;
            }
        }
    }
    return true;
}

SymMatrix sym_sqrt(const SymMatrix& m)
{
    const EigenDecomposition ed = eigh(m);
    const std::size_t n = m.dim();
    std::vector<double> root(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = ed.eigenvalues[k];
        if (lambda < -1e-12) {
            throw NumericalError("sym_sqrt: matrix is not positive semidefinite (eigenvalue " +
                                     std::to_string(lambda) + ")",
                                 lambda);
        }
        root[k] = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
    }
    // R = Q diag(root) Q^T, upper triangle only.
    const DenseMatrix& q = ed.eigenvectors;
    std::vector<double> r(n * n, 0.0);
    std::vector<double> qi(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            qi[k] = q(i, k) * root[k];
        }
        for (std::size_t j = i; j < n; ++j) {
            r[i * n + j] = dot(qi.data(), q.row(j).data(), n);
        }
    }
    return SymMatrix::from_upper(DenseMatrix(n, n, std::move(r)));
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("multiply: inner dimensions differ");
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> c(m * n, 0.0);
    const auto bd = b.data();
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c.data() + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) {
                continue;
            }
            const double* bl = bd.data() + l * n;
            for (std::size_t j = 0; j < n; ++j) {
                ci[j] += ail * bl[j];
            }
        }
    }
    return DenseMatrix(m, n, std::move(c));
}

DenseMatrix multiply(const SymMatrix& a, const DenseMatrix& b)
{
    return multiply(a.to_dense(), b);
}

SymMatrix sample_covariance(const SymMatrix& t_sqrt, const DenseMatrix& x)
{
    if (t_sqrt.dim() != x.rows()) {
        throw std::invalid_argument("sample_covariance: t_sqrt is " + std::to_string(t_sqrt.dim()) +
                                    "x" + std::to_string(t_sqrt.dim()) + " but X has " +
                                    std::to_string(x.rows()) + " rows");
    }
    const std::size_t p = x.rows();
    const std::size_t n = x.cols();
    const DenseMatrix y = t_sqrt.is_identity() ? x : multiply(t_sqrt, x);

    const double inv_n = 1.0 / static_cast<double>(n);
    const auto yd = y.data();
    std::vector<double> a(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        const double* yi = yd.data() + i * n;
        for (std::size_t j = i; j < p; ++j) {
            a[i * p + j] = dot(yi, yd.data() + j * n, n) * inv_n;
        }
    }
    return SymMatrix::from_upper(DenseMatrix(p, p, std::move(a)));
}

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("frobenius_distance: shape mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::vector<double> least_squares(const DenseMatrix& a, std::span<const double> b)
{
    const std::size_t m = a.rows(), n = a.cols();
    if (m < n) {
        throw std::invalid_argument("least_squares: need rows >= cols");
    }
    if (b.size() != m) {
        throw std::invalid_argument("least_squares: rhs length != rows");
    }
    // Column-major working copy.
    std::vector<double> r(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            r[j * m + i] = a(i, j);
        }
    }
    std::vector<double> rhs(b.begin(), b.end());

    for (std::size_t k = 0; k < n; ++k) {
        double* col = r.data() + k * m;
        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            norm = std::hypot(norm, col[i]);
        }
        if (norm == 0.0) {
            throw NumericalError("least_squares: rank-deficient design at column " +
                                 std::to_string(k));
        }
        const double alpha = col[k] > 0 ? -norm : norm;
        // v = x - alpha e1, stored in col[k..m)
        col[k] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            vnorm2 += col[i] * col[i];
        }
        auto reflect = [&](double* target) {
            double s = 0.0;
            for (std::size_t i = k; i < m; ++i) {
                s += col[i] * target[i];
            }
            s = 2.0 * s / vnorm2;
            for (std::size_t i = k; i < m; ++i) {
                target[i] -= s * col[i];
            }
        };
        for (std::size_t j = k + 1; j < n; ++j) {
            reflect(r.data() + j * m);
        }
        reflect(rhs.data());
        // Diagonal of R is alpha; the reflector is no longer needed.
        col[k] = alpha;
    }

    std::vector<double> x(n, 0.0);
    for (std::size_t kk = n; kk-- > 0;) {
        double s = rhs[kk];
        for (std::size_t j = kk + 1; j < n; ++j) {
            s -= r[j * m + kk] * x[j];
        }
        x[kk] = s / r[kk * m + kk];
    }
    return x;
}

} // namespace spectra
