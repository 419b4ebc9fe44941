#pragma once

/**
 * @file specmat.hpp
 * @brief Dense real matrices, the symmetric eigensolver and sample
 *        covariance construction A = n^-1 T^{1/2} X X^T T^{1/2}.
 *
 * Storage is row-major. SymMatrix keeps a full square buffer but every
 * constructor mirrors one triangle, so entry(i,j) == entry(j,i) bit for bit.
 * All types are immutable after construction and safe to share across
 * threads.
 */

#include <cstddef>
#include <span>
#include <vector>

namespace spectra {

class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const
    {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<const double> data() const noexcept { return data_; }

    DenseMatrix transpose() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

class SymMatrix {
public:
    /// Zero matrix of the given dimension.
    explicit SymMatrix(std::size_t dim);

    /// Full row-major entries; must be symmetric to |a_ij - a_ji| <= 1e-12 + 1e-9|a_ij|.
    /// The stored matrix is the average of the input with its transpose.
    SymMatrix(std::size_t dim, std::vector<double> entries);

    static SymMatrix identity(std::size_t dim);
    static SymMatrix diagonal(std::span<const double> diag);
    /// Upper triangle of `m` is mirrored; no symmetry check.
    static SymMatrix from_upper(const DenseMatrix& m);

    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    std::span<const double> data() const noexcept { return data_; }

    double trace() const;
    double frobenius_norm() const;
    bool is_identity() const;

    DenseMatrix to_dense() const { return DenseMatrix(dim_, dim_, data_); }

private:
    std::size_t dim_;
    std::vector<double> data_;
};

struct EigenDecomposition {
    std::vector<double> eigenvalues;   // ascending
    DenseMatrix eigenvectors;          // column k pairs with eigenvalues[k]
};

/// Householder tridiagonalization + implicit-shift QL. Throws
/// ConvergenceError if any off-diagonal fails to deflate within 50*dim sweeps.
EigenDecomposition eigh(const SymMatrix& m);

/// Eigenvalues only (ascending); skips eigenvector accumulation.
std::vector<double> eigvalsh(const SymMatrix& m);

/// Principal square root of a PSD matrix. Eigenvalues in [-1e-12, 0) are
/// clamped to zero; anything more negative is rejected.
SymMatrix sym_sqrt(const SymMatrix& m);

/// (1/n) t_sqrt X X^T t_sqrt for a p x n data matrix X.
SymMatrix sample_covariance(const SymMatrix& t_sqrt, const DenseMatrix& x);

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix multiply(const SymMatrix& a, const DenseMatrix& b);

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b);

/// Minimum-norm-residual solution of A x = b via Householder QR (rows >= cols).
std::vector<double> least_squares(const DenseMatrix& a, std::span<const double> b);

/// |a - b| <= atol + rtol |b|
inline bool approx_equal(double a, double b, double atol = 1e-12, double rtol = 1e-9)
{
    const double d = a - b;
    return (d < 0 ? -d : d) <= atol + rtol * (b < 0 ? -b : b);
}

} // namespace spectra
