#pragma once

#include <complex>
#include <vector>

#include "longnbt/common.hpp"

namespace longnbt {

using cdouble = std::complex<double>;

/// Row-major dense matrix, just enough for the small solves and oracles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(index_t rows, index_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(std::size_t(rows * cols), fill) {}

    static DenseMatrix identity(index_t n) {
        DenseMatrix m(n, n);
        for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }

    double& operator()(index_t i, index_t j) { return data_[std::size_t(i * cols_ + j)]; }
    double operator()(index_t i, index_t j) const { return data_[std::size_t(i * cols_ + j)]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    DenseMatrix transposed() const;
    double frobenius_norm() const;
    double max_abs() const;

private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x);

/// Solve a x = b by LU with partial pivoting; throws on (numerical) singularity.
std::vector<double> lu_solve(DenseMatrix a, std::vector<double> b);

/// All eigenvalues of a real square matrix: Householder reduction to
/// Hessenberg form followed by Francis double-shift QR. Conjugate pairs
/// come out adjacent.
std::vector<cdouble> dense_eigenvalues(DenseMatrix a);

/// Eigenvalues of an upper Hessenberg matrix (contents destroyed).
std::vector<cdouble> hessenberg_eigenvalues(DenseMatrix h);

/// One eigenvector of an upper Hessenberg matrix for a known eigenvalue,
/// by shifted inverse iteration. start_index varies the deterministic
/// start so equal eigenvalues can be given distinct starts.
std::vector<cdouble> hessenberg_eigenvector(const DenseMatrix& h, cdouble lambda,
                                            int start_index = 0);

struct SymmetricEigen {
    std::vector<double> values;        // descending
    std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
};

/// Cyclic Jacobi for symmetric matrices; a is symmetrized defensively.
SymmetricEigen symmetric_eigen(DenseMatrix a);

struct DenseSvd {
    std::vector<double> singular_values;       // descending, >= 0
    std::vector<std::vector<double>> left;     // length-n vectors
    std::vector<std::vector<double>> right;    // length-m vectors
};

/// SVD of a small dense matrix through the Jacobi eigendecomposition of
/// a a^T (oracle-grade; intended for n <= a few hundred).
DenseSvd dense_svd(const DenseMatrix& a, index_t max_rank = -1);

}  // namespace longnbt
