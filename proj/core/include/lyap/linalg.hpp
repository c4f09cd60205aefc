#pragma once

// Small dense linear algebra over real and complex scalars: SVD, QR with a
// positive-diagonal convention, spectral norm, determinants and compound
// (exterior-power) matrices. Everything here is a pure function.

#include <cstddef>
#include <utility>
#include <vector>

#include "lyap/matrix.hpp"

namespace lyap {

/// `sigma_d / sigma_1` must exceed this for a matrix to count as invertible.
inline constexpr double kInvertibilityThreshold = 1e-13;

/// M = left * diag(singular_values) * right^*, singular values non-increasing.
template <Scalar T>
struct SvdResult {
    std::vector<double> singular_values;
    Matrix<T> left;
    Matrix<T> right;
};

/// One-sided (Hestenes) Jacobi SVD. Throws NonFiniteError on NaN/Inf input.
template <Scalar T>
SvdResult<T> svd(const Matrix<T>& m);

/// Singular values only (same algorithm as svd).
template <Scalar T>
std::vector<double> singular_values(const Matrix<T>& m);

/// Spectral norm sigma_1(M).
template <Scalar T>
double operator_norm(const Matrix<T>& m);

/// sigma_d / sigma_1 > kInvertibilityThreshold.
template <Scalar T>
bool is_invertible(const Matrix<T>& m);

/// LU with partial pivoting.
template <Scalar T>
T determinant(const Matrix<T>& m);

/// Inverse by Gauss-Jordan; throws SingularMatrixError below the threshold.
template <Scalar T>
Matrix<T> inverse(const Matrix<T>& m);

template <Scalar T>
struct QrResult {
    Matrix<T> q;
    Matrix<T> r;
};

/// M = Q R with Q unitary and R upper triangular with strictly positive real
/// diagonal. Throws SingularMatrixError naming the first pivot whose
/// orthogonalized column falls below the invertibility threshold.
template <Scalar T>
QrResult<T> qr_positive(const Matrix<T>& m);

/// Lexicographic basis of the size-p subsets of {0, ..., d-1}. Index sets are
/// zero-based here; documentation writes them one-based ({12, 13, 23}).
class CompoundIndex {
public:
    CompoundIndex(std::size_t d, std::size_t p);

    std::size_t d() const noexcept { return d_; }
    std::size_t p() const noexcept { return p_; }
    std::size_t size() const noexcept { return basis_.size(); }
    const std::vector<std::vector<std::size_t>>& basis() const noexcept { return basis_; }
    const std::vector<std::size_t>& operator[](std::size_t i) const { return basis_[i]; }

private:
    std::size_t d_;
    std::size_t p_;
    std::vector<std::vector<std::size_t>> basis_;
};

std::size_t binomial(std::size_t n, std::size_t k);

/// Compound matrix of p x p minors in the CompoundIndex basis.
template <Scalar T>
Matrix<T> exterior_power(const Matrix<T>& m, std::size_t p);

/// Determinant of the submatrix with the given (sorted) rows and columns.
template <Scalar T>
T minor_determinant(const Matrix<T>& m, const std::vector<std::size_t>& rows,
                    const std::vector<std::size_t>& cols);

}  // namespace lyap
