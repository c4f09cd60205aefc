#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "lyap/error.hpp"

namespace lyap {

template <typename T>
struct is_complex : std::false_type {};
template <typename R>
struct is_complex<std::complex<R>> : std::true_type {};

template <typename T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, std::complex<double>>;

inline double conj_of(double v) { return v; }
inline std::complex<double> conj_of(std::complex<double> v) { return std::conj(v); }

inline bool is_finite_scalar(double v) { return std::isfinite(v); }
inline bool is_finite_scalar(std::complex<double> v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

/// Square dense matrix, row-major. Entries supplied through the public
/// constructors must be finite.
template <Scalar T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;

    explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, T{}) {
        if (dim == 0) throw DomainError("matrix dimension must be at least 1");
    }

    Matrix(std::size_t dim, std::vector<T> entries) : dim_(dim), data_(std::move(entries)) {
        if (dim == 0) throw DomainError("matrix dimension must be at least 1");
        if (data_.size() != dim * dim)
            throw DomainError("expected " + std::to_string(dim * dim) + " entries, got " +
                              std::to_string(data_.size()));
        if (!is_finite()) throw NonFiniteError("matrix has non-finite entries");
    }

    /// Row-major nested initializer: Matrix{{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<T>> rows) : dim_(rows.size()) {
        if (dim_ == 0) throw DomainError("matrix dimension must be at least 1");
        data_.reserve(dim_ * dim_);
        for (const auto& row : rows) {
            if (row.size() != dim_) throw DomainError("matrix rows must have equal length d");
            data_.insert(data_.end(), row.begin(), row.end());
        }
        if (!is_finite()) throw NonFiniteError("matrix has non-finite entries");
    }

    static Matrix identity(std::size_t dim) {
        Matrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = T{1};
        return m;
    }

    static Matrix diagonal(std::span<const T> values) {
        Matrix m(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
        if (!m.is_finite()) throw NonFiniteError("matrix has non-finite entries");
        return m;
    }

    static Matrix diagonal(std::initializer_list<T> values) {
        return diagonal(std::span<const T>(values.begin(), values.size()));
    }

    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return dim_ == 0; }

    T& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * dim_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const noexcept {
        return data_[row * dim_ + col];
    }

    std::span<const T> entries() const noexcept { return data_; }

    bool is_finite() const noexcept {
        for (const T& v : data_)
            if (!is_finite_scalar(v)) return false;
        return true;
    }

    /// Conjugate transpose.
    Matrix adjoint() const {
        Matrix out(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) out(j, i) = conj_of((*this)(i, j));
        return out;
    }

    Matrix& operator*=(T s) noexcept {
        for (T& v : data_) v *= s;
        return *this;
    }
    Matrix& operator/=(T s) noexcept {
        for (T& v : data_) v /= s;
        return *this;
    }
    Matrix& operator+=(const Matrix& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        a.check_same(b);
        const std::size_t d = a.dim_;
        Matrix out(d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) {
                const T aik = a(i, k);
                for (std::size_t j = 0; j < d; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }
    friend Matrix operator*(Matrix a, T s) { return a *= s; }
    friend Matrix operator*(T s, Matrix a) { return a *= s; }
    friend Matrix operator/(Matrix a, T s) { return a /= s; }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

    /// Matrix-vector product.
    std::vector<T> apply(std::span<const T> v) const {
        if (v.size() != dim_) throw DomainError("vector length does not match matrix dimension");
        std::vector<T> out(dim_, T{});
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) out[i] += (*this)(i, j) * v[j];
        return out;
    }

private:
    void check_same(const Matrix& o) const {
        if (o.dim_ != dim_) throw DomainError("matrix dimensions differ");
    }

    std::size_t dim_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

}  // namespace lyap
