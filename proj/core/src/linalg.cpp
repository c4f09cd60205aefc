#include "lyap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace lyap {

namespace {

constexpr int kMaxJacobiSweeps = 80;


template <Scalar T>
double norm2(const std::vector<T>& v) {
    double s = 0.0;
    for (const T& x : v) s += std::norm(x);
    return s;
}

template <Scalar T>
T inner(const std::vector<T>& a, const std::vector<T>& b) {
    T s{};
    for (std::size_t k = 0; k < a.size(); ++k) s += conj_of(a[k]) * b[k];
    return s;
}

// Power of two close to the largest entry, so that squaring cannot overflow
// and rescaling is exact.
template <Scalar T>
double exact_scale(const Matrix<T>& m) {
    double big = 0.0;
    for (const T& v : m.entries()) big = std::max(big, std::abs(v));
    if (big == 0.0) return 1.0;
    int e = 0;
    std::frexp(big, &e);
    return std::ldexp(1.0, e);
}

template <Scalar T>
void complete_orthonormal(std::vector<std::vector<T>>& cols, const std::vector<bool>& have) {
    const std::size_t d = cols.size();
    std::size_t candidate = 0;
    for (std::size_t k = 0; k < d; ++k) {
        if (have[k]) continue;
        for (; candidate < d; ++candidate) {
            std::vector<T> v(d, T{});
            v[candidate] = T{1};
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t i = 0; i < d; ++i) {
                    if (i == k || (!have[i] && i > k)) continue;
                    const T r = inner(cols[i], v);
                    for (std::size_t t = 0; t < d; ++t) v[t] -= r * cols[i][t];
                }
            const double nv = std::sqrt(norm2(v));
            if (nv > 0.5) {
                for (T& x : v) x /= nv;
                cols[k] = std::move(v);
                ++candidate;
                break;
            }
        }
    }
}

template <Scalar T>
SvdResult<T> jacobi_svd(const Matrix<T>& m, bool want_vectors) {
    if (m.empty()) throw DomainError("svd of an empty matrix");
    if (!m.is_finite()) throw NonFiniteError("svd input has non-finite entries");
    const std::size_t d = m.dim();
    const double scale = exact_scale(m);
    const double eps = std::numeric_limits<double>::epsilon();

    // a[c] is column c of M * V; v[c] is column c of V.
    std::vector<std::vector<T>> a(d, std::vector<T>(d));
    std::vector<std::vector<T>> v(d, std::vector<T>(d, T{}));
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t r = 0; r < d; ++r) a[c][r] = m(r, c) / scale;
        v[c][c] = T{1};
    }

    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) {
                const double alpha = norm2(a[i]);
                const double beta = norm2(a[j]);
                const T gamma = inner(a[i], a[j]);
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const T phase_conj = conj_of(gamma / g);
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t =
                    std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < d; ++k) {
                    const T ai = a[i][k];
                    const T aj = a[j][k] * phase_conj;
                    a[i][k] = c * ai - s * aj;
                    a[j][k] = s * ai + c * aj;
                }
                if (want_vectors)
                    for (std::size_t k = 0; k < d; ++k) {
                        const T vi = v[i][k];
                        const T vj = v[j][k] * phase_conj;
                        v[i][k] = c * vi - s * vj;
                        v[j][k] = s * vi + c * vj;
                    }
            }
        if (!rotated) break;
    }

    std::vector<double> sigma(d);
    for (std::size_t c = 0; c < d; ++c) sigma[c] = std::sqrt(norm2(a[c]));
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    SvdResult<T> out;
    out.singular_values.resize(d);
    for (std::size_t k = 0; k < d; ++k) out.singular_values[k] = sigma[order[k]] * scale;
    if (!want_vectors) return out;

    std::vector<std::vector<T>> ucols(d, std::vector<T>(d, T{}));
    std::vector<std::vector<T>> vcols(d);
    std::vector<bool> have(d, false);
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t src = order[k];
        vcols[k] = v[src];
        if (sigma[src] > 0.0) {
            for (std::size_t r = 0; r < d; ++r) ucols[k][r] = a[src][r] / sigma[src];
            have[k] = true;
        }
    }
    complete_orthonormal(ucols, have);

    out.left = Matrix<T>(d);
    out.right = Matrix<T>(d);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t r = 0; r < d; ++r) {
            out.left(r, c) = ucols[c][r];
            out.right(r, c) = vcols[c][r];
        }
    return out;
}

// Closed-form spectral norm of a real 2x2 matrix.
double norm_2x2(double a, double b, double c, double d) {
    return 0.5 * (std::hypot(a + d, c - b) + std::hypot(a - d, b + c));
}

template <Scalar T>
T lu_determinant(std::vector<T> a, std::size_t d) {
    T det{1};
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t piv = k;
        double best = std::abs(a[k * d + k]);
        for (std::size_t r = k + 1; r < d; ++r)
            if (std::abs(a[r * d + k]) > best) {
                best = std::abs(a[r * d + k]);
                piv = r;
            }
        if (best == 0.0) return T{0};
        if (piv != k) {
            for (std::size_t c = 0; c < d; ++c) std::swap(a[k * d + c], a[piv * d + c]);
            det = -det;
        }
        const T pivot = a[k * d + k];
        det *= pivot;
        for (std::size_t r = k + 1; r < d; ++r) {
            const T f = a[r * d + k] / pivot;
            if (f == T{0}) continue;
            for (std::size_t c = k + 1; c < d; ++c) a[r * d + c] -= f * a[k * d + c];
        }
    }
    return det;
}

}  // namespace

template <Scalar T>
SvdResult<T> svd(const Matrix<T>& m) {
    return jacobi_svd(m, true);
}

template <Scalar T>
std::vector<double> singular_values(const Matrix<T>& m) {
    return jacobi_svd(m, false).singular_values;
}

template <Scalar T>
double operator_norm(const Matrix<T>& m) {
    if constexpr (std::is_same_v<T, double>) {
        if (m.dim() == 1) {
            if (!m.is_finite()) throw NonFiniteError("operator_norm input has non-finite entries");
            return std::abs(m(0, 0));
        }
        if (m.dim() == 2) {
            if (!m.is_finite()) throw NonFiniteError("operator_norm input has non-finite entries");
            return norm_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
        }
    }
    return singular_values(m).front();
}

template <Scalar T>
bool is_invertible(const Matrix<T>& m) {
    if constexpr (std::is_same_v<T, double>) {
        if (m.dim() == 1) return m.is_finite() && m(0, 0) != 0.0;
        if (m.dim() == 2) {
            if (!m.is_finite()) return false;
            const double s1 = norm_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
            if (s1 == 0.0) return false;
            const double det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
            return (det / s1) / s1 > kInvertibilityThreshold;
        }
    }
    if (!m.is_finite()) return false;
    const auto s = singular_values(m);
    return s.front() > 0.0 && s.back() / s.front() > kInvertibilityThreshold;
}

template <Scalar T>
T determinant(const Matrix<T>& m) {
    if (m.empty()) throw DomainError("determinant of an empty matrix");
    const std::size_t d = m.dim();
    if (d == 1) return m(0, 0);
    if (d == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return lu_determinant(std::vector<T>(m.entries().begin(), m.entries().end()), d);
}

template <Scalar T>
Matrix<T> inverse(const Matrix<T>& m) {
    if (!is_invertible(m)) throw SingularMatrixError("matrix is not invertible");
    const std::size_t d = m.dim();
    Matrix<T> a = m;
    Matrix<T> inv = Matrix<T>::identity(d);
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < d; ++r)
            if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
        if (piv != k)
            for (std::size_t c = 0; c < d; ++c) {
                std::swap(a(k, c), a(piv, c));
                std::swap(inv(k, c), inv(piv, c));
            }
        const T p = a(k, k);
        for (std::size_t c = 0; c < d; ++c) {
            a(k, c) /= p;
            inv(k, c) /= p;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == k) continue;
            const T f = a(r, k);
            if (f == T{0}) continue;
            for (std::size_t c = 0; c < d; ++c) {
                a(r, c) -= f * a(k, c);
                inv(r, c) -= f * inv(k, c);
            }
        }
    }
    return inv;
}

template <Scalar T>
QrResult<T> qr_positive(const Matrix<T>& m) {
    if (m.empty()) throw DomainError("qr of an empty matrix");
    if (!m.is_finite()) throw NonFiniteError("qr input has non-finite entries");
    const std::size_t d = m.dim();
    std::vector<std::vector<T>> q(d, std::vector<T>(d));
    Matrix<T> r(d);
    double max_col = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += std::norm(m(k, c));
        max_col = std::max(max_col, std::sqrt(s));
    }
    for (std::size_t c = 0; c < d; ++c) {
        std::vector<T> v(d);
        for (std::size_t k = 0; k < d; ++k) v[k] = m(k, c);
        // Modified Gram-Schmidt, applied twice.
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i < c; ++i) {
                const T proj = inner(q[i], v);
                r(i, c) += proj;
                for (std::size_t k = 0; k < d; ++k) v[k] -= proj * q[i][k];
            }
        const double nv = std::sqrt(norm2(v));
        if (!(nv > kInvertibilityThreshold * max_col))
            throw SingularMatrixError("qr_positive: rank deficiency at pivot " + std::to_string(c) +
                                      " (orthogonalized column norm " + std::to_string(nv) + ")");
        r(c, c) = T{nv};
        for (std::size_t k = 0; k < d; ++k) q[c][k] = v[k] / nv;
    }
    Matrix<T> qm(d);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t k = 0; k < d; ++k) qm(k, c) = q[c][k];
    return {std::move(qm), std::move(r)};
}

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::size_t out = 1;
    for (std::size_t i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

CompoundIndex::CompoundIndex(std::size_t d, std::size_t p) : d_(d), p_(p) {
    if (d == 0 || p == 0 || p > d)
        throw DomainError("compound index requires 1 <= p <= d (d=" + std::to_string(d) +
                          ", p=" + std::to_string(p) + ")");
    basis_.reserve(binomial(d, p));
    std::vector<std::size_t> cur(p);
    std::iota(cur.begin(), cur.end(), std::size_t{0});
    while (true) {
        basis_.push_back(cur);
        std::size_t i = p;
        while (i > 0 && cur[i - 1] == d - p + (i - 1)) --i;
        if (i == 0) break;
        ++cur[i - 1];
        for (std::size_t k = i; k < p; ++k) cur[k] = cur[k - 1] + 1;
    }
}

template <Scalar T>
T minor_determinant(const Matrix<T>& m, const std::vector<std::size_t>& rows,
                    const std::vector<std::size_t>& cols) {
    const std::size_t p = rows.size();
    if (p == 0 || cols.size() != p) throw DomainError("minor needs equal, non-empty index sets");
    if (p == 1) return m(rows[0], cols[0]);
    if (p == 2)
        return m(rows[0], cols[0]) * m(rows[1], cols[1]) - m(rows[0], cols[1]) * m(rows[1], cols[0]);
    std::vector<T> sub(p * p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) sub[i * p + j] = m(rows[i], cols[j]);
    return lu_determinant(std::move(sub), p);
}

template <Scalar T>
Matrix<T> exterior_power(const Matrix<T>& m, std::size_t p) {
    const std::size_t d = m.dim();
    if (p == 0 || p > d)
        throw DomainError("exterior_power: p=" + std::to_string(p) + " outside [1, " +
                          std::to_string(d) + "]");
    if (p == 1) return m;
    if (p == d) {
        Matrix<T> out(1);
        out(0, 0) = determinant(m);
        return out;
    }
    const CompoundIndex idx(d, p);
    Matrix<T> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = minor_determinant(m, idx[i], idx[j]);
    return out;
}

#define LYAP_INSTANTIATE_LINALG(T)                                                             \
    template SvdResult<T> svd<T>(const Matrix<T>&);                                            \
    template std::vector<double> singular_values<T>(const Matrix<T>&);                         \
    template double operator_norm<T>(const Matrix<T>&);                                        \
    template bool is_invertible<T>(const Matrix<T>&);                                          \
    template T determinant<T>(const Matrix<T>&);                                               \
    template Matrix<T> inverse<T>(const Matrix<T>&);                                           \
    template QrResult<T> qr_positive<T>(const Matrix<T>&);                                     \
    template Matrix<T> exterior_power<T>(const Matrix<T>&, std::size_t);                       \
    template T minor_determinant<T>(const Matrix<T>&, const std::vector<std::size_t>&,         \
                                    const std::vector<std::size_t>&);

LYAP_INSTANTIATE_LINALG(double)
LYAP_INSTANTIATE_LINALG(std::complex<double>)

#undef LYAP_INSTANTIATE_LINALG

}  // namespace lyap
