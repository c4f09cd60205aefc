#pragma once

// Analytic GL(d) cocycles over torus shifts x -> x + omega, overflow-safe
// orbit products and finite-scale Lyapunov exponents by uniform-grid
// quadrature.
//
// Product convention: A^(n)_x = A(x + n w) ... A(x + 2w) A(x + w).
//
// Harmonics on T^nu: for nu > 1 every family uses the per-axis sums
//   C_k(x) = sum_a cos(2 pi k x_a),  S_k(x) = sum_a sin(2 pi k x_a),
// which reduce to cos(2 pi k x), sin(2 pi k x) on the circle.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lyap/linalg.hpp"
#include "lyap/matrix.hpp"
#include "lyap/parallel.hpp"

namespace lyap {

inline constexpr std::size_t kMaxTorusDim = 4;

/// Point of T^nu with coordinates in [0, 1).
class TorusPoint {
public:
    TorusPoint() = default;
    explicit TorusPoint(std::span<const double> coords);
    static TorusPoint on_circle(double x) { return TorusPoint(std::span<const double>(&x, 1)); }

    std::size_t nu() const noexcept { return nu_; }
    double operator[](std::size_t i) const noexcept { return coords_[i]; }
    std::span<const double> coords() const noexcept { return {coords_.data(), nu_}; }

private:
    friend class ShiftBase;
    std::array<double, kMaxTorusDim> coords_{};
    std::size_t nu_ = 0;
};

/// Torus rotation by omega with a declared Diophantine exponent a > 1.
class ShiftBase {
public:
    /// Rejects components outside (0, 1) and components that are rational to
    /// working precision (||q w|| < 1e-15 for some q <= 1e6).
    explicit ShiftBase(std::vector<double> omega, double dio_exponent = 2.0);

    /// (sqrt(5) - 1) / 2 on the circle.
    static ShiftBase golden(double dio_exponent = 2.0);
    /// Golden mean for nu = 1, (sqrt 2 - 1, sqrt 3 - 1) for nu = 2.
    static ShiftBase standard(std::size_t nu, double dio_exponent = 2.0);

    std::size_t nu() const noexcept { return omega_.size(); }
    const std::vector<double>& omega() const noexcept { return omega_; }
    double dio_exponent() const noexcept { return dio_exponent_; }

    /// x + steps * omega (mod 1, componentwise).
    TorusPoint advance(const TorusPoint& x, std::int64_t steps) const;

private:
    std::vector<double> omega_;
    double dio_exponent_;
};

/// Distance to the nearest integer.
double distance_to_integer(double v);

/// Ordered grid of parameter values with metric |E - E'|.
struct ParameterGrid {
    std::vector<double> values;

    static ParameterGrid single(double e) { return {{e}}; }
    static ParameterGrid linspace(double lo, double hi, std::size_t count);
    static double distance(double e, double e2) { return std::abs(e - e2); }
};

/// A(x, E) = M.
struct ConstantCocycle {
    RealMatrix matrix;
};

/// A(x, E) = diag(exp(amplitude_i * C_1(x) + slope_i * E)).
struct DiagonalExpCocycle {
    std::vector<double> amplitude;
    std::vector<double> slope;
};

/// A(x, E) = C0 + sum_{k=1..K} (Ck * C_k(x) + Sk * S_k(x)) + E * B.
struct TrigPolyCocycle {
    RealMatrix constant_term;
    std::vector<RealMatrix> cos_terms;
    std::vector<RealMatrix> sin_terms;
    RealMatrix energy_term;
};

/// A(x, E) = [[coupling * v(x) - E, -1], [1, 0]] with
/// v(x) = sum_k (cos_coeffs[k-1] C_k(x) + sin_coeffs[k-1] S_k(x)).
/// The default sampling function is 2 cos(2 pi x).
struct SchrodingerCocycle {
    double coupling = 1.0;
    std::vector<double> cos_coeffs{2.0};
    std::vector<double> sin_coeffs{};
};

using CocycleSpec =
    std::variant<ConstantCocycle, DiagonalExpCocycle, TrigPolyCocycle, SchrodingerCocycle>;

std::string kind_name(const CocycleSpec& spec);

/// Analytic family (x, E) -> A(x, E) in GL(d) over a shift base.
class CocycleFamily {
public:
    /// Validates shapes and checks invertibility of A on the uniform grid of
    /// `validation_grid` points per axis for every E in `params`.
    static CocycleFamily create(ShiftBase base, CocycleSpec spec, ParameterGrid params,
                                double holder_exponent = 1.0, std::size_t validation_grid = 64);

    const ShiftBase& base() const noexcept { return base_; }
    const CocycleSpec& spec() const noexcept { return spec_; }
    const ParameterGrid& params() const noexcept { return params_; }
    std::size_t dim() const noexcept { return dim_; }
    double holder_exponent() const noexcept { return holder_exponent_; }
    std::string kind() const { return kind_name(spec_); }

    /// A(x, E) without the invertibility check.
    RealMatrix raw(const TorusPoint& x, double e) const;

private:
    CocycleFamily(ShiftBase base, CocycleSpec spec, ParameterGrid params, double beta0,
                  std::size_t dim);

    ShiftBase base_;
    CocycleSpec spec_;
    ParameterGrid params_;
    double holder_exponent_;
    std::size_t dim_;
};

/// A(x, E); throws SingularMatrixError carrying (x, E) when A fails the
/// invertibility threshold.
RealMatrix evaluate(const CocycleFamily& fam, const TorusPoint& x, double e);

/// Product represented as exp(log_scale) * normalized, ||normalized|| = 1.
struct ScaledProduct {
    RealMatrix normalized;
    double log_scale = 0.0;
    std::size_t length = 0;

    /// Starts from the identity (length 0).
    static ScaledProduct identity(std::size_t dim);
    /// Left-multiplies by `factor` and renormalizes by the spectral norm.
    void push(const RealMatrix& factor);
    /// log ||product||.
    double log_norm() const noexcept { return log_scale; }
};

ScaledProduct product_orbit(const CocycleFamily& fam, const TorusPoint& x, double e, std::size_t n);

/// (1/n) log sigma_{j,n}(x), j = 1..d, from compound-cocycle top growth.
std::vector<double> log_singular_profile(const CocycleFamily& fam, const TorusPoint& x, double e,
                                         std::size_t n);

/// log ||Lambda^p A^(n)_x|| for p = 1..d, for every n in `scales` (strictly
/// increasing). One orbit pass serves all scales since A^(n)_x is a prefix
/// of A^(N)_x for n < N. Result indexed [scale][p-1].
std::vector<std::vector<double>> compound_log_norms(const CocycleFamily& fam, const TorusPoint& x,
                                                    double e, std::span<const std::size_t> scales);

/// Row-major-by-axis uniform grid x_k = k / M (M^nu points).
std::vector<TorusPoint> torus_grid(std::size_t nu, std::size_t grid_size);

/// For every scale and grid point, log ||Lambda^p A^(n)_x|| / n, p = 1..d.
/// Result indexed [scale][point][p-1].
std::vector<std::vector<std::vector<double>>> compound_samples(
    const CocycleFamily& fam, double e, std::span<const std::size_t> scales, std::size_t grid_size,
    const ExecutionOptions& exec = {});

/// lambda_{j,n}(E), j = 1..d, as the pairwise-summed grid average of the
/// singular profile.
std::vector<double> finite_scale_exponents(const CocycleFamily& fam, double e, std::size_t n,
                                           std::size_t grid_size, const ExecutionOptions& exec = {});

/// finite_scale_exponents for several scales from one orbit pass per point.
std::vector<std::vector<double>> finite_scale_ladder(const CocycleFamily& fam, double e,
                                                     std::span<const std::size_t> scales,
                                                     std::size_t grid_size,
                                                     const ExecutionOptions& exec = {});

/// Cross-check estimator: QR accumulation (sum of log diag R) averaged on the
/// grid. Agrees with finite_scale_exponents up to O(1/n) in general and
/// exactly for simultaneously diagonal families.
std::vector<double> qr_exponents(const CocycleFamily& fam, double e, std::size_t n,
                                 std::size_t grid_size, const ExecutionOptions& exec = {});

struct LyapunovTable {
    struct Row {
        double e;
        std::size_t n;
        std::vector<double> exponents;
    };
    std::vector<Row> rows;
    std::size_t grid_size = 0;
    std::string method;
};

LyapunovTable lyapunov_table(const CocycleFamily& fam, std::span<const std::size_t> scales,
                             std::size_t grid_size, const ExecutionOptions& exec = {});

/// Dyadic ladder n_min, 2 n_min, ..., up to n_max inclusive.
std::vector<std::size_t> dyadic_ladder(std::size_t n_min, std::size_t n_max);

struct DiophantineReport {
    double c_est;
    std::size_t worst_n;
};

/// min over 2 <= n <= n_max of ||n w|| n (log n)^a and its argmin. Accepts any
/// real w, rational ones included.
DiophantineReport diophantine_report(double omega, double dio_exponent, std::size_t n_max);
DiophantineReport diophantine_report(const ShiftBase& base, std::size_t n_max);

}  // namespace lyap
