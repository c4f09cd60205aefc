#include "lyap/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lyap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kRationalityDenominator = 1'000'000;
constexpr double kRationalityTolerance = 1e-15;

std::string describe_point(const TorusPoint& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < x.nu(); ++i) os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}

double cos_harmonic(const TorusPoint& x, std::size_t k) {
    double s = 0.0;
    for (std::size_t a = 0; a < x.nu(); ++a) s += std::cos(kTwoPi * static_cast<double>(k) * x[a]);
    return s;
}

double sin_harmonic(const TorusPoint& x, std::size_t k) {
    double s = 0.0;
    for (std::size_t a = 0; a < x.nu(); ++a) s += std::sin(kTwoPi * static_cast<double>(k) * x[a]);
    return s;
}

std::size_t spec_dim(const CocycleSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantCocycle>) {
                return s.matrix.dim();
            } else if constexpr (std::is_same_v<S, DiagonalExpCocycle>) {
                return s.amplitude.size();
            } else if constexpr (std::is_same_v<S, TrigPolyCocycle>) {
                return s.constant_term.dim();
            } else {
                return 2;
            }
        },
        spec);
}

void validate_spec(CocycleSpec& spec) {
    std::visit(
        [](auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantCocycle>) {
                if (s.matrix.empty()) throw DomainError("constant cocycle needs a matrix");
            } else if constexpr (std::is_same_v<S, DiagonalExpCocycle>) {
                if (s.amplitude.empty()) throw DomainError("diagonal-exp cocycle needs d >= 1");
                if (s.slope.empty()) s.slope.assign(s.amplitude.size(), 0.0);
                if (s.slope.size() != s.amplitude.size())
                    throw DomainError("diagonal-exp amplitude and slope lengths differ");
                for (double v : s.amplitude)
                    if (!std::isfinite(v)) throw NonFiniteError("diagonal-exp amplitude not finite");
                for (double v : s.slope)
                    if (!std::isfinite(v)) throw NonFiniteError("diagonal-exp slope not finite");
            } else if constexpr (std::is_same_v<S, TrigPolyCocycle>) {
                const std::size_t d = s.constant_term.dim();
                if (d == 0) throw DomainError("trig-poly cocycle needs a constant term");
                const std::size_t degree = std::max(s.cos_terms.size(), s.sin_terms.size());
                s.cos_terms.resize(degree, RealMatrix(d));
                s.sin_terms.resize(degree, RealMatrix(d));
                for (const auto& m : s.cos_terms)
                    if (m.dim() != d) throw DomainError("trig-poly coefficient dimension mismatch");
                for (const auto& m : s.sin_terms)
                    if (m.dim() != d) throw DomainError("trig-poly coefficient dimension mismatch");
                if (s.energy_term.empty()) s.energy_term = RealMatrix(d);
                if (s.energy_term.dim() != d)
                    throw DomainError("trig-poly energy term dimension mismatch");
            } else {
                if (!std::isfinite(s.coupling)) throw NonFiniteError("coupling not finite");
                for (double v : s.cos_coeffs)
                    if (!std::isfinite(v)) throw NonFiniteError("sampling coefficient not finite");
                for (double v : s.sin_coeffs)
                    if (!std::isfinite(v)) throw NonFiniteError("sampling coefficient not finite");
            }
        },
        spec);
}

}  // namespace

TorusPoint::TorusPoint(std::span<const double> coords) : nu_(coords.size()) {
    if (nu_ == 0 || nu_ > kMaxTorusDim)
        throw DomainError("torus dimension must be in [1, " + std::to_string(kMaxTorusDim) + "]");
    for (std::size_t i = 0; i < nu_; ++i) {
        if (!std::isfinite(coords[i])) throw NonFiniteError("torus coordinate not finite");
        coords_[i] = coords[i] - std::floor(coords[i]);
    }
}

double distance_to_integer(double v) {
    return std::abs(v - std::nearbyint(v));
}

namespace {
// ||q w|| with the product residual computed exactly by fma.
double multiple_distance(std::size_t q, double w) {
    const double qd = static_cast<double>(q);
    const double r = std::fma(qd, w, -std::nearbyint(qd * w));
    return std::abs(r - std::nearbyint(r));
}
}  // namespace

ShiftBase::ShiftBase(std::vector<double> omega, double dio_exponent)
    : omega_(std::move(omega)), dio_exponent_(dio_exponent) {
    if (omega_.empty() || omega_.size() > kMaxTorusDim)
        throw DomainError("shift dimension must be in [1, " + std::to_string(kMaxTorusDim) + "]");
    if (!(dio_exponent_ > 1.0) || !std::isfinite(dio_exponent_))
        throw DomainError("Diophantine exponent must be > 1");
    for (double w : omega_) {
        if (!(w > 0.0 && w < 1.0)) throw DomainError("shift components must lie in (0, 1)");
        for (std::size_t q = 1; q <= kRationalityDenominator; ++q)
            if (multiple_distance(q, w) < kRationalityTolerance) {
                std::ostringstream os;
                os.precision(17);
                os << "shift component " << w << " is rational to working precision (denominator "
                   << q << ")";
                throw DomainError(os.str());
            }
    }
}

ShiftBase ShiftBase::golden(double dio_exponent) {
    return ShiftBase({(std::sqrt(5.0) - 1.0) / 2.0}, dio_exponent);
}

ShiftBase ShiftBase::standard(std::size_t nu, double dio_exponent) {
    if (nu == 1) return golden(dio_exponent);
    if (nu == 2) return ShiftBase({std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0}, dio_exponent);
    throw DomainError("no standard shift for nu = " + std::to_string(nu));
}

TorusPoint ShiftBase::advance(const TorusPoint& x, std::int64_t steps) const {
    if (x.nu() != nu()) throw DomainError("torus point dimension does not match the shift");
    TorusPoint out;
    out.nu_ = x.nu();
    const double s = static_cast<double>(steps);
    for (std::size_t i = 0; i < out.nu_; ++i) {
        const double v = x[i] + s * omega_[i];
        out.coords_[i] = v - std::floor(v);
        if (out.coords_[i] >= 1.0) out.coords_[i] = 0.0;
    }
    return out;
}

ParameterGrid ParameterGrid::linspace(double lo, double hi, std::size_t count) {
    if (count == 0) throw DomainError("parameter grid needs at least one point");
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw NonFiniteError("parameter range not finite");
    ParameterGrid g;
    g.values.resize(count);
    if (count == 1) {
        g.values[0] = lo;
        return g;
    }
    for (std::size_t i = 0; i < count; ++i)
        g.values[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

std::string kind_name(const CocycleSpec& spec) {
    static constexpr const char* names[] = {"constant", "diagonal-exp", "trig-poly", "schrodinger"};
    return names[spec.index()];
}

CocycleFamily::CocycleFamily(ShiftBase base, CocycleSpec spec, ParameterGrid params, double beta0,
                             std::size_t dim)
    : base_(std::move(base)),
      spec_(std::move(spec)),
      params_(std::move(params)),
      holder_exponent_(beta0),
      dim_(dim) {}

CocycleFamily CocycleFamily::create(ShiftBase base, CocycleSpec spec, ParameterGrid params,
                                    double holder_exponent, std::size_t validation_grid) {
    validate_spec(spec);
    if (!(holder_exponent > 0.0 && holder_exponent <= 1.0))
        throw DomainError("Holder exponent beta0 must lie in (0, 1]");
    if (params.values.empty()) throw DomainError("parameter grid is empty");
    for (double e : params.values)
        if (!std::isfinite(e)) throw NonFiniteError("parameter value not finite");
    if (validation_grid == 0) throw DomainError("validation grid must be positive");
    const std::size_t d = spec_dim(spec);
    CocycleFamily fam(std::move(base), std::move(spec), std::move(params), holder_exponent, d);
    for (const TorusPoint& x : torus_grid(fam.base_.nu(), validation_grid))
        for (double e : fam.params_.values) (void)evaluate(fam, x, e);
    return fam;
}

RealMatrix CocycleFamily::raw(const TorusPoint& x, double e) const {
    return std::visit(
        [&](const auto& s) -> RealMatrix {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantCocycle>) {
                return s.matrix;
            } else if constexpr (std::is_same_v<S, DiagonalExpCocycle>) {
                const double h = cos_harmonic(x, 1);
                RealMatrix m(s.amplitude.size());
                for (std::size_t i = 0; i < s.amplitude.size(); ++i)
                    m(i, i) = std::exp(s.amplitude[i] * h + s.slope[i] * e);
                return m;
            } else if constexpr (std::is_same_v<S, TrigPolyCocycle>) {
                RealMatrix m = s.constant_term;
                for (std::size_t k = 1; k <= s.cos_terms.size(); ++k) {
                    m += s.cos_terms[k - 1] * cos_harmonic(x, k);
                    m += s.sin_terms[k - 1] * sin_harmonic(x, k);
                }
                m += s.energy_term * e;
                return m;
            } else {
                double v = 0.0;
                for (std::size_t k = 1; k <= s.cos_coeffs.size(); ++k)
                    v += s.cos_coeffs[k - 1] * cos_harmonic(x, k);
                for (std::size_t k = 1; k <= s.sin_coeffs.size(); ++k)
                    v += s.sin_coeffs[k - 1] * sin_harmonic(x, k);
                RealMatrix m(2);
                m(0, 0) = s.coupling * v - e;
                m(0, 1) = -1.0;
                m(1, 0) = 1.0;
                return m;
            }
        },
        spec_);
}

RealMatrix evaluate(const CocycleFamily& fam, const TorusPoint& x, double e) {
    RealMatrix m = fam.raw(x, e);
    if (!is_invertible(m)) {
        std::ostringstream os;
        os.precision(17);
        os << "cocycle matrix is singular at x=" << describe_point(x) << ", E=" << e;
        throw SingularMatrixError(os.str());
    }
    return m;
}

ScaledProduct ScaledProduct::identity(std::size_t dim) {
    return {RealMatrix::identity(dim), 0.0, 0};
}

void ScaledProduct::push(const RealMatrix& factor) {
    normalized = factor * normalized;
    const double s = operator_norm(normalized);
    if (!(s > 0.0) || !std::isfinite(s))
        throw SingularMatrixError("scaled product lost rank or overflowed");
    normalized /= s;
    log_scale += std::log(s);
    ++length;
}

ScaledProduct product_orbit(const CocycleFamily& fam, const TorusPoint& x, double e, std::size_t n) {
    if (n == 0) throw DomainError("product_orbit needs n >= 1");
    ScaledProduct prod = ScaledProduct::identity(fam.dim());
    for (std::size_t j = 1; j <= n; ++j)
        prod.push(evaluate(fam, fam.base().advance(x, static_cast<std::int64_t>(j)), e));
    return prod;
}

std::vector<std::vector<double>> compound_log_norms(const CocycleFamily& fam, const TorusPoint& x,
                                                    double e, std::span<const std::size_t> scales) {
    if (scales.empty()) return {};
    for (std::size_t i = 0; i < scales.size(); ++i)
        if (scales[i] == 0 || (i > 0 && scales[i] <= scales[i - 1]))
            throw DomainError("scales must be positive and strictly increasing");
    const std::size_t d = fam.dim();
    std::vector<ScaledProduct> acc;
    acc.reserve(d);
    for (std::size_t p = 1; p <= d; ++p) acc.push_back(ScaledProduct::identity(binomial(d, p)));

    std::vector<std::vector<double>> out;
    out.reserve(scales.size());
    std::size_t next = 0;
    for (std::size_t j = 1; j <= scales.back(); ++j) {
        const RealMatrix a = evaluate(fam, fam.base().advance(x, static_cast<std::int64_t>(j)), e);
        for (std::size_t p = 1; p <= d; ++p) acc[p - 1].push(exterior_power(a, p));
        if (j == scales[next]) {
            std::vector<double> row(d);
            for (std::size_t p = 0; p < d; ++p) row[p] = acc[p].log_scale;
            out.push_back(std::move(row));
            ++next;
        }
    }
    return out;
}

std::vector<double> log_singular_profile(const CocycleFamily& fam, const TorusPoint& x, double e,
                                         std::size_t n) {
    if (n == 0) throw DomainError("log_singular_profile needs n >= 1");
    const std::size_t scale[] = {n};
    const auto sums = compound_log_norms(fam, x, e, scale).front();
    std::vector<double> prof(sums.size());
    double prev = 0.0;
    for (std::size_t j = 0; j < sums.size(); ++j) {
        prof[j] = (sums[j] - prev) / static_cast<double>(n);
        prev = sums[j];
    }
    return prof;
}

std::vector<TorusPoint> torus_grid(std::size_t nu, std::size_t grid_size) {
    if (grid_size == 0) throw DomainError("grid size must be at least 1");
    if (nu == 0 || nu > kMaxTorusDim) throw DomainError("unsupported torus dimension");
    std::size_t total = 1;
    for (std::size_t a = 0; a < nu; ++a) total *= grid_size;
    std::vector<TorusPoint> pts;
    pts.reserve(total);
    std::array<double, kMaxTorusDim> c{};
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (std::size_t a = nu; a-- > 0;) {
            c[a] = static_cast<double>(rem % grid_size) / static_cast<double>(grid_size);
            rem /= grid_size;
        }
        pts.emplace_back(std::span<const double>(c.data(), nu));
    }
    return pts;
}

std::vector<std::vector<std::vector<double>>> compound_samples(const CocycleFamily& fam, double e,
                                                               std::span<const std::size_t> scales,
                                                               std::size_t grid_size,
                                                               const ExecutionOptions& exec) {
    const auto pts = torus_grid(fam.base().nu(), grid_size);
    std::vector<std::vector<std::vector<double>>> per_point(pts.size());
    parallel_for(pts.size(), exec.threads,
                 [&](std::size_t i) { per_point[i] = compound_log_norms(fam, pts[i], e, scales); });
    std::vector<std::vector<std::vector<double>>> out(scales.size(),
                                                      std::vector<std::vector<double>>(pts.size()));
    for (std::size_t s = 0; s < scales.size(); ++s)
        for (std::size_t i = 0; i < pts.size(); ++i) {
            auto row = per_point[i][s];
            for (double& v : row) v /= static_cast<double>(scales[s]);
            out[s][i] = std::move(row);
        }
    return out;
}

std::vector<std::vector<double>> finite_scale_ladder(const CocycleFamily& fam, double e,
                                                     std::span<const std::size_t> scales,
                                                     std::size_t grid_size,
                                                     const ExecutionOptions& exec) {
    const auto samples = compound_samples(fam, e, scales, grid_size, exec);
    const std::size_t d = fam.dim();
    std::vector<std::vector<double>> out;
    out.reserve(scales.size());
    std::vector<double> column;
    for (const auto& at_scale : samples) {
        std::vector<double> lam(d);
        column.resize(at_scale.size());
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t i = 0; i < at_scale.size(); ++i)
                column[i] = at_scale[i][j] - (j > 0 ? at_scale[i][j - 1] : 0.0);
            lam[j] = pairwise_mean(column);
        }
        out.push_back(std::move(lam));
    }
    return out;
}

std::vector<double> finite_scale_exponents(const CocycleFamily& fam, double e, std::size_t n,
                                           std::size_t grid_size, const ExecutionOptions& exec) {
    if (n == 0) throw DomainError("finite_scale_exponents needs n >= 1");
    const std::size_t scale[] = {n};
    return finite_scale_ladder(fam, e, scale, grid_size, exec).front();
}

std::vector<double> qr_exponents(const CocycleFamily& fam, double e, std::size_t n,
                                 std::size_t grid_size, const ExecutionOptions& exec) {
    if (n == 0) throw DomainError("qr_exponents needs n >= 1");
    const std::size_t d = fam.dim();
    const auto pts = torus_grid(fam.base().nu(), grid_size);
    std::vector<std::vector<double>> per_point(pts.size());
    parallel_for(pts.size(), exec.threads, [&](std::size_t i) {
        RealMatrix q = RealMatrix::identity(d);
        std::vector<double> sums(d, 0.0);
        for (std::size_t j = 1; j <= n; ++j) {
            const RealMatrix a =
                evaluate(fam, fam.base().advance(pts[i], static_cast<std::int64_t>(j)), e);
            auto qr = qr_positive(a * q);
            for (std::size_t k = 0; k < d; ++k) sums[k] += std::log(qr.r(k, k));
            q = std::move(qr.q);
        }
        for (double& s : sums) s /= static_cast<double>(n);
        per_point[i] = std::move(sums);
    });
    std::vector<double> out(d);
    std::vector<double> column(pts.size());
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < pts.size(); ++i) column[i] = per_point[i][k];
        out[k] = pairwise_mean(column);
    }
    return out;
}

LyapunovTable lyapunov_table(const CocycleFamily& fam, std::span<const std::size_t> scales,
                             std::size_t grid_size, const ExecutionOptions& exec) {
    LyapunovTable table;
    table.grid_size = grid_size;
    table.method = "compound-top-growth";
    for (double e : fam.params().values) {
        const auto ladder = finite_scale_ladder(fam, e, scales, grid_size, exec);
        for (std::size_t s = 0; s < scales.size(); ++s) table.rows.push_back({e, scales[s], ladder[s]});
    }
    return table;
}

std::vector<std::size_t> dyadic_ladder(std::size_t n_min, std::size_t n_max) {
    if (n_min == 0 || n_max < n_min) throw DomainError("dyadic ladder needs 1 <= n_min <= n_max");
    std::vector<std::size_t> out;
    for (std::size_t n = n_min; n <= n_max; n *= 2) out.push_back(n);
    return out;
}

DiophantineReport diophantine_report(double omega, double dio_exponent, std::size_t n_max) {
    if (n_max < 2) throw DomainError("diophantine_report needs n_max >= 2");
    if (!std::isfinite(omega)) throw NonFiniteError("shift not finite");
    DiophantineReport best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t n = 2; n <= n_max; ++n) {
        const double nd = static_cast<double>(n);
        const double v = multiple_distance(n, omega) * nd * std::pow(std::log(nd), dio_exponent);
        if (v < best.c_est) best = {v, n};
    }
    return best;
}

DiophantineReport diophantine_report(const ShiftBase& base, std::size_t n_max) {
    if (base.nu() != 1) throw DomainError("diophantine_report is defined for nu = 1");
    return diophantine_report(base.omega().front(), base.dio_exponent(), n_max);
}

}  // namespace lyap
