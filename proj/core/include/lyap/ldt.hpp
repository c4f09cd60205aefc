#pragma once

// Empirical large-deviation measurements for the compound products
// Lambda^p A^(n)_x: bad-set measures on the quadrature grid, decay fits,
// almost invariance under the shift and doubling-scale monotonicity.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lyap/cocycle.hpp"

namespace lyap {

/// Default quadrature tolerance used by the monotonicity audit.
inline constexpr double kQuadratureTolerance = 1e-6;

struct DeviationRow {
    std::size_t n;
    double delta;
    double measure;  // fraction of the grid in the bad set
    std::size_t grid_size;
};

struct DeviationProfile {
    std::string family;
    double e = 0.0;
    std::size_t p = 1;
    std::vector<DeviationRow> rows;
};

/// (1/n) log ||Lambda^p A^(n)_x|| on the grid, one value per grid point.
std::vector<double> compound_profile(const CocycleFamily& fam, double e, std::size_t n,
                                     std::size_t p, std::size_t grid_size,
                                     const ExecutionOptions& exec = {});

/// Fraction of grid points with |profile(x) - grid mean| > delta, the grid
/// mean being sum_{i<=p} lambda_{i,n}(E) on the same grid.
double deviation_measure(const CocycleFamily& fam, double e, std::size_t n, std::size_t p,
                         double delta, std::size_t grid_size, const ExecutionOptions& exec = {});

/// Measures for every (n, delta) pair from one orbit pass per grid point.
DeviationProfile deviation_profile(const CocycleFamily& fam, double e, std::size_t p,
                                   std::span<const std::size_t> scales,
                                   std::span<const double> deltas, std::size_t grid_size,
                                   const ExecutionOptions& exec = {});

enum class DecayModel {
    exp_poly,   // measure ~ exp(-c n + C (log n)^b)
    stretched,  // measure ~ exp(-k n^tau)
};

struct DecayFit {
    DecayModel model = DecayModel::exp_poly;
    bool degenerate = false;  // fewer than 4 rows with positive measure
    std::string verdict;
    double c = 0.0;          // exp_poly: decay rate in n
    double big_c = 0.0;      // exp_poly: coefficient of (log n)^b
    double b = 0.0;          // exp_poly: log exponent
    double tau = 0.0;        // stretched
    double k = 0.0;          // stretched prefactor
    double trend_slope = 0.0;  // least-squares slope of log measure against n
    double residual = 0.0;     // RMS residual of the model in log measure
    std::size_t rows_used = 0;
    std::size_t n_lo = 0;
    std::size_t n_hi = 0;
};

/// Least-squares fit of log measure. Uses the rows with the given delta (all
/// rows when delta <= 0) and positive measure; the exp_poly exponent b is
/// chosen on a fixed grid over [0.25, 4] by minimum residual.
DecayFit fit_decay(const DeviationProfile& profile, DecayModel model, double delta = 0.0);

struct AlmostInvariance {
    double sup_gap;  // max over grid |u_n(x + k w) - u_n(x)|
    double bound;    // k (max log||A|| + max log||A^{-1}||) / n
    bool holds() const noexcept { return sup_gap <= bound + 1e-10; }
};

AlmostInvariance almost_invariance(const CocycleFamily& fam, double e, std::size_t n, std::size_t k,
                                   std::size_t grid_size, const ExecutionOptions& exec = {});

struct MonotonicityRow {
    std::size_t n;
    double lambda_n;
    double lambda_2n;
    double excess;  // lambda_2n - lambda_n
    bool violation;
};

struct MonotonicityReport {
    double tolerance = kQuadratureTolerance;
    std::vector<MonotonicityRow> rows;
    std::size_t violations() const noexcept;
    double max_excess() const noexcept;
};

/// lambda_{1,2n} <= lambda_{1,n} + tolerance along a dyadic ladder.
MonotonicityReport monotonicity_audit(const CocycleFamily& fam, double e,
                                      std::span<const std::size_t> scales, std::size_t grid_size,
                                      double tolerance = kQuadratureTolerance,
                                      const ExecutionOptions& exec = {});

}  // namespace lyap
