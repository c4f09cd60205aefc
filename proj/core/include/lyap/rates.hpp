#pragma once

// Convergence rates of the finite-scale exponents lambda_{j,n} along dyadic
// ladders (the C/n law, the R(n) recursion, Richardson extrapolation and the
// exponential-versus-1/n dichotomy) and regularity in the parameter E.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lyap/cocycle.hpp"

namespace lyap {

struct RateRow {
    std::size_t n;
    double lambda;
};

/// lambda_{j,n} on a complete dyadic ladder together with the Richardson proxy
/// 2 lambda_{j,top} - lambda_{j,top/2} for the unreachable limit.
struct RateSeries {
    std::string family;
    double e = 0.0;
    std::size_t j = 1;
    std::vector<RateRow> rows;
    double proxy_limit = 0.0;
    std::size_t proxy_scale = 0;  // top rung used by the proxy

    std::size_t n_max() const noexcept { return rows.empty() ? 0 : rows.back().n; }
    /// Value at rung n; throws DomainError if n is not on the ladder.
    double at(std::size_t n) const;
};

/// Validates the ladder (powers of two, each rung double the previous, at
/// least two rows) and sets the proxy. Used for engine data and planted data.
RateSeries make_rate_series(std::string family, double e, std::size_t j,
                            std::span<const std::size_t> ns, std::span<const double> lambdas);

/// Engine series on n = 4, 8, ..., n_max.
RateSeries rate_series(const CocycleFamily& fam, double e, std::size_t j, std::size_t n_max,
                       std::size_t grid_size, const ExecutionOptions& exec = {});

/// 2 lambda_{2l} - lambda_l at the top rung l = n_max / 2.
double extrapolate_exponent(const RateSeries& series);

struct COverNRow {
    std::size_t n;
    double lambda;
    double scaled_error;  // n |lambda_n - proxy|
    bool used;            // n <= n_max / 4
};

struct COverNReport {
    double c_est = 0.0;
    std::vector<COverNRow> table;
};

/// C_est = max n |lambda_n - proxy| over the rungs n <= n_max / 4.
COverNReport check_C_over_n(const RateSeries& series);

struct RRow {
    std::size_t n;
    double r;  // 2n |lambda_{2n} - lambda_n|
};

struct RSequenceReport {
    std::vector<RRow> rows;
    std::size_t tail_start = 0;
    double tail_max = 0.0;
    double tail_median = 0.0;
    bool bounded = true;  // tail_max <= 10 tail_median
};

inline constexpr std::size_t kRTailStart = 64;

/// R(n) per rung; the tail is n >= tail_start (the whole sequence when fewer
/// than three rungs qualify).
RSequenceReport r_sequence(const RateSeries& series, std::size_t tail_start = kRTailStart);

enum class Convergence { exponential, one_over_n, inconclusive };

std::string to_string(Convergence c);

struct DichotomyEvidence {
    std::size_t ell;
    double second_difference;  // |proxy - 2 lambda_{2l} + lambda_l|
    double threshold;          // exp(-c1 l)
    double deviation;          // |lambda_l - proxy|
};

struct DichotomyVerdict {
    Convergence classification = Convergence::inconclusive;
    double c1 = 0.0;
    std::size_t l0 = 0;
    double c1_est = 0.0;  // decay rate of the second differences, +inf if all vanish
    std::optional<std::size_t> trigger;  // l_1 when |lambda_{l1} - proxy| > 4 exp(-c1 l1)
    std::size_t cascade_rungs = 0;        // rungs 2^k l1 (k >= 1) checked
    bool cascade_holds = false;
    std::vector<DichotomyEvidence> evidence;
    std::string reason;
};

/// Needs n_max >= 4 l0. The top rung only enters through the proxy; evidence
/// rows run over l <= n_max / 4, trigger and cascade rungs over l <= n_max / 2.
DichotomyVerdict dichotomy(const RateSeries& series, double c1, std::size_t l0);

struct GapRecord {
    double e;
    std::vector<double> exponents;
    double min_gap;  // min_j (lambda_{j,n} - lambda_{j+1,n}), +inf when d = 1
    bool pass;       // min_gap > kappa
};

/// Refusal raised by holder_estimate; carries the failing gap record.
class GapRefusalError : public RefusalError {
public:
    GapRefusalError(const std::string& what, std::vector<GapRecord> records)
        : RefusalError(what), records_(std::move(records)) {}
    const std::vector<GapRecord>& records() const noexcept { return records_; }

private:
    std::vector<GapRecord> records_;
};

std::vector<GapRecord> gap_monitor(const CocycleFamily& fam, std::span<const double> energies,
                                   std::size_t n, double kappa, std::size_t grid_size,
                                   const ExecutionOptions& exec = {});

/// Telescoping bound ||A^(n)(E) - A^(n)(E')|| <= exp(C n) d(E, E')^beta0 in
/// log form, with
///   C = max_grid (log||A|| + log||A^{-1}||) + max(log H, 0) + 1,
///   H = max_grid ||A(x, E) - A(x, E')|| / d(E, E')^beta0,
/// the maxima running over the grid and both parameters.
struct CrudeCheck {
    double e;
    double e2;
    std::size_t n;
    double log_lhs;  // -inf when the products coincide
    double log_rhs;
    double c;
    double holder_constant;
    bool pass() const noexcept { return log_lhs <= log_rhs; }
};

CrudeCheck crude_continuity_check(const CocycleFamily& fam, double e, double e2, std::size_t n,
                                  std::size_t grid_size, const ExecutionOptions& exec = {});

struct HolderPair {
    double e;
    double e2;
    double distance;
    double difference;  // |lambda_{j,n}(E) - lambda_{j,n}(E')|
    bool excluded;      // below 10 x quadrature tolerance
};

struct StretchedModulus {
    double sigma;  // log|diff| ~ log C - c |log d|^sigma
    double c;
    double log_c;
    double residual;
};

struct HolderEstimate {
    std::size_t j = 1;
    double e_lo = 0.0;
    double e_hi = 0.0;
    std::size_t n = 0;
    std::string verdict;  // "fitted", "zero variation" or "insufficient pairs"
    double gamma_est = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::size_t pairs_used = 0;
    std::size_t pairs_excluded = 0;
    double kappa_min = 0.0;
    std::vector<HolderPair> pairs;
    std::vector<GapRecord> gaps;
    CrudeCheck beta0_check{};
    std::optional<StretchedModulus> stretched;  // nu >= 2 only
};

struct HolderOptions {
    std::size_t pair_budget = 32;
    double kappa = 1e-3;             // required gap on the window
    double tol_quad = 1e-6;          // pairs below 10 tol_quad are excluded
    std::uint64_t seed = 0;          // offsets the low-discrepancy pairing
    std::size_t grid_size = 256;
};

/// Regression of log|lambda_{j,n}(E) - lambda_{j,n}(E')| on log d(E, E')
/// over deterministic pairs whose distances are log-spaced from 1e-4 W to
/// W / 2 (W the window width). Throws RefusalError when the gap check fails
/// on the evaluated energies (GapRefusalError).
HolderEstimate holder_estimate(const CocycleFamily& fam, std::size_t j, double e_lo, double e_hi,
                               std::size_t n, const HolderOptions& opts = {},
                               const ExecutionOptions& exec = {});

/// Experiment-design knobs: delta0 = kappa / 10, delta1 = delta0^2 / 10, n0 = 64.
struct ScaleKnobs {
    double delta0;
    double delta1;
    std::size_t n0 = 64;
    static ScaleKnobs from_kappa(double kappa);
};

/// N = floor(exp(delta1 n)); throws DomainError when N does not fit in 63 bits.
std::uint64_t coupled_scale(std::size_t n, double delta1);

}  // namespace lyap
