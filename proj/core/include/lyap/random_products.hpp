#pragma once

// Products Y_n ... Y_1 of i.i.d. random matrices: Monte Carlo top exponent,
// empirical projective measure, large-deviation probabilities and the
// convergence dichotomy for the Monte Carlo series.
//
// RNG contract: factor k (k = 0, 1, ...) of stream s is drawn from Philox
// block (counter (k, s), key seed). Results do not depend on worker count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lyap/matrix.hpp"
#include "lyap/parallel.hpp"
#include "lyap/rates.hpp"

namespace lyap {

/// Finitely supported distribution: matrices with probabilities summing to 1.
struct FiniteSupport {
    std::vector<RealMatrix> matrices;
    std::vector<double> probabilities;
};

/// Y = R(theta) diag(s, 1/s) with theta uniform on [theta_lo, theta_hi].
/// Bounded support, so exponential moments are finite.
struct RotatedDiagonal {
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    double s = 1.0;
};

class MatrixDistribution {
public:
    static MatrixDistribution finite(std::vector<RealMatrix> matrices, std::vector<double> probabilities,
                                     std::uint64_t seed);
    static MatrixDistribution rotated_diagonal(double theta_lo, double theta_hi, double s, std::uint64_t seed);

    /// {M} with probability 1.
    static MatrixDistribution single(RealMatrix m, std::uint64_t seed = 0);
    /// {R(angle) D, R(-angle) D} with equal weights, D = diag(2, 1/2).
    static MatrixDistribution furstenberg_example(std::uint64_t seed = 0, double angle = 0.3);
    /// {R(alpha), R(-alpha)} with equal weights.
    static MatrixDistribution rotation_pair(std::uint64_t seed = 0, double alpha = 1.0);

    /// Pushforward under Y -> Lambda^p Y (Guivarc'h-Raugi setting for d > 2).
    MatrixDistribution exterior_power(std::size_t p) const;
    MatrixDistribution with_seed(std::uint64_t seed) const;

    std::size_t dim() const noexcept { return dim_; }
    std::uint64_t seed() const noexcept { return seed_; }
    bool is_finite() const noexcept { return finite_.has_value(); }
    const std::optional<FiniteSupport>& support() const noexcept { return finite_; }
    const std::optional<RotatedDiagonal>& generator() const noexcept { return generator_; }
    std::size_t compound() const noexcept { return compound_; }
    std::string describe() const;

    /// Factor `index` of stream `stream_id`.
    RealMatrix draw(std::uint64_t stream_id, std::uint64_t index) const;

private:
    MatrixDistribution() = default;
    std::optional<FiniteSupport> finite_;
    std::optional<RotatedDiagonal> generator_;
    std::vector<double> cumulative_;
    std::uint64_t seed_ = 0;
    std::size_t base_dim_ = 0;
    std::size_t dim_ = 0;
    std::size_t compound_ = 1;
};

/// log ||Y_n ... Y_1|| for stream `stream_id`.
double sample_product(const MatrixDistribution& dist, std::size_t n, std::uint64_t stream_id);

/// log ||Y_n ... Y_1|| at each n in `scales` (strictly increasing) from one pass.
std::vector<double> sample_product_ladder(const MatrixDistribution& dist,
                                          std::span<const std::size_t> scales, std::uint64_t stream_id);

struct McEstimate {
    std::size_t n;
    std::size_t trials;
    double estimate;  // mean of log||S_n|| / n
    double stderr_;   // sample standard deviation / sqrt(trials)
};

/// Mean and standard error over streams 0 .. trials - 1.
McEstimate top_exponent_mc(const MatrixDistribution& dist, std::size_t n, std::size_t trials,
                           const ExecutionOptions& exec = {});

/// Estimates on every rung from common streams.
std::vector<McEstimate> top_exponent_ladder(const MatrixDistribution& dist,
                                            std::span<const std::size_t> scales, std::size_t trials,
                                            const ExecutionOptions& exec = {});

struct ProjectiveHistogram {
    std::size_t n;
    std::size_t trials;
    std::vector<std::size_t> counts;  // bin b covers [b pi / bins, (b + 1) pi / bins)
    std::vector<double> mass() const;
    double max_mass() const;
};

/// Directions of Y_n ... Y_1 e_1 in [0, pi). Requires d = 2.
ProjectiveHistogram projective_measure(const MatrixDistribution& dist, std::size_t n, std::size_t trials,
                                       std::size_t bins, const ExecutionOptions& exec = {});

double total_variation(const ProjectiveHistogram& a, const ProjectiveHistogram& b);

struct LdRow {
    std::size_t n;
    double delta;
    double probability;
    double lambda_ref;
};

/// Empirical P(|log||S_n|| - n lambda| > n delta). Without a reference the top
/// exponent is estimated at n from the same streams.
LdRow ld_probability(const MatrixDistribution& dist, std::size_t n, double delta, std::size_t trials,
                     std::optional<double> lambda_ref = std::nullopt, const ExecutionOptions& exec = {});

/// ld_probability on several n with the reference estimated at the largest n.
std::vector<LdRow> ld_profile(const MatrixDistribution& dist, std::span<const std::size_t> scales,
                              double delta, std::size_t trials, const ExecutionOptions& exec = {});

/// Mean log(sigma_2 / sigma_1) of the normalized product: evidence of
/// contraction towards rank one, never a certificate.
double contraction_probe(const MatrixDistribution& dist, std::size_t n, std::size_t trials,
                         const ExecutionOptions& exec = {});

struct RandomRateReport {
    std::vector<McEstimate> rows;
    std::vector<LdRow> ld_rows;
    RateSeries series;
    DichotomyVerdict verdict;
};

/// Monte Carlo series on a dyadic ladder fed into the dichotomy.
RandomRateReport convergence_dichotomy_random(const MatrixDistribution& dist,
                                              std::span<const std::size_t> ladder, std::size_t trials,
                                              double c1, std::size_t l0, const ExecutionOptions& exec = {});

/// 2x2 rotation by theta.
RealMatrix rotation(double theta);

}  // namespace lyap
