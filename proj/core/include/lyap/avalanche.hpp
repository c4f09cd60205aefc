#pragma once

// The Avalanche Principle for finite sequences of invertible matrices:
// hypothesis checks, the discrepancy
//
//   | log||A_n...A_1|| + sum_{j=2}^{n-1} log||A_j|| - sum_{j=1}^{n-1} log||A_{j+1} A_j|| |,
//
// the projection/ratio bracket rho_j - 2/mu <= lambda_j <= rho_j + 1/mu, and the
// two projection examples in R^3.
//
// alpha_j is always sigma_2(A_j); the top right-singular line of A_j is S_j.

#include <cstddef>
#include <span>
#include <vector>

#include "lyap/matrix.hpp"

namespace lyap {

/// Acceptance constant C in the bound discrepancy <= C n / sqrt(mu).
inline constexpr double kApBoundConstant = 100.0;

/// Relative top gap (sigma_1 - sigma_2) / sigma_1 below which the top
/// singular line is treated as undefined.
inline constexpr double kDegenerateTopGap = 1e-8;

/// Ordered factors A_1..A_n (n >= 2), equal dimension, all invertible.
class ApInput {
public:
    explicit ApInput(std::vector<RealMatrix> matrices);

    const std::vector<RealMatrix>& matrices() const noexcept { return matrices_; }
    std::size_t size() const noexcept { return matrices_.size(); }
    std::size_t dim() const noexcept { return matrices_.front().dim(); }

private:
    std::vector<RealMatrix> matrices_;
};

struct ApFactor {
    double norm;   // ||A_j||
    double alpha;  // sigma_2(A_j), 0 when d = 1
    double gap;    // norm / alpha, +inf when alpha = 0
};

struct ApHypotheses {
    double mu = 0.0;
    bool dominance = false;         // ||A_j|| >= alpha_j mu for all j
    bool mu_floor = false;          // mu >= 16 n^2
    bool non_cancellation = false;  // rho_j > mu^{-1/4} for all j < n
    std::vector<bool> dominance_by_factor;
    std::vector<bool> non_cancellation_by_pair;
    double max_admissible_mu = 0.0;  // min_j gap_j

    bool hold() const noexcept { return dominance && mu_floor && non_cancellation; }
};

/// Per-factor norms, alpha_j and gaps.
std::vector<ApFactor> ap_factors(const ApInput& input);

/// rho_j = ||A_{j+1} A_j|| / (||A_{j+1}|| ||A_j||), j = 1..n-1.
std::vector<double> ap_pair_ratios(const ApInput& input);

/// min_j gap_j: the largest mu for which the dominance condition holds.
double certified_mu(const ApInput& input);

ApHypotheses check_hypotheses(const ApInput& input, double mu);

/// Computed from norm-normalized factors, so it is invariant under A_j -> c A_j
/// and exactly zero for n = 2 and for d = 1.
double ap_discrepancy(const ApInput& input);

struct LambdaRhoBracket {
    double mu = 0.0;
    std::vector<double> lambda;
    std::vector<double> rho;
    std::vector<bool> bracketed;  // rho - 2/mu <= lambda <= rho + 1/mu
    bool all_bracketed() const noexcept;
};

/// lambda_j = |pi_{j+1} v| / |v| for v in A_j S_j. The bracket is tested at
/// the certified mu. Throws RefusalError ("AP hypotheses unverifiable") when
/// some factor has a degenerate top singular value.
LambdaRhoBracket lambda_rho_bracket(const ApInput& input);
LambdaRhoBracket lambda_rho_bracket(const ApInput& input, double mu);

struct ApReport {
    std::vector<ApFactor> factors;
    std::vector<double> rho;
    std::vector<double> lambda;  // empty when the top singular value is degenerate
    std::vector<bool> bracketed;
    ApHypotheses hypotheses;
    double mu = 0.0;
    double discrepancy = 0.0;
    double bound = 0.0;  // kApBoundConstant * n / sqrt(mu)
    bool hypotheses_hold() const noexcept { return hypotheses.hold(); }
    bool within_bound() const noexcept { return discrepancy <= bound; }
};

/// Certifies mu = min_j gap_j, then checks every hypothesis against it.
ApReport ap_report(const ApInput& input);

enum class ProjectionMode { rank1, rank2 };

struct ProjectionDemo {
    ProjectionMode mode;
    double eps;
    std::vector<RealMatrix> factors;
    std::vector<double> norms;
    std::vector<double> pair_norms;
    double log_product_norm;
    double discrepancy;
    ApHypotheses hypotheses;  // at the certified mu
};

/// Builds A_j = P_j + eps (1 - P_j) (rank1) or A_j = 1 - P_j + eps P_j
/// (rank2), P_j the projection onto the line at angle
/// theta_1 + ... + theta_{j-1} in the xy-plane of R^3.
ProjectionDemo projection_demo(std::span<const double> thetas, double eps, ProjectionMode mode);

}  // namespace lyap
