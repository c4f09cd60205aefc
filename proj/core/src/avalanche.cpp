#include "lyap/avalanche.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lyap/cocycle.hpp"
#include "lyap/linalg.hpp"

namespace lyap {

namespace {

constexpr double kBracketSlack = 64.0 * std::numeric_limits<double>::epsilon();

std::vector<RealMatrix> normalized_factors(const ApInput& input) {
    std::vector<RealMatrix> out;
    out.reserve(input.size());
    for (const auto& a : input.matrices()) out.push_back(a / operator_norm(a));
    return out;
}

}  // namespace

ApInput::ApInput(std::vector<RealMatrix> matrices) : matrices_(std::move(matrices)) {
    if (matrices_.size() < 2) throw DomainError("AP input needs at least two factors");
    const std::size_t d = matrices_.front().dim();
    for (std::size_t j = 0; j < matrices_.size(); ++j) {
        const auto& m = matrices_[j];
        if (m.dim() != d || d == 0)
            throw DomainError("AP factor " + std::to_string(j + 1) + " has inconsistent dimension");
        if (!m.is_finite()) throw NonFiniteError("AP factor " + std::to_string(j + 1) + " not finite");
        if (!is_invertible(m))
            throw SingularMatrixError("AP factor " + std::to_string(j + 1) + " is not invertible");
    }
}

std::vector<ApFactor> ap_factors(const ApInput& input) {
    std::vector<ApFactor> out;
    out.reserve(input.size());
    for (const auto& a : input.matrices()) {
        const auto s = singular_values(a);
        const double alpha = s.size() > 1 ? s[1] : 0.0;
        const double gap = alpha > 0.0 ? s[0] / alpha : std::numeric_limits<double>::infinity();
        out.push_back({s[0], alpha, gap});
    }
    return out;
}

std::vector<double> ap_pair_ratios(const ApInput& input) {
    const auto hat = normalized_factors(input);
    std::vector<double> rho(hat.size() - 1);
    for (std::size_t j = 0; j + 1 < hat.size(); ++j) rho[j] = operator_norm(hat[j + 1] * hat[j]);
    return rho;
}

double certified_mu(const ApInput& input) {
    double mu = std::numeric_limits<double>::infinity();
    for (const auto& f : ap_factors(input)) mu = std::min(mu, f.gap);
    return mu;
}

ApHypotheses check_hypotheses(const ApInput& input, double mu) {
    if (!(mu > 0.0)) throw DomainError("mu must be positive");
    const auto factors = ap_factors(input);
    const auto rho = ap_pair_ratios(input);
    const double n = static_cast<double>(input.size());

    ApHypotheses h;
    h.mu = mu;
    h.max_admissible_mu = std::numeric_limits<double>::infinity();
    h.dominance = true;
    for (const auto& f : factors) {
        // compared through the stored ratio so the certified mu = min gap passes exactly
        const bool ok = f.gap >= mu;
        h.dominance_by_factor.push_back(ok);
        h.dominance = h.dominance && ok;
        h.max_admissible_mu = std::min(h.max_admissible_mu, f.gap);
    }
    h.mu_floor = mu >= 16.0 * n * n;
    const double threshold = std::pow(mu, -0.25);
    h.non_cancellation = true;
    for (double r : rho) {
        const bool ok = r > threshold;
        h.non_cancellation_by_pair.push_back(ok);
        h.non_cancellation = h.non_cancellation && ok;
    }
    return h;
}

double ap_discrepancy(const ApInput& input) {
    const auto hat = normalized_factors(input);
    // log ||A_n ... A_1|| - sum log ||A_j|| of the normalized factors; the
    // first factor seeds the product so that n = 2 reproduces rho_1 bit for bit.
    ScaledProduct prod{hat.front(), 0.0, 1};
    double sum_log_rho = 0.0;
    for (std::size_t j = 1; j < hat.size(); ++j) {
        prod.push(hat[j]);
        sum_log_rho += std::log(operator_norm(hat[j] * hat[j - 1]));
    }
    return std::abs(prod.log_scale - sum_log_rho);
}

bool LambdaRhoBracket::all_bracketed() const noexcept {
    return std::all_of(bracketed.begin(), bracketed.end(), [](bool b) { return b; });
}

LambdaRhoBracket lambda_rho_bracket(const ApInput& input) {
    return lambda_rho_bracket(input, certified_mu(input));
}

LambdaRhoBracket lambda_rho_bracket(const ApInput& input, double mu) {
    const auto& mats = input.matrices();
    std::vector<SvdResult<double>> svds;
    svds.reserve(mats.size());
    for (std::size_t j = 0; j < mats.size(); ++j) {
        auto s = svd(mats[j]);
        if (s.singular_values.size() > 1) {
            const double rel = (s.singular_values[0] - s.singular_values[1]) / s.singular_values[0];
            if (rel < kDegenerateTopGap)
                throw RefusalError("AP hypotheses unverifiable: degenerate top singular value at factor " +
                                   std::to_string(j + 1));
        }
        svds.push_back(std::move(s));
    }
    const std::size_t d = input.dim();
    LambdaRhoBracket out;
    out.mu = mu;
    out.rho = ap_pair_ratios(input);
    for (std::size_t j = 0; j + 1 < mats.size(); ++j) {
        // T_j is spanned by the top left-singular vector of A_j; pi_{j+1}
        // projects onto the top right-singular line of A_{j+1}.
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += svds[j + 1].right(k, 0) * svds[j].left(k, 0);
        const double lam = std::abs(dot);
        out.lambda.push_back(lam);
        const double r = out.rho[j];
        out.bracketed.push_back(r - 2.0 / mu <= lam + kBracketSlack &&
                                lam <= r + 1.0 / mu + kBracketSlack);
    }
    return out;
}

ApReport ap_report(const ApInput& input) {
    ApReport rep;
    rep.factors = ap_factors(input);
    rep.mu = certified_mu(input);
    rep.hypotheses = check_hypotheses(input, rep.mu);
    rep.rho = ap_pair_ratios(input);
    try {
        auto br = lambda_rho_bracket(input, rep.mu);
        rep.lambda = std::move(br.lambda);
        rep.bracketed = std::move(br.bracketed);
    } catch (const RefusalError&) {
        rep.lambda.clear();
        rep.bracketed.clear();
    }
    rep.discrepancy = ap_discrepancy(input);
    rep.bound = kApBoundConstant * static_cast<double>(input.size()) / std::sqrt(rep.mu);
    return rep;
}

ProjectionDemo projection_demo(std::span<const double> thetas, double eps, ProjectionMode mode) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("projection demo needs eps in (0, 1]");
    if (thetas.empty()) throw DomainError("projection demo needs at least one angle (n >= 2)");
    ProjectionDemo demo{mode, eps, {}, {}, {}, 0.0, 0.0, {}};
    double phi = 0.0;
    for (std::size_t j = 0; j <= thetas.size(); ++j) {
        if (j > 0) phi += thetas[j - 1];
        const double u[3] = {std::cos(phi), std::sin(phi), 0.0};
        RealMatrix a(3);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) {
                const double p = u[r] * u[c];
                const double id = r == c ? 1.0 : 0.0;
                a(r, c) = mode == ProjectionMode::rank1 ? p + eps * (id - p) : (id - p) + eps * p;
            }
        demo.factors.push_back(std::move(a));
    }
    for (const auto& a : demo.factors) demo.norms.push_back(operator_norm(a));
    for (std::size_t j = 0; j + 1 < demo.factors.size(); ++j)
        demo.pair_norms.push_back(operator_norm(demo.factors[j + 1] * demo.factors[j]));
    ScaledProduct prod = ScaledProduct::identity(3);
    for (const auto& a : demo.factors) prod.push(a);
    demo.log_product_norm = prod.log_scale;
    const ApInput input(demo.factors);
    demo.discrepancy = ap_discrepancy(input);
    demo.hypotheses = check_hypotheses(input, certified_mu(input));
    return demo;
}

}  // namespace lyap
