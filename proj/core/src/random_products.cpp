#include "lyap/random_products.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lyap/cocycle.hpp"
#include "lyap/linalg.hpp"
#include "lyap/philox.hpp"

namespace lyap {

RealMatrix rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return RealMatrix{{c, -s}, {s, c}};
}

MatrixDistribution MatrixDistribution::finite(std::vector<RealMatrix> matrices,
                                              std::vector<double> probabilities, std::uint64_t seed) {
    if (matrices.empty()) throw DomainError("distribution support is empty");
    if (matrices.size() != probabilities.size())
        throw DomainError("distribution needs one probability per matrix");
    const std::size_t d = matrices.front().dim();
    double total = 0.0;
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        if (matrices[i].dim() != d) throw DomainError("support matrices differ in dimension");
        if (!matrices[i].is_finite()) throw NonFiniteError("support matrix is not finite");
        if (!is_invertible(matrices[i]))
            throw SingularMatrixError("support matrix " + std::to_string(i + 1) + " is not invertible");
        if (!(probabilities[i] >= 0.0 && probabilities[i] <= 1.0))
            throw DomainError("probability outside [0, 1]");
        total += probabilities[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("probabilities do not sum to 1");
    MatrixDistribution dist;
    double run = 0.0;
    for (double p : probabilities) {
        run += p;
        dist.cumulative_.push_back(run);
    }
    dist.finite_ = FiniteSupport{std::move(matrices), std::move(probabilities)};
    dist.seed_ = seed;
    dist.base_dim_ = d;
    dist.dim_ = d;
    return dist;
}

MatrixDistribution MatrixDistribution::rotated_diagonal(double theta_lo, double theta_hi, double s,
                                                        std::uint64_t seed) {
    if (!std::isfinite(theta_lo) || !std::isfinite(theta_hi) || theta_hi < theta_lo)
        throw DomainError("rotated-diagonal needs theta_lo <= theta_hi");
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("rotated-diagonal needs s > 0");
    MatrixDistribution dist;
    dist.generator_ = RotatedDiagonal{theta_lo, theta_hi, s};
    dist.seed_ = seed;
    dist.base_dim_ = 2;
    dist.dim_ = 2;
    return dist;
}

MatrixDistribution MatrixDistribution::single(RealMatrix m, std::uint64_t seed) {
    std::vector<RealMatrix> mats;
    mats.push_back(std::move(m));
    return finite(std::move(mats), {1.0}, seed);
}

MatrixDistribution MatrixDistribution::furstenberg_example(std::uint64_t seed, double angle) {
    const RealMatrix d = RealMatrix::diagonal({2.0, 0.5});
    return finite({rotation(angle) * d, rotation(-angle) * d}, {0.5, 0.5}, seed);
}

MatrixDistribution MatrixDistribution::rotation_pair(std::uint64_t seed, double alpha) {
    return finite({rotation(alpha), rotation(-alpha)}, {0.5, 0.5}, seed);
}

MatrixDistribution MatrixDistribution::exterior_power(std::size_t p) const {
    if (p == 0 || p > base_dim_) throw DomainError("exterior power index out of range");
    MatrixDistribution out = *this;
    out.compound_ = p;
    out.dim_ = binomial(base_dim_, p);
    return out;
}

MatrixDistribution MatrixDistribution::with_seed(std::uint64_t seed) const {
    MatrixDistribution out = *this;
    out.seed_ = seed;
    return out;
}

std::string MatrixDistribution::describe() const {
    std::ostringstream os;
    if (finite_)
        os << "finite support of " << finite_->matrices.size() << " matrices, d = " << base_dim_;
    else
        os << "rotated-diagonal theta in [" << generator_->theta_lo << ", " << generator_->theta_hi
           << "], s = " << generator_->s;
    if (compound_ > 1) os << ", exterior power " << compound_;
    return os.str();
}

RealMatrix MatrixDistribution::draw(std::uint64_t stream_id, std::uint64_t index) const {
    const auto u = PhiloxStream(seed_, stream_id).uniforms(index);
    RealMatrix y(base_dim_);
    if (finite_) {
        std::size_t pick = cumulative_.size() - 1;
        for (std::size_t i = 0; i < cumulative_.size(); ++i)
            if (u[0] < cumulative_[i]) {
                pick = i;
                break;
            }
        y = finite_->matrices[pick];
    } else {
        const auto& g = *generator_;
        const double theta = g.theta_lo + u[0] * (g.theta_hi - g.theta_lo);
        y = rotation(theta) * RealMatrix::diagonal({g.s, 1.0 / g.s});
    }
    return compound_ > 1 ? lyap::exterior_power(y, compound_) : y;
}

std::vector<double> sample_product_ladder(const MatrixDistribution& dist,
                                          std::span<const std::size_t> scales, std::uint64_t stream_id) {
    if (scales.empty() || scales.front() == 0) throw DomainError("sample_product needs n >= 1");
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (scales[i] <= scales[i - 1]) throw DomainError("scales must be strictly increasing");
    std::vector<double> out;
    out.reserve(scales.size());
    auto prod = ScaledProduct::identity(dist.dim());
    std::size_t next = 0;
    for (std::size_t k = 0; k < scales.back(); ++k) {
        prod.push(dist.draw(stream_id, k));
        if (prod.length == scales[next]) {
            out.push_back(prod.log_scale);
            ++next;
        }
    }
    return out;
}

double sample_product(const MatrixDistribution& dist, std::size_t n, std::uint64_t stream_id) {
    const std::size_t scale[] = {n};
    return sample_product_ladder(dist, scale, stream_id).front();
}

namespace {

McEstimate summarize(std::size_t n, std::span<const double> per_trial) {
    const double mean = pairwise_mean(per_trial);
    std::vector<double> sq(per_trial.size());
    for (std::size_t i = 0; i < per_trial.size(); ++i) sq[i] = (per_trial[i] - mean) * (per_trial[i] - mean);
    const double t = static_cast<double>(per_trial.size());
    const double var = pairwise_sum(sq) / (t - 1.0);
    return {n, per_trial.size(), mean, std::sqrt(var / t)};
}

// [trial][scale] of log ||S_n|| / n
std::vector<std::vector<double>> ladder_samples(const MatrixDistribution& dist,
                                                std::span<const std::size_t> scales, std::size_t trials,
                                                const ExecutionOptions& exec) {
    std::vector<std::vector<double>> out(trials);
    parallel_for(trials, exec.threads, [&](std::size_t t) {
        auto v = sample_product_ladder(dist, scales, t);
        for (std::size_t s = 0; s < v.size(); ++s) v[s] /= static_cast<double>(scales[s]);
        out[t] = std::move(v);
    });
    return out;
}

}  // namespace

std::vector<McEstimate> top_exponent_ladder(const MatrixDistribution& dist,
                                            std::span<const std::size_t> scales, std::size_t trials,
                                            const ExecutionOptions& exec) {
    if (trials < 2) throw DomainError("Monte Carlo needs at least two trials");
    const auto samples = ladder_samples(dist, scales, trials, exec);
    std::vector<McEstimate> out;
    std::vector<double> column(trials);
    for (std::size_t s = 0; s < scales.size(); ++s) {
        for (std::size_t t = 0; t < trials; ++t) column[t] = samples[t][s];
        out.push_back(summarize(scales[s], column));
    }
    return out;
}

McEstimate top_exponent_mc(const MatrixDistribution& dist, std::size_t n, std::size_t trials,
                           const ExecutionOptions& exec) {
    const std::size_t scale[] = {n};
    return top_exponent_ladder(dist, scale, trials, exec).front();
}

std::vector<double> ProjectiveHistogram::mass() const {
    std::vector<double> m;
    m.reserve(counts.size());
    for (auto c : counts) m.push_back(static_cast<double>(c) / static_cast<double>(trials));
    return m;
}

double ProjectiveHistogram::max_mass() const {
    const auto m = mass();
    return m.empty() ? 0.0 : *std::max_element(m.begin(), m.end());
}

ProjectiveHistogram projective_measure(const MatrixDistribution& dist, std::size_t n, std::size_t trials,
                                       std::size_t bins, const ExecutionOptions& exec) {
    if (dist.dim() != 2) throw DomainError("projective measure is only defined for d = 2");
    if (n == 0 || trials == 0 || bins == 0) throw DomainError("projective measure needs n, trials, bins >= 1");
    std::vector<std::size_t> bin_of(trials);
    parallel_for(trials, exec.threads, [&](std::size_t t) {
        double v0 = 1.0;
        double v1 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto y = dist.draw(t, k);
            const double w0 = y(0, 0) * v0 + y(0, 1) * v1;
            const double w1 = y(1, 0) * v0 + y(1, 1) * v1;
            const double h = std::hypot(w0, w1);
            v0 = w0 / h;
            v1 = w1 / h;
        }
        double angle = std::atan2(v1, v0);
        if (angle < 0.0) angle += std::numbers::pi;
        if (angle >= std::numbers::pi) angle -= std::numbers::pi;
        auto b = static_cast<std::size_t>(angle / std::numbers::pi * static_cast<double>(bins));
        bin_of[t] = std::min(b, bins - 1);
    });
    ProjectiveHistogram h{n, trials, std::vector<std::size_t>(bins, 0)};
    for (auto b : bin_of) ++h.counts[b];
    return h;
}

double total_variation(const ProjectiveHistogram& a, const ProjectiveHistogram& b) {
    if (a.counts.size() != b.counts.size()) throw DomainError("histograms have different bin counts");
    const auto ma = a.mass();
    const auto mb = b.mass();
    double s = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) s += std::abs(ma[i] - mb[i]);
    return 0.5 * s;
}

namespace {

double exceed_fraction(std::span<const double> per_trial_rate, std::size_t n, double lambda, double delta) {
    std::size_t bad = 0;
    const double nd = static_cast<double>(n);
    for (double r : per_trial_rate)
        if (std::abs(r * nd - nd * lambda) > nd * delta) ++bad;
    return static_cast<double>(bad) / static_cast<double>(per_trial_rate.size());
}

}  // namespace

LdRow ld_probability(const MatrixDistribution& dist, std::size_t n, double delta, std::size_t trials,
                     std::optional<double> lambda_ref, const ExecutionOptions& exec) {
    if (!(delta > 0.0)) throw DomainError("deviation delta must be positive");
    if (trials < 2) throw DomainError("Monte Carlo needs at least two trials");
    const std::size_t scale[] = {n};
    const auto samples = ladder_samples(dist, scale, trials, exec);
    std::vector<double> rates(trials);
    for (std::size_t t = 0; t < trials; ++t) rates[t] = samples[t][0];
    const double lambda = lambda_ref ? *lambda_ref : pairwise_mean(rates);
    return {n, delta, exceed_fraction(rates, n, lambda, delta), lambda};
}

std::vector<LdRow> ld_profile(const MatrixDistribution& dist, std::span<const std::size_t> scales,
                              double delta, std::size_t trials, const ExecutionOptions& exec) {
    if (!(delta > 0.0)) throw DomainError("deviation delta must be positive");
    if (trials < 2) throw DomainError("Monte Carlo needs at least two trials");
    const auto samples = ladder_samples(dist, scales, trials, exec);
    std::vector<double> column(trials);
    for (std::size_t t = 0; t < trials; ++t) column[t] = samples[t].back();
    const double lambda = pairwise_mean(column);
    std::vector<LdRow> out;
    for (std::size_t s = 0; s < scales.size(); ++s) {
        for (std::size_t t = 0; t < trials; ++t) column[t] = samples[t][s];
        out.push_back({scales[s], delta, exceed_fraction(column, scales[s], lambda, delta), lambda});
    }
    return out;
}

double contraction_probe(const MatrixDistribution& dist, std::size_t n, std::size_t trials,
                         const ExecutionOptions& exec) {
    if (dist.dim() < 2) throw DomainError("contraction probe needs d >= 2");
    if (n == 0 || trials == 0) throw DomainError("contraction probe needs n, trials >= 1");
    std::vector<double> ratios(trials);
    parallel_for(trials, exec.threads, [&](std::size_t t) {
        auto prod = ScaledProduct::identity(dist.dim());
        for (std::size_t k = 0; k < n; ++k) prod.push(dist.draw(t, k));
        const auto s = singular_values(prod.normalized);
        ratios[t] = s[1] > 0.0 ? std::log(s[1] / s[0]) : -745.0;
    });
    return pairwise_mean(ratios);
}

RandomRateReport convergence_dichotomy_random(const MatrixDistribution& dist,
                                              std::span<const std::size_t> ladder, std::size_t trials,
                                              double c1, std::size_t l0, const ExecutionOptions& exec) {
    RandomRateReport rep;
    rep.rows = top_exponent_ladder(dist, ladder, trials, exec);
    std::vector<double> values;
    for (const auto& r : rep.rows) values.push_back(r.estimate);
    rep.series = make_rate_series("random", 0.0, 1, ladder, values);
    rep.verdict = dichotomy(rep.series, c1, l0);
    return rep;
}

}  // namespace lyap
