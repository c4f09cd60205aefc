#include "lyap/ldt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lyap/fit.hpp"

namespace lyap {

namespace {

void check_p(const CocycleFamily& fam, std::size_t p) {
    if (p == 0 || p > fam.dim())
        throw DomainError("compound index p=" + std::to_string(p) + " outside [1, " +
                          std::to_string(fam.dim()) + "]");
}

double measure_above(std::span<const double> values, double mean, double delta) {
    std::size_t bad = 0;
    for (double v : values)
        if (std::abs(v - mean) > delta) ++bad;
    return static_cast<double>(bad) / static_cast<double>(values.size());
}

}  // namespace

std::vector<double> compound_profile(const CocycleFamily& fam, double e, std::size_t n,
                                     std::size_t p, std::size_t grid_size,
                                     const ExecutionOptions& exec) {
    check_p(fam, p);
    if (n == 0) throw DomainError("compound_profile needs n >= 1");
    const std::size_t scale[] = {n};
    const auto samples = compound_samples(fam, e, scale, grid_size, exec);
    std::vector<double> out;
    out.reserve(samples[0].size());
    for (const auto& row : samples[0]) out.push_back(row[p - 1]);
    return out;
}

double deviation_measure(const CocycleFamily& fam, double e, std::size_t n, std::size_t p,
                         double delta, std::size_t grid_size, const ExecutionOptions& exec) {
    if (!(delta > 0.0)) throw DomainError("deviation threshold delta must be positive");
    const auto values = compound_profile(fam, e, n, p, grid_size, exec);
    return measure_above(values, pairwise_mean(values), delta);
}

DeviationProfile deviation_profile(const CocycleFamily& fam, double e, std::size_t p,
                                   std::span<const std::size_t> scales,
                                   std::span<const double> deltas, std::size_t grid_size,
                                   const ExecutionOptions& exec) {
    check_p(fam, p);
    for (double d : deltas)
        if (!(d > 0.0)) throw DomainError("deviation threshold delta must be positive");
    const auto samples = compound_samples(fam, e, scales, grid_size, exec);
    DeviationProfile prof;
    prof.family = fam.kind();
    prof.e = e;
    prof.p = p;
    std::vector<double> values;
    for (std::size_t s = 0; s < scales.size(); ++s) {
        values.clear();
        for (const auto& row : samples[s]) values.push_back(row[p - 1]);
        const double mean = pairwise_mean(values);
        for (double d : deltas) prof.rows.push_back({scales[s], d, measure_above(values, mean, d), grid_size});
    }
    return prof;
}

DecayFit fit_decay(const DeviationProfile& profile, DecayModel model, double delta) {
    DecayFit fit;
    fit.model = model;
    std::vector<double> ns;
    std::vector<double> logs;
    bool any_row = false;
    for (const auto& r : profile.rows) {
        if (delta > 0.0 && r.delta != delta) continue;
        any_row = true;
        if (!(r.measure > 0.0)) continue;
        if (model == DecayModel::stretched && !(r.measure < 1.0)) continue;
        ns.push_back(static_cast<double>(r.n));
        logs.push_back(std::log(r.measure));
    }
    fit.rows_used = ns.size();
    if (ns.size() < 4) {
        fit.degenerate = true;
        fit.verdict = (!any_row || ns.empty()) ? "degenerate: all-zero"
                                               : "degenerate: fewer than 4 positive rows";
        return fit;
    }
    fit.n_lo = static_cast<std::size_t>(*std::min_element(ns.begin(), ns.end()));
    fit.n_hi = static_cast<std::size_t>(*std::max_element(ns.begin(), ns.end()));
    fit.trend_slope = fit_line(ns, logs).slope;

    if (model == DecayModel::exp_poly) {
        double best = std::numeric_limits<double>::infinity();
        for (int step = 0; step <= 75; ++step) {
            const double b = 0.25 + 0.05 * step;
            std::vector<double> logpow(ns.size());
            for (std::size_t i = 0; i < ns.size(); ++i) logpow[i] = std::pow(std::log(ns[i]), b);
            LeastSquares ls;
            try {
                ls = least_squares({ns, logpow}, logs);
            } catch (const DomainError&) {
                continue;
            }
            if (ls.rms_residual < best) {
                best = ls.rms_residual;
                fit.c = -ls.coefficients[0];
                fit.big_c = ls.coefficients[1];
                fit.b = b;
                fit.residual = ls.rms_residual;
            }
        }
        if (!std::isfinite(best)) {
            fit.degenerate = true;
            fit.verdict = "degenerate: collinear design";
            return fit;
        }
        fit.verdict = "fitted exp_poly";
    } else {
        std::vector<double> ln_n(ns.size());
        std::vector<double> z(ns.size());
        for (std::size_t i = 0; i < ns.size(); ++i) {
            ln_n[i] = std::log(ns[i]);
            z[i] = std::log(-logs[i]);
        }
        const auto line = fit_line(ln_n, z);
        fit.tau = line.slope;
        fit.k = std::exp(line.intercept);
        double ss = 0.0;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const double pred = -fit.k * std::pow(ns[i], fit.tau);
            ss += (logs[i] - pred) * (logs[i] - pred);
        }
        fit.residual = std::sqrt(ss / static_cast<double>(ns.size()));
        fit.verdict = "fitted stretched";
    }
    return fit;
}

AlmostInvariance almost_invariance(const CocycleFamily& fam, double e, std::size_t n, std::size_t k,
                                   std::size_t grid_size, const ExecutionOptions& exec) {
    if (k == 0) throw DomainError("almost_invariance needs k >= 1");
    if (n == 0) throw DomainError("almost_invariance needs n >= 1");
    const auto pts = torus_grid(fam.base().nu(), grid_size);
    std::vector<double> gaps(pts.size());
    std::vector<double> log_norm(pts.size());
    std::vector<double> log_inv_norm(pts.size());
    const double nd = static_cast<double>(n);
    parallel_for(pts.size(), exec.threads, [&](std::size_t i) {
        const double here = product_orbit(fam, pts[i], e, n).log_scale / nd;
        const auto shifted = fam.base().advance(pts[i], static_cast<std::int64_t>(k));
        const double there = product_orbit(fam, shifted, e, n).log_scale / nd;
        gaps[i] = std::abs(there - here);
        const auto s = singular_values(evaluate(fam, pts[i], e));
        log_norm[i] = std::log(s.front());
        log_inv_norm[i] = -std::log(s.back());
    });
    const double c = *std::max_element(log_norm.begin(), log_norm.end()) +
                     *std::max_element(log_inv_norm.begin(), log_inv_norm.end());
    return {*std::max_element(gaps.begin(), gaps.end()), static_cast<double>(k) * c / nd};
}

std::size_t MonotonicityReport::violations() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.violation; }));
}

double MonotonicityReport::max_excess() const noexcept {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::max(m, r.excess);
    return m;
}

MonotonicityReport monotonicity_audit(const CocycleFamily& fam, double e,
                                      std::span<const std::size_t> scales, std::size_t grid_size,
                                      double tolerance, const ExecutionOptions& exec) {
    if (scales.size() < 2) throw DomainError("monotonicity audit needs at least two scales");
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (scales[i] != 2 * scales[i - 1]) throw DomainError("monotonicity audit needs a dyadic ladder");
    const auto ladder = finite_scale_ladder(fam, e, scales, grid_size, exec);
    MonotonicityReport rep;
    rep.tolerance = tolerance;
    for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
        const double a = ladder[i][0];
        const double b = ladder[i + 1][0];
        rep.rows.push_back({scales[i], a, b, b - a, b > a + tolerance});
    }
    return rep;
}

}  // namespace lyap
