#include "lyap/rates.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "lyap/fit.hpp"

namespace lyap {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && std::has_single_bit(n); }

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

GapRecord make_gap_record(double e, std::vector<double> exps, double kappa) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < exps.size(); ++j) gap = std::min(gap, exps[j] - exps[j + 1]);
    const bool pass = gap > kappa;
    return {e, std::move(exps), gap, pass};
}

// log ||e^{s1} N1 - e^{s2} N2||
double log_norm_difference(const ScaledProduct& a, const ScaledProduct& b) {
    const ScaledProduct& big = a.log_scale >= b.log_scale ? a : b;
    const ScaledProduct& small = a.log_scale >= b.log_scale ? b : a;
    RealMatrix diff = small.normalized * std::exp(small.log_scale - big.log_scale);
    diff -= big.normalized;
    const double nrm = operator_norm(diff);
    if (nrm == 0.0) return -std::numeric_limits<double>::infinity();
    return big.log_scale + std::log(nrm);
}

}  // namespace

double RateSeries::at(std::size_t n) const {
    for (const auto& r : rows)
        if (r.n == n) return r.lambda;
    throw DomainError("scale " + std::to_string(n) + " is not on the ladder");
}

RateSeries make_rate_series(std::string family, double e, std::size_t j,
                            std::span<const std::size_t> ns, std::span<const double> lambdas) {
    if (ns.size() != lambdas.size()) throw DomainError("rate series: scales and values differ in length");
    if (ns.size() < 2) throw DomainError("rate series needs at least two rungs");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!is_power_of_two(ns[i])) throw DomainError("rate series scale " + std::to_string(ns[i]) + " is not dyadic");
        if (i > 0 && ns[i] != 2 * ns[i - 1]) throw DomainError("rate series ladder has a gap");
        if (!std::isfinite(lambdas[i])) throw NonFiniteError("rate series value is not finite");
    }
    RateSeries s;
    s.family = std::move(family);
    s.e = e;
    s.j = j;
    for (std::size_t i = 0; i < ns.size(); ++i) s.rows.push_back({ns[i], lambdas[i]});
    s.proxy_limit = extrapolate_exponent(s);
    s.proxy_scale = ns.back();
    return s;
}

RateSeries rate_series(const CocycleFamily& fam, double e, std::size_t j, std::size_t n_max,
                       std::size_t grid_size, const ExecutionOptions& exec) {
    if (j == 0 || j > fam.dim()) throw DomainError("exponent index j out of range");
    if (!is_power_of_two(n_max) || n_max < 8) throw DomainError("n_max must be a power of two >= 8");
    const auto ladder = dyadic_ladder(4, n_max);
    const auto table = finite_scale_ladder(fam, e, ladder, grid_size, exec);
    std::vector<double> values;
    for (const auto& row : table) values.push_back(row[j - 1]);
    return make_rate_series(fam.kind(), e, j, ladder, values);
}

double extrapolate_exponent(const RateSeries& series) {
    if (series.rows.size() < 2) throw DomainError("extrapolation needs at least two rungs");
    const auto& top = series.rows.back();
    const auto& below = series.rows[series.rows.size() - 2];
    return 2.0 * top.lambda - below.lambda;
}

COverNReport check_C_over_n(const RateSeries& series) {
    COverNReport rep;
    const std::size_t limit = series.n_max() / 4;
    bool any = false;
    for (const auto& r : series.rows) {
        const double scaled = static_cast<double>(r.n) * std::abs(r.lambda - series.proxy_limit);
        const bool used = r.n <= limit;
        rep.table.push_back({r.n, r.lambda, scaled, used});
        if (used) {
            rep.c_est = std::max(rep.c_est, scaled);
            any = true;
        }
    }
    if (!any) throw DomainError("C/n check needs a rung at or below n_max / 4");
    return rep;
}

RSequenceReport r_sequence(const RateSeries& series, std::size_t tail_start) {
    if (series.rows.size() < 3) throw DomainError("R(n) sequence needs at least three rungs");
    RSequenceReport rep;
    for (std::size_t i = 0; i + 1 < series.rows.size(); ++i) {
        const auto& a = series.rows[i];
        const auto& b = series.rows[i + 1];
        rep.rows.push_back({a.n, 2.0 * static_cast<double>(a.n) * std::abs(b.lambda - a.lambda)});
    }
    std::vector<double> tail;
    for (const auto& r : rep.rows)
        if (r.n >= tail_start) tail.push_back(r.r);
    rep.tail_start = tail_start;
    if (tail.size() < 3) {
        tail.clear();
        for (const auto& r : rep.rows) tail.push_back(r.r);
        rep.tail_start = rep.rows.front().n;
    }
    rep.tail_max = *std::max_element(tail.begin(), tail.end());
    rep.tail_median = median_of(tail);
    rep.bounded = rep.tail_max <= 10.0 * rep.tail_median;
    return rep;
}

std::string to_string(Convergence c) {
    switch (c) {
        case Convergence::exponential: return "exponential";
        case Convergence::one_over_n: return "one_over_n";
        case Convergence::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

DichotomyVerdict dichotomy(const RateSeries& series, double c1, std::size_t l0) {
    if (!(c1 > 0.0)) throw DomainError("dichotomy needs c1 > 0");
    if (l0 == 0) throw DomainError("dichotomy needs l0 >= 1");
    const std::size_t top = series.n_max();
    if (top < 4 * l0) throw DomainError("dichotomy needs a ladder reaching 4 l0");
    const double proxy = series.proxy_limit;

    DichotomyVerdict v;
    v.c1 = c1;
    v.l0 = l0;
    for (std::size_t i = 0; i + 1 < series.rows.size(); ++i) {
        const auto& r = series.rows[i];
        if (2 * r.n >= top) break;
        const double sd = std::abs(proxy - 2.0 * series.rows[i + 1].lambda + r.lambda);
        v.evidence.push_back({r.n, sd, std::exp(-c1 * static_cast<double>(r.n)),
                              std::abs(r.lambda - proxy)});
    }

    std::vector<double> ells;
    std::vector<double> logs;
    for (const auto& ev : v.evidence)
        if (ev.second_difference > 0.0) {
            ells.push_back(static_cast<double>(ev.ell));
            logs.push_back(std::log(ev.second_difference));
        }
    if (ells.empty())
        v.c1_est = std::numeric_limits<double>::infinity();
    else if (ells.size() == 1)
        v.c1_est = -logs[0] / ells[0];
    else
        v.c1_est = -fit_line(ells, logs).slope;

    for (const auto& r : series.rows) {
        if (r.n < l0 || 2 * r.n > top) continue;
        const double dev = std::abs(r.lambda - proxy);
        if (dev > 4.0 * std::exp(-c1 * static_cast<double>(r.n))) {
            v.trigger = r.n;
            break;
        }
    }

    if (v.trigger) {
        const std::size_t l1 = *v.trigger;
        const double dev1 = std::abs(series.at(l1) - proxy);
        v.cascade_holds = true;
        double factor = 0.25;
        for (std::size_t n = 2 * l1; 2 * n <= top; n *= 2, factor *= 0.5) {
            ++v.cascade_rungs;
            if (!(std::abs(series.at(n) - proxy) > factor * dev1)) v.cascade_holds = false;
        }
        if (v.cascade_rungs == 0) {
            v.cascade_holds = false;
            v.reason = "triggered at l1 = " + std::to_string(l1) + " with no cascade rung below the proxy scale";
        } else if (v.cascade_holds) {
            v.classification = Convergence::one_over_n;
            v.reason = "triggered at l1 = " + std::to_string(l1) + ", cascade holds on " +
                       std::to_string(v.cascade_rungs) + " rungs";
        } else {
            v.reason = "triggered at l1 = " + std::to_string(l1) + " but the cascade fails";
        }
        return v;
    }

    bool tail_ok = true;
    bool all_zero = true;
    for (const auto& ev : v.evidence) {
        if (ev.ell < l0) continue;
        if (ev.second_difference > ev.threshold) tail_ok = false;
        if (ev.second_difference != 0.0 || ev.deviation != 0.0) all_zero = false;
    }
    if (tail_ok) {
        v.classification = Convergence::exponential;
        v.reason = all_zero ? "degenerate: all differences zero"
                            : "no trigger and every tail second difference below exp(-c1 l)";
    } else {
        v.reason = "no trigger but some tail second difference exceeds exp(-c1 l)";
    }
    return v;
}

std::vector<GapRecord> gap_monitor(const CocycleFamily& fam, std::span<const double> energies,
                                   std::size_t n, double kappa, std::size_t grid_size,
                                   const ExecutionOptions& exec) {
    std::vector<GapRecord> out;
    out.reserve(energies.size());
    for (double e : energies) out.push_back(make_gap_record(e, finite_scale_exponents(fam, e, n, grid_size, exec), kappa));
    return out;
}

CrudeCheck crude_continuity_check(const CocycleFamily& fam, double e, double e2, std::size_t n,
                                  std::size_t grid_size, const ExecutionOptions& exec) {
    if (e == e2) throw DomainError("crude continuity check needs E != E'");
    if (n == 0) throw DomainError("crude continuity check needs n >= 1");
    const double dist = ParameterGrid::distance(e, e2);
    const double beta0 = fam.holder_exponent();
    const auto pts = torus_grid(fam.base().nu(), grid_size);
    std::vector<double> log_diff(pts.size());
    std::vector<double> cond(pts.size());
    std::vector<double> step_diff(pts.size());
    parallel_for(pts.size(), exec.threads, [&](std::size_t i) {
        log_diff[i] = log_norm_difference(product_orbit(fam, pts[i], e, n), product_orbit(fam, pts[i], e2, n));
        const auto a = evaluate(fam, pts[i], e);
        const auto b = evaluate(fam, pts[i], e2);
        const auto sa = singular_values(a);
        const auto sb = singular_values(b);
        cond[i] = std::max(std::log(sa.front()) - std::log(sa.back()), std::log(sb.front()) - std::log(sb.back()));
        step_diff[i] = operator_norm(a - b);
    });
    CrudeCheck out{};
    out.e = e;
    out.e2 = e2;
    out.n = n;
    out.log_lhs = *std::max_element(log_diff.begin(), log_diff.end());
    out.holder_constant = *std::max_element(step_diff.begin(), step_diff.end()) / std::pow(dist, beta0);
    const double log_h = out.holder_constant > 0.0 ? std::log(out.holder_constant) : 0.0;
    out.c = *std::max_element(cond.begin(), cond.end()) + std::max(log_h, 0.0) + 1.0;
    out.log_rhs = out.c * static_cast<double>(n) + beta0 * std::log(dist);
    return out;
}

HolderEstimate holder_estimate(const CocycleFamily& fam, std::size_t j, double e_lo, double e_hi,
                               std::size_t n, const HolderOptions& opts,
                               const ExecutionOptions& exec) {
    if (j == 0 || j > fam.dim()) throw DomainError("exponent index j out of range");
    if (!(e_hi > e_lo)) throw DomainError("Holder window needs E_min < E_max");
    if (opts.pair_budget < 2) throw DomainError("Holder estimate needs a pair budget of at least 2");
    if (!(opts.kappa > 0.0)) throw DomainError("Holder estimate needs kappa > 0");
    if (n == 0) throw DomainError("Holder estimate needs n >= 1");

    const double width = e_hi - e_lo;
    const double offset = static_cast<double>(splitmix64(opts.seed) >> 11) * 0x1p-53;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const std::size_t budget = opts.pair_budget;

    HolderEstimate est;
    est.j = j;
    est.e_lo = e_lo;
    est.e_hi = e_hi;
    est.n = n;
    std::vector<double> energies;
    for (std::size_t i = 0; i < budget; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(budget - 1);
        const double dist = width * 1e-4 * std::pow(5000.0, t);
        double u = offset + static_cast<double>(i + 1) * inv_phi;
        u -= std::floor(u);
        const double e = e_lo + u * (width - dist);
        est.pairs.push_back({e, e + dist, dist, 0.0, false});
        energies.push_back(e);
        energies.push_back(e + dist);
    }

    std::vector<std::vector<double>> exps;
    exps.reserve(energies.size());
    for (double e : energies) exps.push_back(finite_scale_exponents(fam, e, n, opts.grid_size, exec));

    est.kappa_min = std::numeric_limits<double>::infinity();
    bool gaps_pass = true;
    for (std::size_t i = 0; i < energies.size(); ++i) {
        est.gaps.push_back(make_gap_record(energies[i], exps[i], opts.kappa));
        est.kappa_min = std::min(est.kappa_min, est.gaps.back().min_gap);
        gaps_pass = gaps_pass && est.gaps.back().pass;
    }
    if (!gaps_pass)
        throw GapRefusalError("gap check failed on the Holder window: observed gap " +
                                  std::to_string(est.kappa_min) + " <= kappa " + std::to_string(opts.kappa),
                              est.gaps);

    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < budget; ++i) {
        auto& p = est.pairs[i];
        p.difference = std::abs(exps[2 * i][j - 1] - exps[2 * i + 1][j - 1]);
        p.excluded = !(p.difference >= 10.0 * opts.tol_quad);
        if (p.excluded) {
            ++est.pairs_excluded;
        } else {
            xs.push_back(std::log(p.distance));
            ys.push_back(std::log(p.difference));
        }
    }
    est.pairs_used = xs.size();

    const auto& widest = est.pairs.back();
    est.beta0_check = crude_continuity_check(fam, widest.e, widest.e2, n, opts.grid_size, exec);

    if (xs.empty()) {
        est.verdict = "zero variation";
        return est;
    }
    if (xs.size() < 2) {
        est.verdict = "insufficient pairs";
        return est;
    }
    const auto line = fit_line(xs, ys);
    est.gamma_est = line.slope;
    est.intercept = line.intercept;
    est.residual = line.rms_residual;
    est.verdict = "fitted";

    if (fam.base().nu() >= 2 && xs.size() >= 3) {
        StretchedModulus best{0.0, 0.0, 0.0, std::numeric_limits<double>::infinity()};
        for (int k = 1; k <= 19; ++k) {
            const double sigma = 0.05 * k;
            std::vector<double> col(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) col[i] = -std::pow(std::abs(xs[i]), sigma);
            LeastSquares ls;
            try {
                ls = least_squares({std::vector<double>(xs.size(), 1.0), col}, ys);
            } catch (const DomainError&) {
                continue;
            }
            if (ls.rms_residual < best.residual)
                best = {sigma, ls.coefficients[1], ls.coefficients[0], ls.rms_residual};
        }
        if (std::isfinite(best.residual)) est.stretched = best;
    }
    return est;
}

ScaleKnobs ScaleKnobs::from_kappa(double kappa) {
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    const double d0 = kappa / 10.0;
    return {d0, d0 * d0 / 10.0, 64};
}

std::uint64_t coupled_scale(std::size_t n, double delta1) {
    if (!(delta1 > 0.0)) throw DomainError("delta1 must be positive");
    const double x = delta1 * static_cast<double>(n);
    if (x >= 63.0 * std::numbers::ln2) throw DomainError("coupled scale exceeds 2^63");
    return static_cast<std::uint64_t>(std::floor(std::exp(x)));
}

}  // namespace lyap
