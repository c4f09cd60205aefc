#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lyap/rates.hpp"

using namespace lyap;

namespace {

const double kLn2 = std::numbers::ln2;

CocycleFamily constant_family(RealMatrix m) {
    return CocycleFamily::create(ShiftBase::golden(), ConstantCocycle{std::move(m)}, ParameterGrid::single(0.0));
}

CocycleFamily schrodinger(ParameterGrid g = ParameterGrid::single(0.0)) {
    return CocycleFamily::create(ShiftBase::golden(), SchrodingerCocycle{3.0}, std::move(g));
}

RateSeries planted(std::size_t n_lo, std::size_t n_hi, auto law) {
    std::vector<std::size_t> ns;
    std::vector<double> ls;
    for (std::size_t n = n_lo; n <= n_hi; n *= 2) {
        ns.push_back(n);
        ls.push_back(law(static_cast<double>(n)));
    }
    return make_rate_series("planted", 0.0, 1, ns, ls);
}

}  // namespace

TEST_CASE("series construction") {
    const std::vector<std::size_t> bad{4, 12};
    const std::vector<double> two{1.0, 1.0};
    CHECK_THROWS_AS(make_rate_series("x", 0.0, 1, bad, two), DomainError);
    const std::vector<std::size_t> gap{4, 16};
    CHECK_THROWS_AS(make_rate_series("x", 0.0, 1, gap, two), DomainError);
    const std::vector<std::size_t> one{4};
    const std::vector<double> onev{1.0};
    CHECK_THROWS_AS(make_rate_series("x", 0.0, 1, one, onev), DomainError);
    const auto s = planted(4, 64, [](double) { return 0.5; });
    CHECK(s.n_max() == 64);
    CHECK(s.at(16) == 0.5);
    CHECK_THROWS_AS(s.at(24), DomainError);
}

TEST_CASE("constant cocycle series") {
    const auto fam = constant_family(RealMatrix::diagonal({2.0, 0.5}));
    const auto s1 = rate_series(fam, 0.0, 1, 64, 4);
    const auto s2 = rate_series(fam, 0.0, 2, 64, 4);
    CHECK(s1.rows.size() == 5);
    CHECK(s1.rows.front().n == 4);
    for (std::size_t k = 0; k < s1.rows.size(); ++k) {
        CHECK(s1.rows[k].lambda == doctest::Approx(kLn2).epsilon(1e-15));
        CHECK(s1.rows[k].lambda >= s2.rows[k].lambda);
    }
    CHECK(s1.proxy_limit == doctest::Approx(kLn2).epsilon(1e-15));
    CHECK(extrapolate_exponent(s1) == doctest::Approx(kLn2).epsilon(1e-15));
    CHECK(check_C_over_n(s1).c_est < 1e-13);
    for (const auto& r : r_sequence(s1).rows) CHECK(r.r < 1e-13);
    const auto v = dichotomy(s1, 0.05, 4);
    CHECK(v.classification == Convergence::exponential);
    CHECK_FALSE(v.trigger.has_value());
    CHECK_THROWS_AS(rate_series(fam, 0.0, 1, 48, 4), DomainError);
    CHECK_THROWS_AS(rate_series(fam, 0.0, 3, 64, 4), DomainError);
}

TEST_CASE("planted 1/n law") {
    const double a = 1.0, star = 0.3;
    const auto s = planted(4, 4096, [&](double n) { return star + a / n; });
    CHECK(std::abs(extrapolate_exponent(s) - star) < 1e-15);
    CHECK(std::abs(check_C_over_n(s).c_est - a) < 1e-12);
    const auto r = r_sequence(s);
    for (const auto& row : r.rows) CHECK(std::abs(row.r - a) < 1e-12);
    CHECK(r.bounded);

    const auto v = dichotomy(s, 0.05, 16);
    CHECK(v.classification == Convergence::one_over_n);
    REQUIRE(v.trigger.has_value());
    CHECK(*v.trigger >= 16);
    CHECK(v.cascade_holds);
    CHECK(v.cascade_rungs >= 1);

    const auto neg = planted(4, 4096, [&](double n) { return star - 2.5 / n; });
    CHECK(std::abs(check_C_over_n(neg).c_est - 2.5) < 1e-12);
}

TEST_CASE("planted exponential law") {
    const auto s = planted(4, 4096, [](double n) { return 0.3 + std::exp(-0.1 * n); });
    const auto v = dichotomy(s, 0.05, 16);
    CHECK(v.classification == Convergence::exponential);
    CHECK_FALSE(v.trigger.has_value());
    CHECK(v.c1_est > 0.05);
    for (const auto& ev : v.evidence) {
        if (ev.ell < 16) continue;
        CHECK(ev.second_difference <= ev.threshold);
    }
    CHECK_THROWS_AS(dichotomy(planted(4, 32, [](double) { return 1.0; }), 0.05, 16), DomainError);
}

TEST_CASE("Schrodinger series (pinned)") {
    const auto fam = schrodinger();
    const auto s = rate_series(fam, 0.0, 1, 4096, 1024);
    const double pinned[] = {1.1905521815944482, 1.1450918382845234, 1.1219150852748314, 1.1100853753412245,
                             1.1042581805364251, 1.1014753156233339, 1.1000835047972197, 1.0993302065357162,
                             1.0989670464516348, 1.0987909196125498, 1.0987027857795528};
    REQUIRE(s.rows.size() == 11);
    for (std::size_t k = 0; k < 11; ++k) CHECK(s.rows[k].lambda == doctest::Approx(pinned[k]).epsilon(1e-12));
    const double top = s.rows.back().lambda, below = s.rows[9].lambda;
    CHECK(s.proxy_limit == doctest::Approx(2.0 * top - below).epsilon(1e-15));
    CHECK(s.proxy_limit == doctest::Approx(1.0986146519465558).epsilon(1e-12));
    CHECK(s.proxy_scale == 4096);
    CHECK(check_C_over_n(s).c_est == doctest::Approx(0.37602632976995665).epsilon(1e-9));
    const auto r = r_sequence(s);
    CHECK(r.bounded);
    CHECK(r.tail_start == 64);
    CHECK(r.tail_max == doctest::Approx(0.38568870988979143).epsilon(1e-9));
    CHECK(r.tail_median == doctest::Approx(0.36085197320085172).epsilon(1e-9));
}

TEST_CASE("gap monitor") {
    const auto c = constant_family(RealMatrix::diagonal({2.0, 1.0, 0.5}));
    const double es[] = {0.0, 1.0};
    for (const auto& g : gap_monitor(c, es, 8, 1e-3, 4)) {
        CHECK(g.min_gap == doctest::Approx(kLn2).epsilon(1e-14));
        CHECK(g.pass);
    }
    const auto s = schrodinger(ParameterGrid::linspace(-0.5, 0.5, 3));
    const double win[] = {-0.5, 0.0, 0.5};
    for (const auto& g : gap_monitor(s, win, 64, 1e-3, 128)) {
        CHECK(g.min_gap == doctest::Approx(2.0 * g.exponents[0]).epsilon(1e-9));
        CHECK(g.min_gap > 2.0);
        CHECK(g.min_gap >= 0.0);
    }
    for (const auto& g : gap_monitor(s, win, 64, 10.0, 128)) CHECK_FALSE(g.pass);
    const auto one = CocycleFamily::create(ShiftBase::golden(), ConstantCocycle{RealMatrix{{3.0}}}, ParameterGrid::single(0.0));
    CHECK(std::isinf(gap_monitor(one, es, 4, 1.0, 2).front().min_gap));
}

TEST_CASE("crude continuity check") {
    const auto s = schrodinger(ParameterGrid::linspace(0.0, 1e-3, 2));
    CHECK_THROWS_AS(crude_continuity_check(s, 0.1, 0.1, 8, 16), DomainError);
    const auto c = constant_family(RealMatrix::diagonal({2.0, 0.5}));
    const auto cc = crude_continuity_check(c, 0.0, 0.5, 16, 8);
    CHECK(std::isinf(cc.log_lhs));
    CHECK(cc.log_lhs < 0.0);
    CHECK(cc.pass());
    const auto r = crude_continuity_check(s, 0.0, 1e-3, 64, 256);
    CHECK(r.pass());
    CHECK(r.log_lhs == doctest::Approx(68.160787470220171).epsilon(1e-9));
    CHECK(r.log_rhs == doctest::Approx(289.87362856201901).epsilon(1e-9));
    CHECK(r.holder_constant == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("holder estimate on diag(exp(cE), exp(-cE))") {
    for (double c : {1.0, 2.5}) {
        const auto fam = CocycleFamily::create(ShiftBase::golden(), DiagonalExpCocycle{{0.0, 0.0}, {c, -c}},
                                               ParameterGrid::linspace(0.1, 1.1, 2));
        HolderOptions o;
        o.grid_size = 8;
        const auto h = holder_estimate(fam, 1, 0.1, 1.1, 32, o);
        CHECK(h.verdict == "fitted");
        CHECK(std::abs(h.gamma_est - 1.0) < 0.01);
        CHECK(h.pairs_used + h.pairs_excluded == 32);
        CHECK(h.kappa_min > 0.0);
        CHECK(h.beta0_check.pass());
        double lo = 1e300, hi = 0.0;
        for (const auto& p : h.pairs) {
            lo = std::min(lo, p.distance);
            hi = std::max(hi, p.distance);
        }
        CHECK(hi / lo >= 1e3);
    }
}

TEST_CASE("holder estimate: zero variation, refusal and determinism") {
    const auto c = CocycleFamily::create(ShiftBase::golden(), DiagonalExpCocycle{{0.3, -0.3}, {0.0, 0.0}},
                                         ParameterGrid::linspace(0.0, 1.0, 2));
    HolderOptions o;
    o.grid_size = 16;
    const auto h = holder_estimate(c, 1, 0.0, 1.0, 16, o);
    CHECK(h.verdict == "zero variation");
    CHECK(h.pairs_excluded == o.pair_budget);

    const auto s = schrodinger(ParameterGrid::linspace(-0.5, 0.5, 2));
    HolderOptions strict;
    strict.kappa = 10.0;
    strict.grid_size = 32;
    try {
        holder_estimate(s, 1, -0.5, 0.5, 16, strict);
        FAIL("expected a gap refusal");
    } catch (const GapRefusalError& e) {
        CHECK_FALSE(e.records().empty());
        CHECK_FALSE(e.records().front().pass);
    }

    HolderOptions o2;
    o2.grid_size = 64;
    o2.pair_budget = 8;
    const auto a = holder_estimate(s, 1, -0.5, 0.5, 32, o2);
    const auto b = holder_estimate(s, 1, -0.5, 0.5, 32, o2, ExecutionOptions{3});
    CHECK(a.gamma_est == b.gamma_est);
    o2.seed = 99;
    const auto d = holder_estimate(s, 1, -0.5, 0.5, 32, o2);
    CHECK(d.pairs.front().e != a.pairs.front().e);
}

TEST_CASE("holder estimate on the Schrodinger window (regression pin)") {
    const auto s = schrodinger(ParameterGrid::linspace(-0.5, 0.5, 3));
    HolderOptions o;
    o.grid_size = 256;
    const auto h = holder_estimate(s, 1, -0.5, 0.5, 128, o);
    CHECK(h.verdict == "fitted");
    CHECK(h.gamma_est == doctest::Approx(0.11536615463426653).epsilon(1e-9));
    CHECK(h.residual == doctest::Approx(0.76742443629081991).epsilon(1e-9));
    CHECK(h.kappa_min > 2.0);
    CHECK(h.beta0_check.pass());
    CHECK_FALSE(h.stretched.has_value());
}

TEST_CASE("stretched modulus on a two-torus") {
    const auto f = CocycleFamily::create(ShiftBase::standard(2), SchrodingerCocycle{3.0},
                                         ParameterGrid::linspace(-0.5, 0.5, 2), 1.0, 8);
    HolderOptions o;
    o.pair_budget = 16;
    o.grid_size = 16;
    const auto h = holder_estimate(f, 1, -0.5, 0.5, 32, o);
    REQUIRE(h.stretched.has_value());
    CHECK(h.stretched->sigma > 0.0);
    CHECK(h.stretched->sigma < 1.0);
}

TEST_CASE("scale knobs") {
    const auto k = ScaleKnobs::from_kappa(1e-2);
    CHECK(k.delta0 == doctest::Approx(1e-3));
    CHECK(k.delta1 == doctest::Approx(1e-7));
    CHECK(k.n0 == 64);
    CHECK(coupled_scale(100, 0.01) == 2);
    CHECK_THROWS_AS(coupled_scale(10, 0.0), DomainError);
    CHECK_THROWS_AS(coupled_scale(100000, 1.0), DomainError);
}
