#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lyap/cocycle.hpp"
#include "oracles.hpp"

using namespace lyap;

namespace {

const double kLn2 = std::numbers::ln2;

CocycleFamily constant_family(RealMatrix m) {
    return CocycleFamily::create(ShiftBase::golden(), ConstantCocycle{std::move(m)}, ParameterGrid::single(0.0));
}

CocycleFamily schrodinger(double coupling, double e = 0.0) {
    return CocycleFamily::create(ShiftBase::golden(), SchrodingerCocycle{coupling}, ParameterGrid::single(e));
}

double norm_of(const ScaledProduct& p) { return p.log_scale; }

}  // namespace

TEST_CASE("shift base validation and advance") {
    CHECK_THROWS_AS(ShiftBase({0.5}), DomainError);
    CHECK_THROWS_AS(ShiftBase({1.5}), DomainError);
    CHECK_THROWS_AS(ShiftBase({0.0}), DomainError);
    CHECK_THROWS_AS(ShiftBase({0.25, 0.3}), DomainError);
    CHECK_NOTHROW(ShiftBase({std::sqrt(2.0) - 1.0}));
    const auto g = ShiftBase::golden();
    CHECK(g.omega()[0] == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-16));
    const auto s2 = ShiftBase::standard(2);
    CHECK(s2.omega()[0] == doctest::Approx(std::sqrt(2.0) - 1.0));
    CHECK(s2.omega()[1] == doctest::Approx(std::sqrt(3.0) - 1.0));
    const auto x = TorusPoint::on_circle(0.9);
    const auto y = g.advance(x, 1);
    CHECK(y[0] == doctest::Approx(0.9 + g.omega()[0] - 1.0));
    CHECK(y[0] >= 0.0);
    CHECK(y[0] < 1.0);
}

TEST_CASE("evaluate: constant and schrodinger substitution") {
    const auto fam = constant_family(RealMatrix::diagonal({2.0, 0.5}));
    CHECK(evaluate(fam, TorusPoint::on_circle(0.37), 5.0) == RealMatrix::diagonal({2.0, 0.5}));
    const auto s = schrodinger(1.0);
    const auto m = evaluate(s, TorusPoint::on_circle(0.0), 0.0);
    CHECK(m == RealMatrix{{2.0, -1.0}, {1.0, 0.0}});
    const auto m2 = evaluate(s, TorusPoint::on_circle(0.125), 0.3);
    CHECK(m2(0, 0) == doctest::Approx(2.0 * std::cos(2.0 * std::numbers::pi * 0.125) - 0.3).epsilon(1e-15));
    CHECK(determinant(m2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.dim() == 2);
    CHECK(s.kind() == "schrodinger");
}

TEST_CASE("evaluate: trig-poly matches a naive Fourier sum") {
    std::mt19937_64 rng(1234);
    const auto c0 = oracle::random_matrix(rng, 3) + RealMatrix::identity(3) * 6.0;
    std::vector<RealMatrix> cs{oracle::random_matrix(rng, 3), oracle::random_matrix(rng, 3)};
    std::vector<RealMatrix> ss{oracle::random_matrix(rng, 3)};
    const auto b = oracle::random_matrix(rng, 3);
    const auto fam = CocycleFamily::create(ShiftBase::golden(), TrigPolyCocycle{c0, cs, ss, b},
                                           ParameterGrid::single(0.2), 1.0, 16);
    const double x = 0.3141, e = 0.2;
    const auto got = evaluate(fam, TorusPoint::on_circle(x), e);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            long double ref = c0(i, j) + static_cast<long double>(e) * b(i, j);
            for (std::size_t k = 0; k < cs.size(); ++k)
                ref += cs[k](i, j) * std::cos(2.0L * std::numbers::pi_v<long double> * (k + 1) * x);
            for (std::size_t k = 0; k < ss.size(); ++k)
                ref += ss[k](i, j) * std::sin(2.0L * std::numbers::pi_v<long double> * (k + 1) * x);
            CHECK(std::abs(got(i, j) - static_cast<double>(ref)) < 1e-12);
        }
}

TEST_CASE("family construction rejects singular data") {
    CHECK_THROWS_AS(constant_family(RealMatrix::diagonal({1.0, 0.0})), SingularMatrixError);
    CHECK_THROWS_AS(CocycleFamily::create(ShiftBase::golden(), DiagonalExpCocycle{{1.0}, {1.0, 2.0}},
                                          ParameterGrid::single(0.0)),
                    DomainError);
    CHECK_THROWS_AS(CocycleFamily::create(ShiftBase::golden(), SchrodingerCocycle{1.0}, ParameterGrid::single(0.0), 1.5),
                    DomainError);
}

TEST_CASE("product orbit of a constant diagonal") {
    const auto fam = constant_family(RealMatrix::diagonal({2.0, 0.5}));
    const auto p = product_orbit(fam, TorusPoint::on_circle(0.0), 0.0, 10);
    CHECK(p.length == 10);
    CHECK(p.log_scale == doctest::Approx(10.0 * kLn2).epsilon(1e-15));
    CHECK(p.normalized(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.normalized(1, 1) == doctest::Approx(std::ldexp(1.0, -20)).epsilon(1e-14));
    CHECK(operator_norm(p.normalized) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("product orbit: n = 1 is the rescaled single factor") {
    const auto fam = schrodinger(1.7, 0.4);
    const auto x = TorusPoint::on_circle(0.21);
    const auto p = product_orbit(fam, x, 0.4, 1);
    const auto a = evaluate(fam, fam.base().advance(x, 1), 0.4);
    const double na = operator_norm(a);
    CHECK(p.log_scale == doctest::Approx(std::log(na)).epsilon(1e-15));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(p.normalized(i, j) - a(i, j) / na) < 1e-15);
}

TEST_CASE("product orbit matches an extended-precision triple product") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ue(-2.0, 2.0), ux(0.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        const double e = ue(rng), x = ux(rng);
        const auto fam = schrodinger(3.0, e);
        const auto p = product_orbit(fam, TorusPoint::on_circle(x), e, 3);
        const auto ref = oracle::schrodinger_product(3.0, fam.base().omega()[0], x, e, 3);
        const double scale = std::exp(p.log_scale);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                const double r = static_cast<double>(ref(i, j));
                CHECK(std::abs(scale * p.normalized(i, j) - r) <= 1e-12 * std::exp(p.log_scale));
            }
    }
}

TEST_CASE("log singular profile") {
    const auto fam = constant_family(RealMatrix::diagonal({2.0, 1.0, 0.5}));
    for (std::size_t n : {1u, 7u, 64u}) {
        const auto prof = log_singular_profile(fam, TorusPoint::on_circle(0.3), 0.0, n);
        CHECK(prof[0] == doctest::Approx(kLn2).epsilon(1e-14));
        CHECK(std::abs(prof[1]) < 1e-14);
        CHECK(prof[2] == doctest::Approx(-kLn2).epsilon(1e-14));
    }
    const auto s = schrodinger(3.0, 0.25);
    for (double x : {0.0, 0.1234, 0.77}) {
        const auto prof = log_singular_profile(s, TorusPoint::on_circle(x), 0.25, 64);
        CHECK(prof[0] >= prof[1]);
        const auto ref = oracle::schrodinger_product(3.0, s.base().omega()[0], x, 0.25, 64);
        // every factor has determinant 1, so sigma_2 = 1 / sigma_1
        const auto s1 = oracle::singular_values_2x2(ref).first;
        CHECK(std::abs(prof[0] - static_cast<double>(log(s1)) / 64.0) < 1e-8);
        CHECK(std::abs(prof[1] + static_cast<double>(log(s1)) / 64.0) < 1e-8);
    }
}

TEST_CASE("finite scale exponents: exact cases") {
    const auto fam = constant_family(RealMatrix::diagonal({2.0, 1.0, 0.5}));
    for (std::size_t m : {1u, 3u, 16u}) {
        const auto l = finite_scale_exponents(fam, 0.0, 5, m);
        CHECK(l[0] == doctest::Approx(kLn2).epsilon(1e-14));
        CHECK(std::abs(l[1]) < 1e-14);
        CHECK(l[2] == doctest::Approx(-kLn2).epsilon(1e-14));
    }
}

TEST_CASE("finite scale exponents: diag(exp(2 cos), exp(-2 cos)) orders the diagonal pointwise") {
    // sigma_1 = exp|S_n(x)| with S_n the Birkhoff sum of 2 cos(2 pi x), so
    // lambda_{1,n} = avg |S_n| / n, which tends to zero like 1/n but is not zero.
    const auto de = CocycleFamily::create(ShiftBase::golden(), DiagonalExpCocycle{{2.0, -2.0}, {0.0, 0.0}},
                                          ParameterGrid::single(0.0));
    const double w = de.base().omega()[0];
    double prev = 1e300;
    for (std::size_t n : {1u, 10u, 100u}) {
        const auto l = finite_scale_exponents(de, 0.0, n, 64);
        long double ref = 0.0L;
        for (std::size_t k = 0; k < 64; ++k) {
            long double sn = 0.0L;
            for (std::size_t j = 1; j <= n; ++j)
                sn += 2.0L * std::cos(2.0L * std::numbers::pi_v<long double> * (k / 64.0L + j * static_cast<long double>(w)));
            ref += std::abs(sn);
        }
        ref /= 64.0L * n;
        CHECK(std::abs(l[0] - static_cast<double>(ref)) < 1e-12);
        CHECK(std::abs(l[0] + l[1]) < 1e-12);
        CHECK(l[0] < prev);
        prev = l[0];
    }
}

TEST_CASE("finite scale exponents on a two-torus") {
    const auto fam = CocycleFamily::create(ShiftBase::standard(2), SchrodingerCocycle{2.0},
                                           ParameterGrid::single(0.0), 1.0, 8);
    const auto l = finite_scale_exponents(fam, 0.0, 32, 16);
    CHECK(l[0] > 0.0);
    CHECK(std::abs(l[0] + l[1]) < 1e-10);
}

TEST_CASE("cocycle relation, partial sums and the determinant sum rule") {
    const auto fam = schrodinger(2.5, 0.7);
    const auto& base = fam.base();
    for (double xv : {0.05, 0.5, 0.93}) {
        const auto x = TorusPoint::on_circle(xv);
        for (auto [n, m] : {std::pair{5u, 7u}, std::pair{16u, 16u}, std::pair{1u, 30u}}) {
            const double whole = norm_of(product_orbit(fam, x, 0.7, n + m));
            const double head = norm_of(product_orbit(fam, base.advance(x, m), 0.7, n));
            const double tail = norm_of(product_orbit(fam, x, 0.7, m));
            CHECK(whole <= head + tail + 1e-10);
        }
    }
    const std::size_t scales[] = {8, 32};
    const auto samples = compound_samples(fam, 0.7, scales, 64);
    const auto ladder = finite_scale_ladder(fam, 0.7, scales, 64);
    for (std::size_t s = 0; s < 2; ++s) {
        std::vector<double> top;
        for (const auto& pt : samples[s]) top.push_back(pt[0]);
        CHECK(std::abs(pairwise_mean(top) - ladder[s][0]) < 1e-10);
        CHECK(std::abs(ladder[s][0] + ladder[s][1]) < 1e-10);
        CHECK(ladder[s][0] >= ladder[s][1]);
    }
}

TEST_CASE("ladder and single-scale agree; threads do not change results") {
    const auto fam = schrodinger(3.0);
    const auto ladder = dyadic_ladder(16, 256);
    CHECK(ladder == std::vector<std::size_t>{16, 32, 64, 128, 256});
    const auto rows = finite_scale_ladder(fam, 0.0, ladder, 128);
    const auto rows4 = finite_scale_ladder(fam, 0.0, ladder, 128, ExecutionOptions{4});
    CHECK(rows == rows4);
    CHECK(finite_scale_exponents(fam, 0.0, 64, 128) == rows[2]);
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) CHECK(rows[k + 1][0] <= rows[k][0] + 1e-6);
}

TEST_CASE("QR cross-check is exact on simultaneously diagonal families") {
    const auto de = CocycleFamily::create(ShiftBase::golden(), DiagonalExpCocycle{{1.0, -0.5}, {0.3, -0.3}},
                                          ParameterGrid::single(0.4));
    for (std::size_t n : {256u, 512u}) {
        const auto a = finite_scale_exponents(de, 0.4, n, 64);
        const auto b = qr_exponents(de, 0.4, n, 64);
        for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(a[j] - b[j]) < 1e-6);
    }
    const auto c = constant_family(RealMatrix::diagonal({3.0, 1.0, 0.25}));
    const auto a = finite_scale_exponents(c, 0.0, 256, 4);
    const auto b = qr_exponents(c, 0.0, 256, 4);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(a[j] - b[j]) < 1e-12);
}

TEST_CASE("QR cross-check converges like 1/n on the Schrodinger family") {
    const auto fam = schrodinger(3.0);
    const double e256 = std::abs(finite_scale_exponents(fam, 0.0, 256, 64)[0] - qr_exponents(fam, 0.0, 256, 64)[0]);
    const double e1024 =
        std::abs(finite_scale_exponents(fam, 0.0, 1024, 64)[0] - qr_exponents(fam, 0.0, 1024, 64)[0]);
    CHECK(e256 * 256.0 < 2.0);
    CHECK(e1024 < e256);
}

TEST_CASE("lyapunov table ordering") {
    const auto fam = CocycleFamily::create(ShiftBase::golden(), SchrodingerCocycle{2.0},
                                           ParameterGrid::linspace(-1.0, 1.0, 3));
    const std::size_t scales[] = {8, 16};
    const auto t = lyapunov_table(fam, scales, 32);
    CHECK(t.rows.size() == 6);
    CHECK(t.grid_size == 32);
    for (const auto& r : t.rows) CHECK(r.exponents[0] >= r.exponents[1]);
}

TEST_CASE("Schrodinger exponent at n = 4096 (pinned, with spot audit)") {
    const auto fam = schrodinger(3.0);
    const auto l = finite_scale_exponents(fam, 0.0, 4096, 1024);
    CHECK(l[0] == doctest::Approx(1.0987027857795528).epsilon(1e-12));
    CHECK(l[0] >= std::log(3.0) - 0.01);
    const auto pts = torus_grid(1, 1024);
    for (std::size_t k : {0u, 129u, 300u, 511u, 512u, 700u, 901u, 1023u}) {
        const auto prof = log_singular_profile(fam, pts[k], 0.0, 4096);
        const auto ref = oracle::schrodinger_product(3.0, fam.base().omega()[0], pts[k][0], 0.0, 4096);
        CHECK(std::abs(prof[0] - static_cast<double>(oracle::log_norm(ref)) / 4096.0) < 1e-10);
    }
}

TEST_CASE("diophantine report") {
    const auto half = diophantine_report(0.5, 2.0, 100);
    CHECK(half.c_est == 0.0);
    CHECK(half.worst_n == 2);

    const double w = ShiftBase::golden().omega()[0];
    const auto r = diophantine_report(w, 2.0, 100000);
    const auto ref = oracle::diophantine_convergents(w, 2.0, 100000);
    CHECK(r.c_est > 0.0);
    CHECK(r.c_est == doctest::Approx(ref.first).epsilon(1e-12));
    CHECK(r.worst_n == ref.second);
    CHECK(r.c_est == doctest::Approx(0.22683914255869633).epsilon(1e-14));
    CHECK(diophantine_report(ShiftBase::golden(), 1000).c_est == doctest::Approx(r.c_est));

    // Raising a cannot lower any term with n >= 3, where log n > 1; the n = 2
    // term carries (log 2)^a < 1 and does decrease.
    const double s = std::sqrt(2.0) - 1.0;
    for (double a : {1.5, 2.0, 3.0}) {
        const auto lo = diophantine_report(s, a, 5000);
        const auto hi = diophantine_report(s, 2.0 * a, 5000);
        if (lo.worst_n >= 3 && hi.worst_n >= 3) CHECK(hi.c_est >= lo.c_est);
    }
    CHECK(diophantine_report(w, 4.0, 100000).c_est < r.c_est);
    CHECK_THROWS_AS(diophantine_report(w, 2.0, 1), DomainError);
}
