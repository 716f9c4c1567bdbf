#include "critwave/errors.hpp"
#include "critwave/exponents.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace critwave;

namespace {

// Bisection on γ(·, n) over (1, 10): independent of the closed form.
double gamma_root_by_bisection(int n) {
    double lo = 1.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gamma(mid, n) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ConstantLedger random_ledger(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_n(2, 8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams mp;
    mp.n = pick_n(rng);
    // keep n - (n-1)p/2 > 0 so the ledger is defined
    const double p_max = std::min(2.0 * mp.n / (mp.n - 1.0), 4.0);
    mp.p = 1.05 + (p_max - 1.1) * u(rng);
    mp.R = 0.2 + 3.0 * u(rng);
    mp.epsilon = 0.05 + 2.0 * u(rng);
    const double C = std::exp(-4.0 + 8.0 * u(rng));
    const double delta = (mp.p - 1.0) / 2.0 * (0.05 + 0.9 * u(rng));
    return make_ledger(mp, C, delta);
}

} // namespace

TEST_CASE("gamma matches the worked values") {
    CHECK(gamma(2.0, 4) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(gamma(1.0, 5) == doctest::Approx(4.0));
    CHECK(gamma(1.5, 4) == doctest::Approx(2.75));
    CHECK_THROWS_AS(gamma(2.0, 1), ParameterError);
}

TEST_CASE("critical exponent closed form") {
    CHECK(std::abs(p_crit(4) - 2.0) < 1e-12);
    CHECK(p_crit(3) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
    CHECK(p_crit(2) == doctest::Approx((3.0 + std::sqrt(17.0)) / 2.0).epsilon(1e-14));
    for (int n = 2; n <= 10; ++n) {
        CAPTURE(n);
        CHECK(std::abs(gamma(p_crit(n), n)) < 1e-10);
        CHECK(p_crit(n) == doctest::Approx(gamma_root_by_bisection(n)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(p_crit(1), ParameterError);
}

TEST_CASE("critical balance and the exponent relation at p_crit") {
    for (int n = 4; n <= 10; ++n) {
        const double p = p_crit(n);
        const auto [a, q] = odi_exponents(n, p);
        CAPTURE(n);
        CHECK(std::abs((p - 1.0) * a - (q - 2.0)) < 1e-10);
        CHECK(std::abs(n * p - (n - 1) * p * p / 2.0 - ((n - 1) * p / 2.0 - 1.0)) < 1e-10);
    }
    const auto [a4, q4] = odi_exponents(4, 2.0);
    CHECK(a4 == 2.0);
    CHECK(q4 == 4.0);
    const auto [a5, q5] = odi_exponents(5, 1.0);
    CHECK(a5 == 4.0);
    CHECK(q5 == 0.0);
    ModelParams degenerate;
    degenerate.n = 5;
    degenerate.p = 1.5;
    CHECK_FALSE(degenerate.is_critical());
    degenerate.n = 4;
    degenerate.p = 2.0;
    CHECK(degenerate.is_critical());
}

TEST_CASE("a_j sequence: values, recursion, bound") {
    CHECK(a_seq(1) == 2);
    CHECK(a_seq(2) == 11);
    CHECK(a_seq(3) == 47);
    for (int j = 1; j < 30; ++j) CHECK(a_seq(j + 1) == 4 * a_seq(j) + 3);
    for (int j = 1; j <= 30; ++j) CHECK(a_seq(j) <= 3 * (std::int64_t{1} << (2 * j)));
    CHECK_THROWS_AS(a_seq(0), ParameterError);
}

TEST_CASE("partial sums S(j)") {
    CHECK(s_partial(1, 2.0) == 0.0);
    CHECK(s_partial(3, 2.0) == doctest::Approx(1.0));
    CHECK(s_inf(2.0) == doctest::Approx(2.0));
    CHECK(s_partial(200, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
    for (double p : {1.1, 1.5, 2.0, 3.7}) {
        double prev = 0.0;
        for (int j = 1; j <= 400; ++j) {
            const double s = s_partial(j, p);
            CHECK(s >= prev);
            CHECK(s <= s_inf(p) * (1.0 + 1e-12));
            prev = s;
        }
    }
}

TEST_CASE("unit ball volumes against closed forms") {
    const double pi = std::numbers::pi;
    CHECK(unit_ball_volume(2) == doctest::Approx(pi).epsilon(1e-14));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
    CHECK(unit_ball_volume(4) == doctest::Approx(pi * pi / 2.0).epsilon(1e-14));
    CHECK(unit_ball_volume(5) == doctest::Approx(8.0 * pi * pi / 15.0).epsilon(1e-14));
    CHECK(unit_ball_volume(6) == doctest::Approx(pi * pi * pi / 6.0).epsilon(1e-14));
    // V_n = 2π/n · V_{n-2}
    for (int n = 4; n <= 10; ++n)
        CHECK(unit_ball_volume(n) == doctest::Approx(2.0 * pi / n * unit_ball_volume(n - 2)).epsilon(1e-13));
    CHECK(unit_sphere_area(4) == doctest::Approx(2.0 * pi * pi).epsilon(1e-14));
}

TEST_CASE("ledger for n=4, p=2") {
    ModelParams mp;
    mp.n = 4;
    mp.p = 2.0;
    mp.R = 1.0;
    mp.epsilon = 1.0;
    const ConstantLedger L = make_ledger(mp, 1.0, 0.25);
    CHECK(L.Cp == doctest::Approx(2048.0));
    CHECK(L.D == doctest::Approx(18.0));
    CHECK(L.C1 == doctest::Approx(1.0 / 108.0));
    CHECK(L.B == doctest::Approx(2.0 / (std::numbers::pi * std::numbers::pi)));
    // hand evaluation: {2^{-2}/2 · sqrt(B/3) · (1 - 2^{-1/2})}^{-2}
    const double B = 2.0 / (std::numbers::pi * std::numbers::pi);
    const double base = 0.25 / 2.0 * std::sqrt(B / 3.0) * (1.0 - 1.0 / std::sqrt(2.0));
    CHECK(L.K0 == doctest::Approx(1.0 / (base * base)).epsilon(1e-12));
    CHECK(L.K0 == doctest::Approx(1.10e4).epsilon(0.01));
    // C0 = (C / (2^{3+5} 3^7 2)) with p-1 = 1
    CHECK(L.C0 == doctest::Approx(1.0 / (256.0 * 2187.0 * 2.0)).epsilon(1e-12));
    CHECK(L.S_inf == doctest::Approx(2.0));
    CHECK(L.a == 2.0);
    CHECK(L.q == 4.0);
    for (double v : {L.C0, L.Cp, L.C1, L.D, L.S_inf, L.B, L.K0, L.E}) CHECK(v > 0.0);
}

TEST_CASE("ledger rejects bad inputs") {
    ModelParams mp;
    mp.n = 4;
    mp.p = 2.0;
    CHECK_THROWS_AS(make_ledger(mp, 1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(make_ledger(mp, 1.0, 0.5), ParameterError);
    CHECK_THROWS_AS(make_ledger(mp, 0.0, 0.25), ParameterError);
    mp.p = 1.0;
    CHECK_THROWS_AS(make_ledger(mp, 1.0, 0.1), ParameterError);
}

TEST_CASE("C_j closed form versus recursion") {
    ModelParams mp;
    mp.n = 4;
    mp.p = 2.0;
    mp.epsilon = 1.0;
    const ConstantLedger L = make_ledger(mp, 1.0, 0.25);
    CHECK(log_c_j(1, L) == doctest::Approx(L.log_C1).epsilon(1e-14));
    // one step of C_{j+1} = C0^{p-1} C_j^p / C_p^j
    const double c2 = (L.p - 1.0) * std::log(L.C0) + L.p * L.log_C1 - std::log(L.Cp);
    CHECK(log_c_j(2, L) == doctest::Approx(c2).epsilon(1e-12));
    CHECK(log_c_j(5, L) == doctest::Approx(log_c_j_recursive(5, L)).epsilon(1e-9));

    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const ConstantLedger R = random_ledger(rng);
        for (int j = 1; j <= 20; ++j) {
            const double closed = log_c_j(j, R);
            const double rec = log_c_j_recursive(j, R);
            const double scale = std::max(1.0, std::abs(closed));
            CHECK(std::abs(closed - rec) / scale <= 1e-9);
        }
    }
}

TEST_CASE("K_j weight") {
    ModelParams mp;
    mp.n = 4;
    mp.p = 2.0;
    mp.epsilon = 1.0;
    const ConstantLedger L = make_ledger(mp, 1.0, 0.25);
    const double t = 50.0;
    // substituting the definition of L_j reproduces the stated expression
    const double lk = log_k_weight(3, t, L);
    const double expect = 4.0 * log_l_j(3, t, L) - 3.0 * std::log(16.0) - std::log(L.C0 * L.D) -
                          std::log(std::log(std::sqrt(t)));
    CHECK(lk == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(log_k_weight(1, 1.0, L), ParameterError);
    CHECK_THROWS_AS(log_k_weight(1, 0.5, L), ParameterError);

    // At ε^{p(p-1)} log t = E the weight L_j(t) is at least e for all j.
    // E does not depend on ε, so pick ε that puts log t at 500.
    ModelParams at = mp;
    at.epsilon = std::sqrt(L.E / 500.0);
    const ConstantLedger La = make_ledger(at, 1.0, 0.25);
    const double tt = std::exp(La.E / std::pow(at.epsilon, 2.0));
    for (int j = 1; j <= 40; ++j) CHECK(log_l_j(j, tt, La) >= 1.0 - 1e-9);

    // With log L_j(t) > 0 the weight diverges in j.
    ConstantLedger big = L;
    big.log_C1 = 40.0;
    big.C1 = std::exp(40.0);
    double prev = -1e300;
    for (int j = 5; j <= 30; ++j) {
        const double v = log_k_weight(j, 1e4, big);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(prev > 1e6);
}

TEST_CASE("lifespan bounds") {
    ConstantLedger L;
    L.E = 1.0;
    L.p = 2.0;
    const auto b = lifespan_bound(L, 1.0);
    CHECK(b.T0 == doctest::Approx(std::exp(1.0)));
    CHECK(b.T_upper == doctest::Approx(std::exp(2.0)));
    for (double eps : {0.01, 0.3, 1.0, 4.0}) {
        const auto c = lifespan_bound(L, eps);
        CHECK(c.log_T_upper == doctest::Approx(2.0 * c.log_T0));
        // n=4, p=2: log T_upper ∝ ε^{-2}
        CHECK(c.log_T_upper * eps * eps == doctest::Approx(2.0));
    }
    const auto tiny = lifespan_bound(L, 1e-3);
    CHECK(std::isinf(tiny.T0));
    CHECK(std::isfinite(tiny.log_T0));
    CHECK_THROWS_AS(lifespan_bound(L, 0.0), ParameterError);
}

TEST_CASE("M-equivalence") {
    const auto eq = m_equiv(2.0, 2.0, 1.0);
    CHECK(eq.direct);
    CHECK(eq.rearranged);
    const auto yes = m_equiv(5.0, 2.0, 1.0);
    CHECK(yes.direct);
    CHECK(yes.rearranged);
    const auto no = m_equiv(1.9, 2.0, 1.0);
    CHECK_FALSE(no.direct);
    CHECK_FALSE(no.rearranged);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        const double R = 0.1 + 5.0 * u(rng);
        const double M = 0.1 + 20.0 * u(rng);
        // half the draws sit on a tiny band around the boundary t - ρ = M R
        const double x = (i % 2 == 0) ? 40.0 * u(rng) : M * R * (1.0 + 1e-9 * (u(rng) - 0.5));
        const auto r = m_equiv(x, M, R);
        // exact-arithmetic ties can flip either side by one ulp; skip those
        if (std::abs(x - M * R) < 1e-12 * M * R) continue;
        if (r.direct != r.rearranged) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("K0 monotonicity") {
    const double p = 2.0, q = 4.0, a = 2.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double B = 0.05; B < 20.0; B *= 1.3) {
        const double k = k0(B, q, a, p, 0.25);
        CHECK(k <= prev);
        prev = k;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double delta = 0.01; delta < 0.5; delta += 0.01) {
        const double k = k0(1.0, q, a, p, delta);
        CHECK(k <= prev);
        prev = k;
    }
    CHECK_THROWS_AS(k0(1.0, q, a, p, 0.5), ParameterError);
}

TEST_CASE("model parameter validation") {
    ModelParams mp;
    CHECK_NOTHROW(mp.validate());
    mp.epsilon = 0.0;
    CHECK_NOTHROW(mp.validate());
    mp.epsilon = -1.0;
    CHECK_THROWS_AS(mp.validate(), ParameterError);
    mp = {};
    mp.n = 1;
    CHECK_THROWS_AS(mp.validate(), ParameterError);
    mp = {};
    mp.p = 1.0;
    CHECK_THROWS_AS(mp.validate(), ParameterError);
    mp = {};
    mp.R = 0.0;
    CHECK_THROWS_AS(mp.validate(), ParameterError);
    mp = {};
    mp.profile.weight_g = -1.0;
    CHECK_THROWS_AS(mp.validate(), ParameterError);
    mp.profile.diagnostic_signed = true;
    CHECK_NOTHROW(mp.validate());
}
