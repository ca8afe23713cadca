#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skewdiff/error.hpp"
#include "skewdiff/media.hpp"
#include "skewdiff/rng.hpp"

using namespace skewdiff;

TEST_CASE("construction invariants") {
    CHECK_THROWS_AS(InterfaceMedium(0.0, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(InterfaceMedium(1.0, 1e-13, 0.5), ConfigError);
    CHECK_THROWS_AS(InterfaceMedium(1.0, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(InterfaceMedium(1.0, 1.0, 1.0), ConfigError);
    CHECK_NOTHROW(InterfaceMedium(1e-12, 1.0, 0.5));
    CHECK_THROWS_AS(MultiMedium({1.0, 1.0}, {1, 1, 1}), ConfigError);
    CHECK_THROWS_AS(MultiMedium({0.0}, {1.0}), ConfigError);
    CHECK_THROWS_AS(MultiMedium({0.0}, {1.0, -1.0}), ConfigError);
}

TEST_CASE("interface point belongs to the minus side") {
    InterfaceMedium m(4.0, 1.0, 0.5);
    CHECK(m.diffusivity(0.0) == 1.0);
    CHECK(side_of(0.0) == Side::minus);
    MultiMedium mm({-1.0, 1.0}, {1.0, 4.0, 9.0});
    CHECK(mm.diffusivity(-1.0) == 1.0);
    CHECK(mm.diffusivity(1.0) == 4.0);
    CHECK(mm.diffusivity(1.5) == 9.0);
}

TEST_CASE("alpha_of_lambda examples") {
    CHECK(alpha_of_lambda(InterfaceMedium(1, 1, 0.5)) == doctest::Approx(0.5));
    CHECK(alpha_of_lambda(InterfaceMedium(4, 1, 0.8)) == doctest::Approx(2.0 / 3.0));
    CHECK(alpha_of_lambda(InterfaceMedium(4, 1, 0.5)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("alpha_of_lambda is strictly increasing in lambda") {
    for (double dp : {0.1, 1.0, 25.0}) {
        double prev = 0.0;
        for (int i = 1; i < 1000; ++i) {
            const double a = alpha_of_lambda(dp, 1.0, i / 1000.0);
            CHECK(a > prev);
            CHECK(a < 1.0);
            prev = a;
        }
    }
}

TEST_CASE("conservative lambda composes to alpha*") {
    CHECK(conservative_lambda(1, 1) == 0.5);
    CHECK(conservative_lambda(4, 1) == doctest::Approx(0.8));
    for (double dp : {0.01, 0.5, 1.0, 4.0, 25.0, 100.0}) {
        for (double dm : {0.01, 1.0, 3.0}) {
            const auto m = InterfaceMedium::conservative(dp, dm);
            const double expected = std::sqrt(dp) / (std::sqrt(dp) + std::sqrt(dm));
            CHECK(std::fabs(alpha_of_lambda(m) - expected) <= 1e-14 * expected);
        }
    }
}

TEST_CASE("alpha_of_gamma matches alpha_of_lambda at lambda = 1/(2 - gamma)") {
    const InterfaceMedium base(4.0, 1.0, 0.5);
    CHECK(alpha_of_gamma(InterfaceMedium(2, 2, 0.5), 0.0) == doctest::Approx(0.5));
    CHECK(alpha_of_gamma(base, 0.75) == doctest::Approx(2.0 / 3.0));
    CHECK(lambda_of_gamma(0.0) == 0.5);
    CHECK_THROWS_AS(alpha_of_gamma(base, 1.0), ConfigError);
    CHECK_THROWS_AS(lambda_of_gamma(1.5), ConfigError);
    for (int i = 0; i < 100; ++i) {
        const double gamma = -20.0 + 20.99 * i / 99.0;
        const double a = alpha_of_gamma(base, gamma);
        const double b = alpha_of_lambda(base.d_plus(), base.d_minus(), lambda_of_gamma(gamma));
        CHECK(std::fabs(a - b) <= 1e-14 * a);
        CHECK(gamma_of_lambda(lambda_of_gamma(gamma)) == doctest::Approx(gamma));
    }
}

TEST_CASE("scale map") {
    InterfaceMedium m(4.0, 1.0, 0.5);
    CHECK(scale_map(m, 0.0) == 0.0);
    CHECK(scale_map(m, 2.0) == 4.0);
    CHECK(scale_map(m, -3.0) == -3.0);
    RandomStream rng(11, 0);
    for (int i = 0; i < 10000; ++i) {
        const double x = 20.0 * (rng.uniform() - 0.5);
        CHECK(scale_map_inverse(m, scale_map(m, x)) == doctest::Approx(x).epsilon(1e-15));
    }
}

TEST_CASE("multi-interface scale map is continuous and monotone") {
    MultiMedium mm({-1.0, 0.5, 2.0}, {1.0, 4.0, 0.25, 9.0});
    CHECK(scale_map(mm, 0.0) == 0.0);
    // 0 lies in the D = 4 piece: slope 2 there.
    CHECK(scale_map(mm, 0.1) == doctest::Approx(0.2));
    double prev = -1e300;
    for (int i = 0; i <= 4000; ++i) {
        const double b = -4.0 + 8.0 * i / 4000.0;
        const double x = scale_map(mm, b);
        CHECK(x > prev);
        prev = x;
        CHECK(scale_map_inverse(mm, x) == doctest::Approx(b).epsilon(1e-13));
    }
    // Continuity across each interface.
    for (double k : mm.scale_knots()) {
        CHECK(scale_map(mm, k - 1e-12) == doctest::Approx(scale_map(mm, k + 1e-12)).epsilon(1e-10));
    }
    CHECK(mm.alpha(0) == doctest::Approx(2.0 / 3.0));
    CHECK(mm.min_gap() == doctest::Approx(1.5));
}

TEST_CASE("speed and scale") {
    const auto c = speed_scale(InterfaceMedium::conservative(4.0, 1.0));
    CHECK(c.s_plus == doctest::Approx(0.25));
    CHECK(c.s_minus == doctest::Approx(1.0));
    CHECK(c.m_plus == doctest::Approx(2.0));
    CHECK(c.m_minus == doctest::Approx(2.0));

    const auto h = speed_scale(InterfaceMedium(1.0, 1.0, 0.5));
    CHECK(h.s_plus == doctest::Approx(h.s_minus));
    CHECK(h.m_plus == doctest::Approx(h.m_minus));
}

TEST_CASE("d/dm d/ds reproduces (1/2) D f'' and the lambda derivative jump") {
    // f(x) = c + a x + q x^2 on each side: d/ds f = f' / s', d/dm (f'/s') = f'' / (m' s').
    for (double lambda : {0.1, 0.37, 0.5, 0.9}) {
        const InterfaceMedium m(3.0, 0.7, lambda);
        const auto ss = speed_scale(m);
        const double q = 1.7;
        CHECK(2.0 * q / (ss.m_plus * ss.s_plus) == doctest::Approx(0.5 * m.d_plus() * 2.0 * q));
        CHECK(2.0 * q / (ss.m_minus * ss.s_minus) == doctest::Approx(0.5 * m.d_minus() * 2.0 * q));
        // Continuity of df/ds at 0 is lambda f'(0+) = (1 - lambda) f'(0-).
        const double fp_minus = 1.0;
        const double fp_plus = fp_minus * ss.s_plus / ss.s_minus;
        CHECK(lambda * fp_plus == doctest::Approx((1.0 - lambda) * fp_minus));
        // Feller's alpha formula recovers alpha(lambda).
        const double a = std::sqrt(ss.m_plus * ss.s_minus) /
                         (std::sqrt(ss.m_minus * ss.s_plus) + std::sqrt(ss.m_plus * ss.s_minus));
        CHECK(a == doctest::Approx(alpha_of_lambda(m)));
    }
}
