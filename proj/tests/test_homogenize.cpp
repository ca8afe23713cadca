#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skewdiff/error.hpp"
#include "skewdiff/homogenize.hpp"

using namespace skewdiff;

TEST_CASE("polynomial arithmetic") {
    const Polynomial p({1.0, 2.0});  // 1 + 2x
    const Polynomial q({0.0, 0.0, 3.0});
    CHECK((p * q)(2.0) == doctest::Approx(5.0 * 12.0));
    CHECK((p + q)(1.0) == 6.0);
    CHECK((p - q)(1.0) == 0.0);
    CHECK(p.antiderivative()(3.0) == doctest::Approx(3.0 + 9.0));
}

TEST_CASE("mean velocity") {
    CHECK(mean_velocity(LayeredCrossSection::isotropic(-1, 1, {}, {1.0}, VelocityProfile::constant(-1, 1, 2.5))) == 2.5);
    CHECK(mean_velocity(LayeredCrossSection::isotropic(-2, 2, {0.0}, {1.0, 3.0}, VelocityProfile::parabolic(-2, 2, 3.0))) ==
          doctest::Approx(2.0).epsilon(1e-15));
    CHECK(mean_velocity(LayeredCrossSection::isotropic(0, 1, {}, {1.0}, VelocityProfile::constant(0, 1, 0.0))) == 0.0);
    // off-centre parabola
    CHECK(mean_velocity(LayeredCrossSection::isotropic(1, 4, {}, {1.0}, VelocityProfile::parabolic(1, 4, 1.5))) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("g function") {
    const double r = 1.5, v0 = 2.0;
    const auto cs = LayeredCrossSection::isotropic(-r, r, {0.3}, {1.0, 2.0}, VelocityProfile::parabolic(-r, r, v0));
    CHECK(std::abs(g_function(cs, -r)) < 1e-15);
    CHECK(std::abs(g_function(cs, r)) < 1e-14);
    // int_{-R}^0 v0 (1 - s^2/R^2 - 2/3) / (2R) ds = v0 (R/3 - R/3) ... evaluated exactly:
    const double expect = v0 * (r - r / 3.0 - 2.0 * r / 3.0) / (2.0 * r);
    CHECK(g_function(cs, 0.0) == doctest::Approx(expect).epsilon(1e-12));
    const double y = -0.7;
    const double exact = v0 / (2 * r) * ((y + r) / 3.0 - (y * y * y + r * r * r) / (3 * r * r));
    CHECK(g_function(cs, y) == doctest::Approx(exact).epsilon(1e-13));
    const auto flat = LayeredCrossSection::isotropic(-1, 1, {}, {1.0}, VelocityProfile::constant(-1, 1, 4.0));
    CHECK(g_function(flat, 0.2) == 0.0);
    CHECK_THROWS_AS(g_function(cs, 2.0), ConfigError);
}

TEST_CASE("single-interface closed form") {
    for (auto [dp, dm, v0, r] : {std::array{2.0, 0.5, 1.0, 1.0}, std::array{1.0, 1.0, 3.0, 0.5},
                                 std::array{7.0, 0.25, 0.4, 2.5}, std::array{0.1, 10.0, 2.0, 1.0}}) {
        const auto cs = LayeredCrossSection::isotropic(-r, r, {0.0}, {dm, dp}, VelocityProfile::parabolic(-r, r, v0));
        const auto d = effective_dispersion(cs);
        CHECK(d.d_bar == doctest::Approx(single_interface_dispersion(dp, dm, v0, r)).epsilon(1e-12));
        CHECK(d.v_bar == doctest::Approx(2.0 * v0 / 3.0).epsilon(1e-14));
        CHECK(d.terms.size() == 2);
        CHECK(d.quadrature_error == 0.0);
    }
}

TEST_CASE("zero velocity gives the arithmetic mean exactly") {
    LayeredCrossSection cs;
    cs.a = 0.0;
    cs.b = 3.0;
    cs.layer_bounds = {0.0, 0.5, 2.0, 3.0};
    cs.d1 = {1.0, 2.0, 4.0};
    cs.d2 = {0.3, 0.7, 9.0};
    cs.velocity = VelocityProfile::constant(0.0, 3.0, 0.0);
    CHECK(effective_dispersion(cs).d_bar == (1.0 * 0.5 + 2.0 * 1.5 + 4.0 * 1.0) / 3.0);
}

TEST_CASE("invariances and lower bound") {
    LayeredCrossSection cs;
    cs.a = -1.0;
    cs.b = 2.0;
    cs.layer_bounds = {-1.0, -0.2, 0.9, 2.0};
    cs.d1 = {1.0, 0.3, 2.0};
    cs.d2 = {0.5, 1.5, 0.8};
    cs.velocity = VelocityProfile({-1.0, 0.5, 2.0}, {Polynomial({1.0, 0.5, -0.3}), Polynomial({0.2, 1.0})});
    const auto d = effective_dispersion(cs);
    double arith = 0.0;
    for (const auto& t : d.terms) arith += t.longitudinal;
    CHECK(d.d_bar >= arith);

    LayeredCrossSection mirror = cs;
    mirror.layer_bounds = {-1.0, 0.1, 1.2, 2.0};
    mirror.d1 = {2.0, 0.3, 1.0};
    mirror.d2 = {0.8, 1.5, 0.5};
    mirror.velocity = cs.velocity.reflected();
    CHECK(effective_dispersion(mirror).d_bar == doctest::Approx(d.d_bar).epsilon(1e-12));
    CHECK(std::abs(g_function(mirror, 2.0)) < 1e-13);

    // splitting a layer into two identical ones changes nothing
    LayeredCrossSection split = cs;
    split.layer_bounds = {-1.0, -0.2, 0.4, 0.9, 2.0};
    split.d1 = {1.0, 0.3, 0.3, 2.0};
    split.d2 = {0.5, 1.5, 1.5, 0.8};
    CHECK(effective_dispersion(split).d_bar == doctest::Approx(d.d_bar).epsilon(1e-12));
}

TEST_CASE("sampled profiles") {
    std::vector<double> x, v;
    for (int i = 0; i <= 64; ++i) {
        x.push_back(-1.0 + i / 32.0);
        v.push_back(std::cos(x.back()));
    }
    const auto profile = VelocityProfile::sampled(x, v);
    REQUIRE(profile.coarse() != nullptr);
    const auto cs = LayeredCrossSection::isotropic(-1, 1, {0.0}, {1.0, 2.0}, profile);
    CHECK(mean_velocity(cs) == doctest::Approx(std::sin(1.0)).epsilon(1e-8));
    const auto d = effective_dispersion(cs);
    CHECK(d.quadrature_error > 0.0);
    CHECK(d.quadrature_error < 1e-8);
    // parabola samples reproduce the exact result
    std::vector<double> pv;
    for (double xi : x) pv.push_back(1.0 - xi * xi);
    const auto exact = LayeredCrossSection::isotropic(-1, 1, {0.0}, {0.5, 2.0}, VelocityProfile::sampled(x, pv));
    CHECK(effective_dispersion(exact).d_bar == doctest::Approx(single_interface_dispersion(2.0, 0.5, 1.0, 1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(VelocityProfile::sampled({0.0, 1.0}, {1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(VelocityProfile::sampled({0.0, 1.0, 3.0}, {1.0, 1.0, 1.0}), ConfigError);
}

TEST_CASE("validation") {
    LayeredCrossSection cs;
    cs.a = 0.0;
    cs.b = 1.0;
    cs.layer_bounds = {0.0, 1.0};
    cs.d1 = {1.0};
    cs.d2 = {-1.0};
    cs.velocity = VelocityProfile::constant(0.0, 1.0, 1.0);
    CHECK_THROWS_AS(cs.validate(), ConfigError);
    cs.d2 = {1.0};
    cs.velocity = VelocityProfile::constant(0.0, 2.0, 1.0);
    CHECK_THROWS_AS(cs.validate(), ConfigError);
    cs.velocity = VelocityProfile::constant(0.0, 1.0, 1.0);
    cs.layer_bounds = {0.0, 0.5, 0.5, 1.0};
    CHECK_THROWS_AS(cs.validate(), ConfigError);
}

TEST_CASE("cross-section from config") {
    const auto doc = ConfigDoc::parse(
        "[layers]\n"
        "a = -1\nb = 1\nbounds = -1 0 1   # one interface\n"
        "d = 0.5 2\n"
        "velocity = parabolic 1\n");
    const auto cs = cross_section_from_config(doc);
    CHECK(effective_dispersion(cs).d_bar == doctest::Approx(single_interface_dispersion(2.0, 0.5, 1.0, 1.0)).epsilon(1e-12));
    const auto poly = cross_section_from_config(ConfigDoc::parse(
        "[layers]\na = 0\nb = 2\nd1 = 1\nd2 = 1\nvelocity_breaks = 0 1 2\nvelocity_coeffs = 1 ; 0 1\n"));
    CHECK(mean_velocity(poly) == doctest::Approx((1.0 + 1.5) / 2.0));
    CHECK_THROWS_AS(cross_section_from_config(ConfigDoc::parse("[layers]\na = 0\nb = 1\nd = 1\nvelocity = wavy 2\n")),
                    ConfigError);
}

TEST_CASE("long-time Monte Carlo variance") {
    SUBCASE("no shear: plain diffusion") {
        const auto cs = LayeredCrossSection::isotropic(-1, 1, {}, {0.7}, VelocityProfile::constant(-1, 1, 0.0));
        SimConfig cfg;
        cfg.n_paths = 20000;
        cfg.dt = 0.01;
        cfg.horizon = 2.0;
        cfg.seed = 3;
        const auto est = mc_longtime_variance(cs, cfg);
        CHECK(est.contains(0.7));
    }
    SUBCASE("single interface, reduced scale") {
        const auto cs = LayeredCrossSection::isotropic(-1, 1, {0.0}, {0.5, 2.0}, VelocityProfile::parabolic(-1, 1, 1.0));
        SimConfig cfg;
        cfg.n_paths = 1000;
        cfg.horizon = 20.0 / 0.5;
        cfg.dt = 1.0 / (144.0 * 4.0);
        cfg.seed = 5;
        const auto est = mc_longtime_variance(cs, cfg);
        INFO("estimate " << est.value << " +- " << est.halfwidth);
        CHECK(est.contains(single_interface_dispersion(2.0, 0.5, 1.0, 1.0)));
        cfg.dt *= 2;
        CHECK_THROWS_AS(mc_longtime_variance(cs, cfg), ConfigError);
    }
}
