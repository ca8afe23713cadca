#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "skewdiff/densities.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/quadrature.hpp"
#include "skewdiff/rng.hpp"
#include "skewdiff/special.hpp"

using namespace skewdiff;

namespace {

// Quadrature oracle over the real line, split at the interface and the start point.
double total_mass(const std::function<double(double)>& p, double x, double spread) {
    const std::array<double, 2> kinks{0.0, x};
    return integrate_split(p, std::min(x, 0.0) - 14.0 * spread, std::max(x, 0.0) + 14.0 * spread, kinks, 1e-12).value;
}

}  // namespace

TEST_CASE("time must be positive") {
    InterfaceMedium m(1, 1, 0.5);
    CHECK_THROWS_AS(physical_density(m, 0.0, 0, 0), ConfigError);
    CHECK_THROWS_AS(skew_bm_density(0.5, -1.0, 0, 0), ConfigError);
    CHECK_THROWS_AS(skew_diffusion_density(m, 0.0, 0, 0), ConfigError);
}

TEST_CASE("homogeneous limits reduce to the heat kernel") {
    const InterfaceMedium m(2.5, 2.5, 0.5);
    for (double x : {-1.3, 0.0, 0.7})
        for (double y : {-2.0, -0.1, 0.0, 0.4, 3.0}) {
            const double g = gaussian_pdf(y, x, 2.5 * 0.8);
            CHECK(physical_density(m, 0.8, x, y) == doctest::Approx(g).epsilon(1e-14));
            CHECK(skew_diffusion_density(m, 0.8, x, y) == doctest::Approx(g).epsilon(1e-14));
            CHECK(skew_bm_density(0.5, 0.8, x, y) == doctest::Approx(gaussian_pdf(y, x, 0.8)).epsilon(1e-14));
        }
}

TEST_CASE("skew BM from the interface: density 2 alpha phi on the right") {
    for (double y : {0.1, 1.0, 2.5})
        CHECK(skew_bm_density(0.3, 1.7, 0.0, y) == doctest::Approx(0.6 * gaussian_pdf(y, 0.0, 1.7)));
}

TEST_CASE("normalization by quadrature") {
    for (double ratio : {1.0, 4.0, 25.0}) {
        const InterfaceMedium phys = InterfaceMedium::conservative(ratio, 1.0);
        const InterfaceMedium general(ratio, 1.0, 0.3);
        for (double t : {0.05, 1.0, 7.0})
            for (double x : {-2.0, -0.2, 0.0, 0.3, 5.0}) {
                const double spread = std::sqrt(ratio * t);
                CHECK(std::fabs(total_mass([&](double y) { return physical_density(phys, t, x, y); }, x, spread) - 1.0) <
                      1e-10);
                CHECK(std::fabs(total_mass([&](double y) { return skew_diffusion_density(general, t, x, y); }, x,
                                           spread) -
                                1.0) < 1e-10);
                CHECK(std::fabs(total_mass([&](double y) { return skew_bm_density(0.8, t, x, y); }, x, std::sqrt(t)) -
                                1.0) < 1e-10);
            }
    }
}

TEST_CASE("physical density is symmetric and continuous across the interface") {
    const InterfaceMedium m = InterfaceMedium::conservative(25.0, 1.0);
    for (double t : {0.1, 1.0, 3.0})
        for (double x = -3.0; x <= 3.0; x += 0.37)
            for (double y = -3.0; y <= 3.0; y += 0.41) {
                const double a = physical_density(m, t, x, y), b = physical_density(m, t, y, x);
                CHECK(a >= 0.0);
                CHECK(std::fabs(a - b) <= 1e-13 * std::max(a, b));
            }
    for (double x : {-1.0, 0.5}) {
        const double left = physical_density(m, 1.0, x, -1e-13);
        const double right = physical_density(m, 1.0, x, 1e-13);
        CHECK(left == doctest::Approx(right).epsilon(1e-10));
    }
}

TEST_CASE("skewness at the interface: mass on the right is sqrt(D+)/(sqrt(D+)+sqrt(D-))") {
    const InterfaceMedium m = InterfaceMedium::conservative(4.0, 1.0);
    for (double t : {0.01, 1.0, 10.0}) {
        CHECK(std::fabs(half_line_mass(m, t, 0.0, Side::plus) - 2.0 / 3.0) < 1e-10);
        CHECK(std::fabs(half_line_mass(m, t, 0.0, Side::minus) - 1.0 / 3.0) < 1e-10);
    }
    CHECK(std::fabs(half_line_mass(InterfaceMedium(3, 3, 0.5), 1.0, 0.0, Side::plus) - 0.5) < 1e-10);
    // Skew BM marginal sign law.
    const auto f = [](double y) { return skew_bm_density(0.3, 2.0, 0.0, y); };
    CHECK(integrate(f, 0.0, 30.0, 1e-13).value == doctest::Approx(0.3).epsilon(1e-11));
}

TEST_CASE("lambda-general density agrees with the physical one at lambda*") {
    const InterfaceMedium m = InterfaceMedium::conservative(4.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) {
            const double x = -4.0 + 8.0 * i / 99.0, y = -4.0 + 8.0 * j / 99.0;
            worst = std::max(worst, std::fabs(skew_diffusion_density(m, 1.0, x, y) - physical_density(m, 1.0, x, y)));
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("Chapman-Kolmogorov") {
    RandomStream rng(99, 0);
    const InterfaceMedium m = InterfaceMedium::conservative(4.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        const double s = 0.1 + rng.uniform(), t = 0.1 + rng.uniform();
        const double x = 4.0 * (rng.uniform() - 0.5), y = 4.0 * (rng.uniform() - 0.5);
        const std::array<double, 3> kinks{0.0, x, y};
        const double lo = -20.0, hi = 20.0;
        const double lhs = integrate_split([&](double z) { return physical_density(m, s, x, z) * physical_density(m, t, z, y); },
                                           lo, hi, kinks, 1e-12)
                               .value;
        CHECK(std::fabs(lhs - physical_density(m, s + t, x, y)) < 1e-8);

        const double a = 0.2 + 0.6 * rng.uniform();
        const double lhs_bm =
            integrate_split([&](double z) { return skew_bm_density(a, s, x, z) * skew_bm_density(a, t, z, y); }, lo, hi,
                            kinks, 1e-12)
                .value;
        CHECK(std::fabs(lhs_bm - skew_bm_density(a, s + t, x, y)) < 1e-8);
    }
}

TEST_CASE("closed-form CDF matches quadrature of the density") {
    for (double alpha : {0.2, 0.5, 0.9})
        for (double x : {-1.0, 0.0, 0.6})
            for (double y : {-2.0, -0.3, 0.0, 0.4, 2.0}) {
                const std::array<double, 2> kinks{0.0, x};
                const double q =
                    integrate_split([&](double z) { return skew_bm_density(alpha, 0.7, x, z); }, -15.0, y, kinks, 1e-13)
                        .value;
                CHECK(skew_bm_cdf(alpha, 0.7, x, y) == doctest::Approx(q).epsilon(1e-11));
            }
    const InterfaceMedium m(4.0, 1.0, 0.3);
    CHECK(skew_diffusion_cdf(m, 1.0, 0.0, 0.0) == doctest::Approx(1.0 - alpha_of_lambda(m)));
    CHECK(skew_diffusion_cdf(m, 1.0, 0.0, 60.0) == doctest::Approx(1.0));
}

TEST_CASE("tiny positive arguments stay on the plus side") {
    const InterfaceMedium m(4.0, 1.0, 0.3);
    const double tiny = std::nextafter(0.0, 1.0);
    CHECK(skew_diffusion_density(m, 1.0, 0.0, tiny) == doctest::Approx(skew_diffusion_density(m, 1.0, 0.0, 1e-12)));
    CHECK(skew_diffusion_density(m, 1.0, tiny, 0.5) == doctest::Approx(skew_diffusion_density(m, 1.0, 1e-12, 0.5)));
    CHECK(skew_diffusion_cdf(m, 1.0, 0.0, tiny) == doctest::Approx(1.0 - alpha_of_lambda(m)));
}
