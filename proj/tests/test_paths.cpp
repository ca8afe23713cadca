#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "skewdiff/densities.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/parallel.hpp"
#include "skewdiff/paths.hpp"
#include "skewdiff/stats.hpp"

using namespace skewdiff;

namespace {

std::size_t count_positive(const std::vector<double>& xs) {
    std::size_t k = 0;
    for (double x : xs) k += x > 0.0;
    return k;
}

// 200 equiprobable-ish bins on [x - 6 sd, x + 6 sd] plus two tails, probabilities from the CDF.
ChiSquareResult chi_square_vs_cdf(const std::vector<double>& draws, double alpha, double t, double x) {
    const double sd = std::sqrt(t);
    const double lo = std::min(x, 0.0) - 6.0 * sd, hi = std::max(x, 0.0) + 6.0 * sd;
    const int bins = 200;
    std::vector<double> edges{-INFINITY};
    for (int i = 0; i <= bins; ++i) edges.push_back(lo + (hi - lo) * i / bins);
    edges.push_back(INFINITY);
    auto cdf = [&](double y) { return std::isinf(y) ? (y > 0 ? 1.0 : 0.0) : skew_bm_cdf(alpha, t, x, y); };
    std::vector<double> prob(edges.size() - 1), obs(edges.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) prob[i] = cdf(edges[i + 1]) - cdf(edges[i]);
    for (double y : draws) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), y);
        obs[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
    }
    return chi_square_test(obs, prob);
}

}  // namespace

TEST_CASE("config validation and grid") {
    SimConfig c;
    c.dt = 0.3;
    c.horizon = 1.0;
    CHECK(c.n_steps() == 4);
    CHECK(c.time(4) == 1.0);
    CHECK(c.step_size(3) == doctest::Approx(0.1));
    c.dt = 0.01;
    CHECK(c.n_steps() == 100);
    c.n_paths = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.n_paths = 1;
    c.dt = 2.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.dt = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("path validation") {
    PathSample p;
    p.times = {0.0, 0.5, 1.0};
    p.positions = {0.0, 1.0, -1.0};
    CHECK_NOTHROW(validate(p));
    CHECK(interpolate(p, 0.25) == doctest::Approx(0.5));
    CHECK(interpolate(p, 0.75) == doctest::Approx(0.0));
    p.times[2] = 0.5;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p.times[2] = 1.0;
    p.positions.pop_back();
    CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("skew walk transition frequencies") {
    const double alpha = 0.3;
    std::size_t up_from_zero = 0, from_zero = 0, up_elsewhere = 0, elsewhere = 0;
    for (std::uint64_t s = 0; s < 400; ++s) {
        const auto w = skew_walk(alpha, 20000, s);
        CHECK(w.front() == 0);
        for (std::size_t k = 0; k + 1 < w.size(); ++k) {
            REQUIRE(std::abs(w[k + 1] - w[k]) == 1);
            const bool up = w[k + 1] > w[k];
            if (w[k] == 0) {
                ++from_zero;
                up_from_zero += up;
            } else {
                ++elsewhere;
                up_elsewhere += up;
            }
        }
    }
    CHECK(proportion(up_from_zero, from_zero).contains(alpha));
    CHECK(proportion(up_elsewhere, elsewhere).contains(0.5));
    CHECK_THROWS_AS(skew_walk(1.0, 10, 1), ConfigError);
}

TEST_CASE("polygonal rescaling") {
    const std::vector<int> w{0, 1};
    const auto p = polygonal_rescale(w, 1);
    CHECK(p.times == std::vector<double>{0.0, 1.0});
    CHECK(p.positions == std::vector<double>{0.0, 1.0});
    const std::vector<int> w4{0, 1, 2, 1, 0};
    const auto q = polygonal_rescale(w4, 4);
    CHECK(q.positions[2] == doctest::Approx(1.0));
    CHECK(interpolate(q, 0.375) == doctest::Approx(0.75));
    CHECK_THROWS_AS(polygonal_rescale(w4, 5), ConfigError);
}

TEST_CASE("rescaled walk marginal at t = 1") {
    // odd n: S_n is never 0, so P(S_n > 0) = alpha exactly
    const std::size_t n = 1001, samples = 20000;
    const double alpha = 0.8;
    std::vector<double> end(samples);
    parallel_for(samples, [&](std::size_t i) {
        RandomStream rng(99, i);
        end[i] = skew_walk(alpha, n, rng).back() / std::sqrt(static_cast<double>(n));
    });
    CHECK(proportion(count_positive(end), samples).contains(alpha));
    const double d = ks_lattice_statistic(end, 2.0 / std::sqrt(static_cast<double>(n)),
                                          [&](double y) { return skew_bm_cdf(alpha, 1.0, 0.0, y); });
    CHECK(d < ks_critical(samples));
}

TEST_CASE("exact step matches the transition density in all sign cases") {
    const std::size_t draws = 1000000;
    struct Case {
        double alpha, x;
    };
    for (const Case c : {Case{0.8, 0.3}, Case{0.8, -0.3}, Case{0.25, 0.3}, Case{0.25, -0.3}, Case{0.7, 0.0},
                         Case{0.3, 0.0}, Case{0.6, 2.0}}) {
        CAPTURE(c.alpha);
        CAPTURE(c.x);
        const double dt = 0.5;
        std::vector<double> ys(draws);
        RandomStream rng(5, 0);
        for (auto& y : ys) y = exact_step(c.alpha, c.x, dt, rng);
        const auto r = chi_square_vs_cdf(ys, c.alpha, dt, c.x);
        CHECK(r.p_value > 1e-3);
    }
}

TEST_CASE("exact step sign law and symmetric mean") {
    const std::size_t n = 1000000;
    RandomStream rng(11, 3);
    std::size_t pos = 0;
    RunningMoments m;
    for (std::size_t i = 0; i < n; ++i) {
        pos += exact_step(0.35, 0.0, 0.1, rng) > 0.0;
        m.add(exact_step(0.5, 0.7, 0.1, rng));
    }
    CHECK(proportion(pos, n).contains(0.35));
    CHECK(m.mean_estimate().contains(0.7));
    CHECK(m.variance() == doctest::Approx(0.1).epsilon(0.01));
}

TEST_CASE("skew diffusion sign law and marginal") {
    const InterfaceMedium m(4.0, 1.0, 0.5);
    SimConfig c;
    c.n_paths = 50000;
    c.dt = 0.05;
    c.horizon = 1.0;
    c.seed = 17;
    const auto xs = terminal_positions(m, c);
    CHECK(proportion(count_positive(xs), c.n_paths).contains(alpha_of_lambda(m)));
    const double d = ks_statistic(xs, [&](double y) { return skew_diffusion_cdf(m, 1.0, 0.0, y); });
    CHECK(d < ks_critical(c.n_paths));
}

TEST_CASE("homogeneous medium is Brownian") {
    const InterfaceMedium m(2.0, 2.0, 0.5);
    SimConfig c;
    c.n_paths = 40000;
    c.dt = 0.1;
    c.horizon = 1.5;
    c.x0 = 0.2;
    RunningMoments mom;
    for (double x : terminal_positions(m, c)) mom.add(x);
    CHECK(mom.mean_estimate().contains(0.2));
    CHECK(mom.variance() == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("transformed Euler agrees with exact stepping") {
    const InterfaceMedium m(4.0, 1.0, 0.6);
    SimConfig c;
    c.n_paths = 20000;
    c.dt = 1e-3;
    c.horizon = 1.0;
    c.seed = 3;
    const auto exact = terminal_positions(m, c);
    c.scheme = Scheme::euler_transformed;
    c.seed = 4;
    const auto euler = terminal_positions(m, c);
    CHECK(ks_two_sample_statistic(exact, euler) < ks_two_sample_critical(exact.size(), euler.size()));
    CHECK(proportion(count_positive(euler), c.n_paths).contains(alpha_of_lambda(m)));

    const EulerTransformedStepper st(m);
    for (double x : {-2.0, -0.1, 0.0, 0.3, 5.0}) CHECK(st.inverse(st.transform(x)) == doctest::Approx(x));

    const InterfaceMedium h(1.0, 1.0, 0.5);
    const EulerTransformedStepper plain(h);
    CHECK(plain.transform(0.7) == 0.7);
}

TEST_CASE("recorded paths") {
    const InterfaceMedium m(4.0, 1.0, 0.8);
    SimConfig c;
    c.n_paths = 3;
    c.dt = 0.3;
    c.horizon = 1.0;
    const auto paths = simulate_skew_diffusion(m, c);
    REQUIRE(paths.size() == 3);
    for (const auto& p : paths) {
        CHECK_NOTHROW(validate(p));
        CHECK(p.size() == 5);
        CHECK(p.times.back() == 1.0);
    }
    CHECK(terminal_positions(m, c)[1] == paths[1].positions.back());
    c.scheme = Scheme::skew_walk;
    CHECK_THROWS_AS(simulate_skew_diffusion(m, c), ConfigError);
}

TEST_CASE("multi medium") {
    SUBCASE("single interface has the same law") {
        const InterfaceMedium m(4.0, 1.0, 0.8);
        const MultiMedium mm({0.0}, {1.0, 4.0});
        SimConfig c;
        c.n_paths = 20000;
        c.dt = 0.05;
        c.seed = 8;
        const auto a = terminal_positions(m, c);
        c.seed = 9;
        const auto b = terminal_positions(mm, c);
        CHECK(ks_two_sample_statistic(a, b) < ks_two_sample_critical(a.size(), b.size()));
    }
    SUBCASE("equal diffusivities are Brownian") {
        const MultiMedium mm({-0.5, 0.5}, {2.0, 2.0, 2.0});
        SimConfig c;
        c.n_paths = 20000;
        c.dt = 1e-3;
        c.horizon = 0.5;
        RunningMoments mom;
        for (double x : terminal_positions(mm, c)) mom.add(x);
        CHECK(mom.mean_estimate().contains(0.0));
        CHECK(mom.variance() == doctest::Approx(1.0).epsilon(0.04));
    }
    SUBCASE("exit side at an interface") {
        // interval symmetric in the Brownian coordinate around x = 1: (1 - 2e, 1 + e)
        const MultiMedium mm({-1.0, 1.0}, {1.0, 4.0, 1.0});
        CHECK(mm.alpha(1) == doctest::Approx(1.0 / 3.0));
        const double eps = 0.05;
        SimConfig c;
        c.n_paths = 20000;
        c.dt = 1e-5;
        c.horizon = 1.0;
        c.x0 = 1.0;
        const MultiStepper step(mm);
        std::vector<int> left(c.n_paths, 0);
        parallel_for(c.n_paths, [&](std::size_t i) {
            RandomStream rng(21, i);
            double x = 1.0;
            while (x > 1.0 - 2.0 * eps && x < 1.0 + eps) x = step(x, c.dt, rng);
            left[i] = x <= 1.0 - 2.0 * eps;
        });
        std::size_t k = 0;
        for (int l : left) k += l;
        CHECK(proportion(k, c.n_paths).contains(2.0 / 3.0));
    }
    SUBCASE("step cap") {
        const MultiMedium mm({-1.0, 1.0}, {1.0, 4.0, 1.0});
        CHECK(max_multi_dt(mm) == doctest::Approx(4.0 / (144.0 * 4.0)));
        CHECK_THROWS_AS(check_multi_step(mm, 0.1), ConfigError);
        SimConfig c;
        c.dt = 0.1;
        CHECK_THROWS_AS(simulate_multi(mm, c), ConfigError);
    }
}

TEST_CASE("results do not depend on the thread count") {
    const InterfaceMedium m(4.0, 1.0, 0.3);
    SimConfig c;
    c.n_paths = 257;
    c.dt = 0.01;
    c.seed = 1234;
    const int saved = thread_count();
    set_thread_count(1);
    const auto a = terminal_positions(m, c);
    set_thread_count(3);
    const auto b = terminal_positions(m, c);
    set_thread_count(saved);
    CHECK(a == b);
}
