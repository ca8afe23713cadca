#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skewdiff/error.hpp"
#include "skewdiff/network.hpp"
#include "skewdiff/parallel.hpp"

using namespace skewdiff;

namespace {

const char* kY =
    "# id parent length velocity area diffusivity\n"
    "e0 ROOT 1.0 0.5 2.0 1.0\n"
    "e1 e0   1.0 0.5 1.0 0.5   # slow tributary\n"
    "e2 e0   1.0 0.5 1.0 2.0\n";

}  // namespace

TEST_CASE("parse and validate networks") {
    const auto net = RiverNetwork::parse(kY);
    REQUIRE(net.edges().size() == 3);
    CHECK(net.edge(net.root()).id == "e0");
    CHECK(net.edge(0).children == std::vector<int>{1, 2});
    CHECK(net.edge(2).parent == 0);
    CHECK(net.index("e2") == 2);
    CHECK(net.discharge_warnings().empty());
    CHECK(net.max_diffusivity() == 2.0);

    const auto unbalanced = RiverNetwork::parse("a ROOT 1 1 1 1\nb a 1 1 1 1\nc a 1 1 1 1\n");
    CHECK(unbalanced.discharge_warnings().size() == 1);

    CHECK_THROWS_AS(RiverNetwork::parse("a ROOT 1 0 1\n"), ConfigError);
    CHECK_THROWS_AS(RiverNetwork::parse("a ROOT 1 0 1 1\nb x 1 0 1 1\n"), ConfigError);
    CHECK_THROWS_AS(RiverNetwork::parse("a ROOT 1 0 1 1\nb ROOT 1 0 1 1\n"), ConfigError);
    CHECK_THROWS_AS(RiverNetwork::parse("a ROOT 1 0 1 1\nb a 1 0 1 1\n"), ConfigError);
    CHECK_THROWS_AS(RiverNetwork::parse("a ROOT -1 0 1 1\n"), ConfigError);
    CHECK_THROWS_AS(RiverNetwork::parse("a ROOT 1 -1 1 1\n"), ConfigError);
    CHECK_THROWS_AS(RiverNetwork::parse("a ROOT 1 0 1 1\nb c 1 0 1 1\nc b 1 0 1 1\n"), ConfigError);
    CHECK_THROWS_AS(RiverNetwork::parse("a ROOT 1 0 1 1\na a 1 0 1 1\n"), ConfigError);
    CHECK_THROWS_AS(RiverNetwork::parse("# nothing\n"), ConfigError);
}

TEST_CASE("junction exit frequencies follow A D weights") {
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 1e-5;
    cfg.horizon = 5.0;
    cfg.seed = 17;
    for (const char* text : {"e0 ROOT 1 0 1 1\ne1 e0 1 0 1 1\ne2 e0 1 0 2 1\n",
                             "e0 ROOT 1 0 1 1\ne1 e0 1 0 1 1\ne2 e0 1 0 1 1\n",
                             "e0 ROOT 1 0 1 1\ne1 e0 1 0 1 2\ne2 e0 1 0 3 0.5\n"}) {
        const auto net = RiverNetwork::parse(text);
        const auto f = junction_exit_frequencies(net, 0, 0.05, cfg);
        double total = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            INFO(text << " edge " << k << ": " << f.frequency[k].value << " expected " << f.expected[k]);
            CHECK(f.frequency[k].contains(f.expected[k]));
            total += f.frequency[k].value;
        }
        CHECK(total == doctest::Approx(1.0));
    }
    const auto net = RiverNetwork::parse("e0 ROOT 1 0 1 1\ne1 e0 1 0 1 1\ne2 e0 1 0 2 1\n");
    const auto f = junction_exit_frequencies(net, 0, 0.05, cfg);
    CHECK(f.expected == std::vector<double>{0.25, 0.25, 0.5});
}

TEST_CASE("single edge: absorption time of Brownian motion reflected at the source") {
    const auto net = RiverNetwork::parse("only ROOT 2.0 0 1 1.5\n");
    SimConfig cfg;
    cfg.n_paths = 4000;
    cfg.dt = 1e-3;
    cfg.horizon = 60.0;
    cfg.seed = 2;
    const double x = 0.7, l = 2.0, d = 1.5;
    const auto paths = simulate_network_paths(net, {0, x}, cfg);
    RunningMoments tau;
    bool inside = true;
    for (const auto& p : paths) {
        REQUIRE(p.absorbed);
        tau.add(p.absorption_time);
        CHECK(p.path.positions.back() == 0.0);
        for (double v : p.path.positions) inside = inside && v >= 0.0 && v <= l;
    }
    CHECK(inside);
    const double exact = (2.0 / d) * (l * x - x * x / 2.0);
    const auto est = tau.mean_estimate();
    INFO(est.value << " +- " << est.halfwidth << " exact " << exact);
    // the time grid resolves absorption to one step
    CHECK(std::abs(est.value - exact) < est.halfwidth + cfg.dt);
}

TEST_CASE("dispersal kernel on a long edge matches the Laplace kernel") {
    const auto net = RiverNetwork::parse("long ROOT 20 0 1 1\n");
    const double y = 10.0, sigma = 2.0, d = 1.0;
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 1e-3;
    cfg.seed = 9;
    const auto h = dispersal_kernel_mc(net, {0, y}, sigma, cfg, 0.1);
    CHECK(h.total == cfg.n_paths);
    std::size_t sum = h.absorbed;
    for (const auto& c : h.counts)
        for (auto v : c) sum += v;
    CHECK(sum == h.total);
    const double kappa = std::sqrt(2.0 * sigma / d);
    auto cdf = [&](double x) { return x < y ? 0.5 * std::exp(kappa * (x - y)) : 1.0 - 0.5 * std::exp(-kappa * (x - y)); };
    std::vector<double> observed, expected;
    for (std::size_t b = 0; b < h.counts[0].size(); ++b) {
        observed.push_back(static_cast<double>(h.counts[0][b]));
        expected.push_back(cdf(h.edges_hi[0][b]) - cdf(h.edges_lo[0][b]));
    }
    const auto chi = chi_square_test(observed, expected);
    INFO("chi2 " << chi.statistic << " dof " << chi.dof);
    CHECK(chi.p_value > 0.001);

    // large settling rate: short flights
    const auto tight = dispersal_kernel_mc(net, {0, y}, 400.0, cfg, 0.01);
    std::size_t near = 0;
    const double reach = 3.0 * std::sqrt(d / 400.0);
    for (std::size_t b = 0; b < tight.counts[0].size(); ++b)
        if (std::abs(tight.centers[0][b] - y) <= reach) near += tight.counts[0][b];
    CHECK(static_cast<double>(near) / static_cast<double>(tight.total) > 0.95);
}

TEST_CASE("kernel symmetric under exchanging identical tributaries") {
    const auto net = RiverNetwork::parse("e0 ROOT 1 0 1 1\ne1 e0 1 0 1 1\ne2 e0 1 0 1 1\n");
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 1e-4;
    cfg.seed = 4;
    const auto h = dispersal_kernel_mc(net, {0, 0.5}, 1.0, cfg, 0.25);
    std::vector<double> diff;
    // per-path paired indicator difference: +1 on e1, -1 on e2
    std::size_t n1 = 0, n2 = 0;
    for (auto v : h.counts[1]) n1 += v;
    for (auto v : h.counts[2]) n2 += v;
    const double n = static_cast<double>(h.total);
    const double p1 = n1 / n, p2 = n2 / n;
    const double var = (p1 + p2 - (p1 - p2) * (p1 - p2)) / n;
    CHECK(std::abs(p1 - p2) < kCiSigmas * std::sqrt(var));
    CHECK(p1 > 0.05);
}

TEST_CASE("single-edge network PDE equals the interface PDE") {
    const auto net = RiverNetwork::parse("only ROOT 2.0 0 3.0 0.8\n");
    const auto sol = network_pde_crosscheck(net, {0, 1.2}, 0.5, 0.01, 0.005, TimeScheme::implicit);
    const auto medium = PdeMedium{{}, {0.8}, {}};
    const Grid grid(0.0, 2.0, 0.01);
    BoundaryConditions bc;
    bc.left.type = BoundaryType::dirichlet_zero;
    const auto ref = solve_interface_pde(medium, grid, bc, delta_initial(grid, 1.2), 0.5, 0.005);
    REQUIRE(ref.x.size() == sol.per_edge[0].x.size());
    for (std::size_t i = 0; i < ref.x.size(); ++i)
        CHECK(sol.per_edge[0].u.back()[i] == doctest::Approx(ref.u.back()[i]).epsilon(1e-12));
    CHECK(sol.absorbed.back() == doctest::Approx(ref.boundary_leakage).epsilon(1e-12));
}

TEST_CASE("Y network: PDE mass accounting and agreement with Monte Carlo") {
    const auto net = RiverNetwork::parse(kY);
    const NetworkPosition start{1, 0.5};
    const auto sol = network_pde_crosscheck(net, start, 1.0, 1.0 / 200, 1.0 / 400);
    CHECK(sol.max_mass_balance_error < 1e-8);
    for (std::size_t k = 0; k < sol.t_snapshots.size(); ++k) {
        double m = 0.0;
        for (const auto& g : sol.per_edge) m += g.mass[k];
        CHECK(m + sol.absorbed[k] == doctest::Approx(1.0).epsilon(1e-8));
    }
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 1e-4;
    cfg.horizon = 1.0;
    cfg.seed = 21;
    const auto h = terminal_histogram(net, start, cfg, 0.1);
    const auto probs = bin_probabilities(sol, h);
    std::vector<double> observed;
    for (double m : h.masses()) observed.push_back(m * static_cast<double>(h.total));
    const auto chi = chi_square_test(observed, probs);
    INFO("chi2 " << chi.statistic << " dof " << chi.dof << " p " << chi.p_value);
    CHECK(chi.p_value > 0.001);
}

TEST_CASE("paths carry edge labels and do not depend on the thread count") {
    const auto net = RiverNetwork::parse(kY);
    SimConfig cfg;
    cfg.n_paths = 50;
    cfg.dt = 1e-3;
    cfg.horizon = 0.5;
    cfg.seed = 8;
    set_thread_count(1);
    const auto a = simulate_network_paths(net, {2, 0.9}, cfg);
    set_thread_count(3);
    const auto b = simulate_network_paths(net, {2, 0.9}, cfg);
    set_thread_count(1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].path.positions == b[i].path.positions);
        CHECK(a[i].path.edges == b[i].path.edges);
        CHECK(a[i].path.edges.size() == a[i].path.times.size());
        CHECK_NOTHROW(validate(a[i].path));
    }
    cfg.dt = 0.01;
    CHECK_THROWS_AS(simulate_network_paths(net, {2, 0.9}, cfg), ConfigError);
}
