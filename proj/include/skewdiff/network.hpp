#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skewdiff/paths.hpp"
#include "skewdiff/pde.hpp"
#include "skewdiff/rng.hpp"
#include "skewdiff/stats.hpp"

namespace skewdiff {

/// Channel segment; x = 0 is its downstream node, x = length the upstream one.
struct NetworkEdge {
    std::string id;
    std::string parent_id;  // "ROOT" for the root edge
    double length = 1.0;
    double velocity = 0.0;
    double area = 1.0;
    double diffusivity = 1.0;
    int parent = -1;
    std::vector<int> children;  // empty (leaf) or two upstream edges
};

/// Rooted binary tree of edges. The downstream end of the root edge is the absorbing node;
/// upstream ends of childless edges are reflecting sources; every other node joins one
/// downstream edge and two upstream ones.
class RiverNetwork {
public:
    /// Validates and links the edges; throws ConfigError on malformed trees.
    explicit RiverNetwork(std::vector<NetworkEdge> edges);

    /// One edge per line: `edge_id parent_id length velocity area diffusivity`, `#` comments.
    static RiverNetwork parse(std::string_view text);
    static RiverNetwork load(const std::filesystem::path& path);

    const std::vector<NetworkEdge>& edges() const noexcept { return edges_; }
    const NetworkEdge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
    int root() const noexcept { return root_; }
    int index(std::string_view id) const;
    double max_diffusivity() const noexcept;
    double min_length() const noexcept;

    /// Junctions where A_e1 v_e1 + A_e2 v_e2 differs from A_e0 v_e0 by more than rel_tol.
    std::vector<std::string> discharge_warnings(double rel_tol = 1e-9) const;

private:
    std::vector<NetworkEdge> edges_;
    int root_ = -1;
};

struct NetworkPosition {
    int edge = 0;
    double x = 0.0;
};

/// Largest dt for which a step cannot span an edge: 12 sqrt(max D dt) <= min length.
double max_network_dt(const RiverNetwork& net) noexcept;

/// One step of the network process. Within an edge: Euler step with drift -v_e and
/// diffusion D_e. Within 6 sqrt(max D dt) of a junction the diffusive part is an exact
/// Walsh step in the node frame, in coordinates r / sqrt(D_e) with ray weights A_e sqrt(D_e)
/// (so the first exit at physical distance eps picks edge e with probability A_e D_e / sum);
/// the drift follows as a transport step that carries flow into the downstream edge.
/// Leaves reflect by folding; the root absorbs, with a Brownian-bridge check.
class NetworkStepper {
public:
    explicit NetworkStepper(const RiverNetwork& net);
    /// Returns false when the path is absorbed at the root (p is then left at the root).
    bool operator()(NetworkPosition& p, double dt, RandomStream& rng) const;

private:
    const RiverNetwork* net_;
    double max_d_;
};

struct NetworkPath {
    PathSample path;  // positions are edge-local x; edges holds edge indices
    bool absorbed = false;
    double absorption_time = 0.0;
};

/// Paths from `start` on the config's time grid, stopped at absorption. Throws ConfigError
/// when dt exceeds max_network_dt.
std::vector<NetworkPath> simulate_network_paths(const RiverNetwork& net, NetworkPosition start,
                                                const SimConfig& config);
NetworkPath simulate_network_path(const RiverNetwork& net, NetworkPosition start, const SimConfig& config,
                                  std::size_t path_index = 0);

/// Empirical law of the first edge on which the distance from the upstream node of
/// `downstream_edge` reaches eps, starting at that node; entries follow (e0, e1, e2).
struct JunctionFrequencies {
    std::vector<int> edges;
    std::vector<Estimate> frequency;
    std::vector<double> expected;  // A_e D_e / sum
};
JunctionFrequencies junction_exit_frequencies(const RiverNetwork& net, int downstream_edge, double eps,
                                              const SimConfig& config);

/// Fixed-width bins per edge (the last bin on an edge may be shorter).
struct NetworkHistogram {
    double bin_width = 0.0;
    std::vector<std::vector<double>> centers;  // per edge
    std::vector<std::vector<double>> edges_lo;
    std::vector<std::vector<double>> edges_hi;
    std::vector<std::vector<std::size_t>> counts;
    std::size_t absorbed = 0;
    std::size_t total = 0;

    /// Mass of each bin (count / total) in edge order, followed by the absorbed fraction.
    std::vector<double> masses() const;
};

NetworkHistogram make_histogram(const RiverNetwork& net, double bin_width);
void add_sample(NetworkHistogram& h, const NetworkPosition& p);

/// Positions at an Exponential(sigma) settling time, or absorption at the root first.
NetworkHistogram dispersal_kernel_mc(const RiverNetwork& net, NetworkPosition y, double sigma,
                                     const SimConfig& config, double bin_width);

/// Positions at config.horizon (absorbed paths counted separately).
NetworkHistogram terminal_histogram(const RiverNetwork& net, NetworkPosition start, const SimConfig& config,
                                    double bin_width);

struct NetworkSolution {
    std::vector<GridSolution> per_edge;  // u is the density A_e c_e per unit length
    std::vector<double> t_snapshots;
    std::vector<double> absorbed;        // time-integrated root flux per snapshot
    std::vector<double> total_mass;
    double max_mass_balance_error = 0.0;  // max |total_mass + absorbed - initial|
};

/// Forward equation for c = density / A on every edge: c_t = (1/2) D c'' + v c', continuous
/// at junctions with A_0 D_0 c_0'(l) = A_1 D_1 c_1'(0) + A_2 D_2 c_2'(0), c = 0 at the root and
/// zero total flux at leaves. Finite volumes with at most `dx` per cell, started from a unit
/// mass at the grid node nearest `start`. Throws ConfigError for more than 15 edges.
NetworkSolution network_pde_crosscheck(const RiverNetwork& net, NetworkPosition start, double t_end, double dx,
                                       double dt, TimeScheme scheme = TimeScheme::crank_nicolson,
                                       std::span<const double> snapshot_times = {});

/// Probability of each histogram bin under the PDE solution at its last snapshot, in the
/// order of NetworkHistogram::masses().
std::vector<double> bin_probabilities(const NetworkSolution& solution, const NetworkHistogram& h);

/// CSV `edge_id,x_bin_center,mass`.
std::string histogram_csv(const RiverNetwork& net, const NetworkHistogram& h);

}  // namespace skewdiff
