#include "skewdiff/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "skewdiff/config.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/io.hpp"
#include "skewdiff/parallel.hpp"

namespace skewdiff {

RiverNetwork::RiverNetwork(std::vector<NetworkEdge> edges) : edges_(std::move(edges)) {
    if (edges_.empty()) throw ConfigError("network has no edges");
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        auto& e = edges_[i];
        if (e.id.empty() || e.id == "ROOT") throw ConfigError("invalid edge id '" + e.id + "'");
        if (!ids.emplace(e.id, static_cast<int>(i)).second) throw ConfigError("duplicate edge id " + e.id);
        if (!(e.length > 0.0) || !std::isfinite(e.length)) throw ConfigError("edge " + e.id + ": length must be positive");
        if (!(e.velocity >= 0.0) || !std::isfinite(e.velocity))
            throw ConfigError("edge " + e.id + ": velocity must be nonnegative");
        if (!(e.area > 0.0) || !std::isfinite(e.area)) throw ConfigError("edge " + e.id + ": area must be positive");
        if (!(e.diffusivity >= kMinDiffusivity) || !std::isfinite(e.diffusivity))
            throw ConfigError("edge " + e.id + ": diffusivity must be positive");
        e.parent = -1;
        e.children.clear();
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        auto& e = edges_[i];
        if (e.parent_id == "ROOT") {
            if (root_ >= 0) throw ConfigError("network has more than one ROOT edge");
            root_ = static_cast<int>(i);
            continue;
        }
        const auto it = ids.find(e.parent_id);
        if (it == ids.end()) throw ConfigError("edge " + e.id + ": unknown parent " + e.parent_id);
        e.parent = it->second;
        edges_[static_cast<std::size_t>(it->second)].children.push_back(static_cast<int>(i));
    }
    if (root_ < 0) throw ConfigError("network has no ROOT edge");
    for (const auto& e : edges_)
        if (!e.children.empty() && e.children.size() != 2)
            throw ConfigError("edge " + e.id + ": every junction joins exactly two upstream edges");
    // Everything must hang off the root (rules out cycles).
    std::vector<int> stack{root_};
    std::size_t seen = 0;
    while (!stack.empty()) {
        const int e = stack.back();
        stack.pop_back();
        if (++seen > edges_.size()) break;
        for (int c : edges_[static_cast<std::size_t>(e)].children) stack.push_back(c);
    }
    if (seen != edges_.size()) throw ConfigError("network is not a tree connected to the root");
}

RiverNetwork RiverNetwork::parse(std::string_view text) {
    std::vector<NetworkEdge> edges;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        const auto where = "network line " + std::to_string(line_no);
        if (tok.size() != 6) throw ConfigError(where + ": expected 6 fields, got " + std::to_string(tok.size()));
        NetworkEdge e;
        e.id = tok[0];
        e.parent_id = tok[1];
        e.length = parse_double(tok[2], where + " length");
        e.velocity = parse_double(tok[3], where + " velocity");
        e.area = parse_double(tok[4], where + " area");
        e.diffusivity = parse_double(tok[5], where + " diffusivity");
        edges.push_back(std::move(e));
    }
    return RiverNetwork(std::move(edges));
}

RiverNetwork RiverNetwork::load(const std::filesystem::path& path) { return parse(read_file(path)); }

int RiverNetwork::index(std::string_view id) const {
    for (std::size_t i = 0; i < edges_.size(); ++i)
        if (edges_[i].id == id) return static_cast<int>(i);
    throw ConfigError("unknown edge id " + std::string(id));
}

double RiverNetwork::max_diffusivity() const noexcept {
    double m = 0.0;
    for (const auto& e : edges_) m = std::max(m, e.diffusivity);
    return m;
}

double RiverNetwork::min_length() const noexcept {
    double m = edges_.front().length;
    for (const auto& e : edges_) m = std::min(m, e.length);
    return m;
}

std::vector<std::string> RiverNetwork::discharge_warnings(double rel_tol) const {
    std::vector<std::string> out;
    for (const auto& e : edges_) {
        if (e.children.empty()) continue;
        const double down = e.area * e.velocity;
        double up = 0.0;
        for (int c : e.children) up += edge(c).area * edge(c).velocity;
        if (std::abs(up - down) > rel_tol * std::max({std::abs(up), std::abs(down), 1e-300}))
            out.push_back("discharge not balanced at the upstream node of edge " + e.id + ": " + format_double(up) +
                          " in, " + format_double(down) + " out");
    }
    return out;
}

double max_network_dt(const RiverNetwork& net) noexcept {
    const double l = net.min_length();
    return l * l / (144.0 * net.max_diffusivity());
}

NetworkStepper::NetworkStepper(const RiverNetwork& net) : net_(&net), max_d_(net.max_diffusivity()) {}

namespace {

constexpr double kNodeWindow = 6.0;

// Rays of the junction at the upstream end of edge `down`: distance r from the node is
// length - x on `down` and x on the two upstream edges.
struct Junction {
    int rays[3];
};

Junction junction_above(const RiverNetwork& net, int down) {
    const auto& e = net.edge(down);
    return {{down, e.children[0], e.children[1]}};
}

double ray_distance(const RiverNetwork& net, int down, const NetworkPosition& p) {
    return p.edge == down ? net.edge(down).length - p.x : p.x;
}

NetworkPosition ray_position(const RiverNetwork& net, int down, int edge, double r) {
    const double l = net.edge(edge).length;
    r = std::min(r, l);
    return {edge, edge == down ? l - r : r};
}

NetworkPosition walsh_step(const RiverNetwork& net, int down, const NetworkPosition& p, double dt,
                           RandomStream& rng) {
    const Junction j = junction_above(net, down);
    const auto& cur = net.edge(p.edge);
    const double y = std::max(ray_distance(net, down, p), 0.0) / std::sqrt(cur.diffusivity);
    const double z = std::abs(y + std::sqrt(dt) * rng.normal());
    const double e = std::exp(-2.0 * y * z / dt);
    int edge = p.edge;
    if (rng.uniform() < 2.0 * e / (1.0 + e)) {
        double w[3], total = 0.0;
        for (int k = 0; k < 3; ++k) {
            const auto& r = net.edge(j.rays[k]);
            w[k] = r.area * std::sqrt(r.diffusivity);
            total += w[k];
        }
        double u = rng.uniform() * total;
        edge = j.rays[2];
        for (int k = 0; k < 2; ++k) {
            if (u < w[k]) {
                edge = j.rays[k];
                break;
            }
            u -= w[k];
        }
    }
    return ray_position(net, down, edge, z * std::sqrt(net.edge(edge).diffusivity));
}

// Downstream transport by v dt; flow leaving an upstream edge continues on its parent.
// Returns false on reaching the root node.
bool transport(const RiverNetwork& net, NetworkPosition& p, double dt) {
    double shift = net.edge(p.edge).velocity * dt;
    while (shift > 0.0) {
        if (p.x > shift) {
            p.x -= shift;
            return true;
        }
        shift -= p.x;
        const auto& e = net.edge(p.edge);
        if (e.parent < 0) {
            p.x = 0.0;
            return false;
        }
        // the remaining time is spent at the parent's velocity
        const double remaining_time = e.velocity > 0.0 ? shift / e.velocity : 0.0;
        p.edge = e.parent;
        p.x = net.edge(p.edge).length;
        shift = net.edge(p.edge).velocity * remaining_time;
    }
    return true;
}

}  // namespace

bool NetworkStepper::operator()(NetworkPosition& p, double dt, RandomStream& rng) const {
    const RiverNetwork& net = *net_;
    const auto& e = net.edge(p.edge);
    const double window = kNodeWindow * std::sqrt(max_d_ * dt);
    const double sd = std::sqrt(e.diffusivity * dt);

    if (p.x < window && e.parent < 0) {
        // Root: Euler step, absorbed on landing at or below 0 or by a bridge crossing.
        const double next = p.x - e.velocity * dt + sd * rng.normal();
        const double u = rng.uniform();
        if (next <= 0.0 || u < std::exp(-2.0 * p.x * next / (e.diffusivity * dt))) {
            p.x = 0.0;
            return false;
        }
        p.x = next;
        return true;
    }
    if (p.x < window) {
        p = walsh_step(net, e.parent, p, dt, rng);
        return transport(net, p, dt);
    }
    if (e.length - p.x < window && !e.children.empty()) {
        p = walsh_step(net, p.edge, p, dt, rng);
        return transport(net, p, dt);
    }
    double next = p.x + sd * rng.normal();
    if (next > e.length) next = 2.0 * e.length - next;  // leaf fold (a junction cannot be reached here)
    if (next < 0.0) {
        // Beyond the node window; a 6-sigma event. Continue from the node frame.
        if (e.parent < 0) {
            p.x = 0.0;
            return false;
        }
        p = walsh_step(net, e.parent, {p.edge, 0.0}, dt, rng);
        return transport(net, p, dt);
    }
    p.x = next;
    return transport(net, p, dt);
}

namespace {

void check_network_config(const RiverNetwork& net, NetworkPosition start, const SimConfig& config) {
    config.validate();
    if (start.edge < 0 || static_cast<std::size_t>(start.edge) >= net.edges().size())
        throw ConfigError("start edge out of range");
    if (!(start.x >= 0.0 && start.x <= net.edge(start.edge).length))
        throw ConfigError("start position outside its edge");
    const double cap = max_network_dt(net);
    if (config.dt > cap) throw ConfigError("dt too large for the shortest edge; need dt <= " + format_double(cap));
}

}  // namespace

NetworkPath simulate_network_path(const RiverNetwork& net, NetworkPosition start, const SimConfig& config,
                                  std::size_t path_index) {
    check_network_config(net, start, config);
    const NetworkStepper step(net);
    RandomStream rng(config.seed, path_index);
    NetworkPath out;
    auto record = [&](double t, const NetworkPosition& p) {
        out.path.times.push_back(t);
        out.path.positions.push_back(p.x);
        out.path.edges.push_back(p.edge);
    };
    NetworkPosition p = start;
    record(0.0, p);
    const std::size_t n = config.n_steps();
    for (std::size_t k = 0; k < n; ++k) {
        const bool alive = step(p, config.step_size(k), rng);
        record(config.time(k + 1), p);
        if (!alive) {
            out.absorbed = true;
            out.absorption_time = config.time(k + 1);
            break;
        }
    }
    return out;
}

std::vector<NetworkPath> simulate_network_paths(const RiverNetwork& net, NetworkPosition start,
                                                const SimConfig& config) {
    check_network_config(net, start, config);
    std::vector<NetworkPath> out(config.n_paths);
    parallel_for(config.n_paths, [&](std::size_t i) { out[i] = simulate_network_path(net, start, config, i); });
    return out;
}

JunctionFrequencies junction_exit_frequencies(const RiverNetwork& net, int downstream_edge, double eps,
                                              const SimConfig& config) {
    config.validate();
    const auto& e0 = net.edge(downstream_edge);
    if (e0.children.empty()) throw ConfigError("edge " + e0.id + " has no junction at its upstream end");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    const Junction j = junction_above(net, downstream_edge);
    for (int k = 0; k < 3; ++k)
        if (eps > 0.5 * net.edge(j.rays[k]).length) throw ConfigError("eps must be below half of every edge length");
    if (config.dt > max_network_dt(net)) throw ConfigError("dt too large for the shortest edge");

    const NetworkStepper step(net);
    std::vector<int> which(config.n_paths, -1);
    const std::size_t max_steps = config.n_steps();
    parallel_for(config.n_paths, [&](std::size_t i) {
        RandomStream rng(config.seed, i);
        NetworkPosition p{downstream_edge, e0.length};
        for (std::size_t k = 0; k < max_steps; ++k) {
            const NetworkPosition prev = p;
            const double dt = config.step_size(k);
            step(p, dt, rng);
            const double r = ray_distance(net, downstream_edge, p);
            bool on_star = false;
            for (int ray : j.rays) on_star = on_star || ray == p.edge;
            if (!on_star || r >= eps) {
                which[i] = p.edge;
                return;
            }
            if (p.edge == prev.edge) {
                const double r0 = ray_distance(net, downstream_edge, prev);
                const double d = net.edge(p.edge).diffusivity;
                if (rng.uniform() < std::exp(-2.0 * (eps - r0) * (eps - r) / (d * dt))) {
                    which[i] = p.edge;
                    return;
                }
            }
        }
    });
    JunctionFrequencies out;
    double total_w = 0.0;
    for (int ray : j.rays) total_w += net.edge(ray).area * net.edge(ray).diffusivity;
    std::size_t unfinished = 0;
    for (int w : which) unfinished += w < 0;
    if (unfinished > 0)
        throw HorizonError("junction exits not reached by the horizon",
                           static_cast<double>(unfinished) / static_cast<double>(config.n_paths));
    for (int ray : j.rays) {
        const auto hits = static_cast<std::size_t>(std::count(which.begin(), which.end(), ray));
        out.edges.push_back(ray);
        out.frequency.push_back(proportion(hits, config.n_paths));
        out.expected.push_back(net.edge(ray).area * net.edge(ray).diffusivity / total_w);
    }
    return out;
}

std::vector<double> NetworkHistogram::masses() const {
    std::vector<double> out;
    for (const auto& c : counts)
        for (std::size_t v : c) out.push_back(static_cast<double>(v) / static_cast<double>(total));
    out.push_back(static_cast<double>(absorbed) / static_cast<double>(total));
    return out;
}

NetworkHistogram make_histogram(const RiverNetwork& net, double bin_width) {
    if (!(bin_width > 0.0)) throw ConfigError("bin width must be positive");
    NetworkHistogram h;
    h.bin_width = bin_width;
    for (const auto& e : net.edges()) {
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(e.length / bin_width - 1e-9)));
        std::vector<double> lo, hi, c;
        for (std::size_t k = 0; k < n; ++k) {
            lo.push_back(static_cast<double>(k) * bin_width);
            hi.push_back(std::min(e.length, static_cast<double>(k + 1) * bin_width));
            c.push_back(0.5 * (lo.back() + hi.back()));
        }
        h.edges_lo.push_back(std::move(lo));
        h.edges_hi.push_back(std::move(hi));
        h.centers.push_back(std::move(c));
        h.counts.emplace_back(n, 0);
    }
    return h;
}

void add_sample(NetworkHistogram& h, const NetworkPosition& p) {
    auto& c = h.counts[static_cast<std::size_t>(p.edge)];
    const auto k = std::min(c.size() - 1, static_cast<std::size_t>(std::max(0.0, std::floor(p.x / h.bin_width))));
    ++c[k];
    ++h.total;
}

namespace {

// Per-path outcome: -1 edge when absorbed.
NetworkHistogram collect(const RiverNetwork& net, double bin_width, const std::vector<NetworkPosition>& ends) {
    NetworkHistogram h = make_histogram(net, bin_width);
    for (const auto& p : ends) {
        if (p.edge < 0) {
            ++h.absorbed;
            ++h.total;
        } else {
            add_sample(h, p);
        }
    }
    return h;
}

}  // namespace

NetworkHistogram dispersal_kernel_mc(const RiverNetwork& net, NetworkPosition y, double sigma,
                                     const SimConfig& config, double bin_width) {
    check_network_config(net, y, config);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("settling rate sigma must be positive");
    const NetworkStepper step(net);
    std::vector<NetworkPosition> ends(config.n_paths);
    parallel_for(config.n_paths, [&](std::size_t i) {
        RandomStream rng(config.seed, i);
        const double tau = rng.exponential(sigma);
        NetworkPosition p = y;
        double t = 0.0;
        while (t < tau) {
            const double h = std::min(config.dt, tau - t);
            if (!step(p, h, rng)) {
                p.edge = -1;
                break;
            }
            t += h;
        }
        ends[i] = p;
    });
    return collect(net, bin_width, ends);
}

NetworkHistogram terminal_histogram(const RiverNetwork& net, NetworkPosition start, const SimConfig& config,
                                    double bin_width) {
    check_network_config(net, start, config);
    const NetworkStepper step(net);
    std::vector<NetworkPosition> ends(config.n_paths);
    const std::size_t n = config.n_steps();
    parallel_for(config.n_paths, [&](std::size_t i) {
        RandomStream rng(config.seed, i);
        NetworkPosition p = start;
        for (std::size_t k = 0; k < n; ++k)
            if (!step(p, config.step_size(k), rng)) {
                p.edge = -1;
                break;
            }
        ends[i] = p;
    });
    return collect(net, bin_width, ends);
}

NetworkSolution network_pde_crosscheck(const RiverNetwork& net, NetworkPosition start, double t_end, double dx,
                                       double dt, TimeScheme scheme, std::span<const double> snapshot_times) {
    if (net.edges().size() > 15) throw ConfigError("the network PDE cross-check supports at most 15 edges");
    if (!(dx > 0.0)) throw ConfigError("dx must be positive");
    if (start.edge < 0 || static_cast<std::size_t>(start.edge) >= net.edges().size() ||
        !(start.x >= 0.0 && start.x <= net.edge(start.edge).length))
        throw ConfigError("start position outside the network");
    const std::size_t n_edges = net.edges().size();

    // Unknowns: one per network node (root, junctions, leaf ends), then edge interiors.
    // upper_node[e] is the node at x = l_e; the node at x = 0 is the root or upper_node[parent].
    std::size_t next = 0;
    const std::size_t root_node = next++;
    std::vector<std::size_t> upper_node(n_edges);
    for (std::size_t e = 0; e < n_edges; ++e) upper_node[e] = next++;
    std::vector<std::vector<std::size_t>> node_of(n_edges);
    std::vector<std::vector<double>> x_of(n_edges);
    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto& edge = net.edges()[e];
        const auto cells = static_cast<std::size_t>(std::max(2.0, std::ceil(edge.length / dx - 1e-9)));
        const double h = edge.length / static_cast<double>(cells);
        const std::size_t lower = edge.parent < 0 ? root_node : upper_node[static_cast<std::size_t>(edge.parent)];
        node_of[e].push_back(lower);
        x_of[e].push_back(0.0);
        for (std::size_t i = 1; i < cells; ++i) {
            node_of[e].push_back(next++);
            x_of[e].push_back(static_cast<double>(i) * h);
        }
        node_of[e].push_back(upper_node[e]);
        x_of[e].push_back(edge.length);
    }
    const std::size_t n = next;

    SemiDiscrete sys;
    sys.mass.assign(n, 0.0);
    std::vector<Eigen::Triplet<double>> trips;
    double explicit_limit = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto& edge = net.edges()[e];
        for (std::size_t i = 0; i + 1 < node_of[e].size(); ++i) {
            const double h = x_of[e][i + 1] - x_of[e][i];
            const auto l = static_cast<Eigen::Index>(node_of[e][i]);
            const auto r = static_cast<Eigen::Index>(node_of[e][i + 1]);
            sys.mass[node_of[e][i]] += edge.area * h / 2;
            sys.mass[node_of[e][i + 1]] += edge.area * h / 2;
            const double g = edge.area * 0.5 * edge.diffusivity / h;
            trips.emplace_back(l, l, -g);
            trips.emplace_back(l, r, g);
            trips.emplace_back(r, r, -g);
            trips.emplace_back(r, l, g);
            // Downstream advection: flux from r into l of A v c_r.
            const double a = edge.area * edge.velocity;
            if (a > 0.0) {
                trips.emplace_back(l, r, a);
                trips.emplace_back(r, r, -a);
            }
            explicit_limit = std::min(explicit_limit, 1.0 / (edge.diffusivity / (h * h) + edge.velocity / h));
        }
    }
    sys.stiffness.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    sys.stiffness.setFromTriplets(trips.begin(), trips.end());
    sys.stiffness.makeCompressed();
    sys.fixed.emplace_back(root_node, 0.0);

    std::vector<double> u0(n, 0.0);
    {
        const auto e = static_cast<std::size_t>(start.edge);
        const auto& xs = x_of[e];
        const auto it = std::lower_bound(xs.begin(), xs.end(), start.x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin());
        if (i == xs.size() || (i > 0 && start.x - xs[i - 1] <= xs[i] - start.x)) --i;
        const std::size_t node = node_of[e][i];
        if (node == root_node) throw ConfigError("start position coincides with the absorbing root");
        u0[node] = 1.0 / sys.mass[node];
    }

    const TimeSeries ts = integrate_system(sys, u0, t_end, dt, scheme, snapshot_times, explicit_limit);

    NetworkSolution out;
    out.t_snapshots = ts.times;
    // The root inflow is only known in total; rebuild its history from the mass balance.
    for (std::size_t k = 0; k < ts.times.size(); ++k) out.total_mass.push_back(ts.weighted_mass[k]);
    for (std::size_t k = 0; k < ts.times.size(); ++k) out.absorbed.push_back(out.total_mass.front() - out.total_mass[k]);
    out.max_mass_balance_error = std::max(ts.max_step_imbalance, std::abs(out.absorbed.back() - ts.inflow.front()));
    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto& edge = net.edges()[e];
        GridSolution g;
        g.x = x_of[e];
        g.t_snapshots = ts.times;
        g.steps = ts.steps;
        g.dt = ts.dt;
        g.max_step_mass_drift = 0.0;
        g.boundary_leakage = 0.0;
        for (const auto& snap : ts.u) {
            std::vector<double> p;
            double m = 0.0;
            for (std::size_t i = 0; i < node_of[e].size(); ++i) p.push_back(edge.area * snap[node_of[e][i]]);
            for (std::size_t i = 0; i + 1 < p.size(); ++i) m += 0.5 * (p[i] + p[i + 1]) * (g.x[i + 1] - g.x[i]);
            g.u.push_back(std::move(p));
            g.mass.push_back(m);
        }
        out.per_edge.push_back(std::move(g));
    }
    return out;
}

std::vector<double> bin_probabilities(const NetworkSolution& solution, const NetworkHistogram& h) {
    std::vector<double> out;
    for (std::size_t e = 0; e < h.counts.size(); ++e) {
        const auto& g = solution.per_edge[e];
        const auto& p = g.u.back();
        for (std::size_t b = 0; b < h.counts[e].size(); ++b) {
            const double lo = h.edges_lo[e][b];
            const double hi = h.edges_hi[e][b];
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < g.x.size(); ++i) {
                const double a = std::max(lo, g.x[i]);
                const double c = std::min(hi, g.x[i + 1]);
                if (c <= a) continue;
                auto value = [&](double x) {
                    const double w = (x - g.x[i]) / (g.x[i + 1] - g.x[i]);
                    return (1 - w) * p[i] + w * p[i + 1];
                };
                s += 0.5 * (value(a) + value(c)) * (c - a);
            }
            out.push_back(s);
        }
    }
    out.push_back(solution.absorbed.back());
    return out;
}

std::string histogram_csv(const RiverNetwork& net, const NetworkHistogram& h) {
    std::string out = "edge_id,x_bin_center,mass\n";
    for (std::size_t e = 0; e < h.counts.size(); ++e)
        for (std::size_t b = 0; b < h.counts[e].size(); ++b) {
            out += net.edges()[e].id;
            out += ',';
            out += format_double(h.centers[e][b]);
            out += ',';
            out += format_double(static_cast<double>(h.counts[e][b]) / static_cast<double>(h.total));
            out += '\n';
        }
    return out;
}

}  // namespace skewdiff
