#include "skewdiff/pde.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "skewdiff/error.hpp"
#include "skewdiff/io.hpp"

namespace skewdiff {

PdeMedium PdeMedium::from(const InterfaceMedium& medium) {
    return PdeMedium{{0.0}, {medium.d_minus(), medium.d_plus()}, {medium.lambda()}};
}

PdeMedium PdeMedium::from(const MultiMedium& medium) {
    PdeMedium out;
    out.interfaces.assign(medium.interfaces().begin(), medium.interfaces().end());
    out.diffusivities.assign(medium.diffusivities().begin(), medium.diffusivities().end());
    for (std::size_t k = 0; k < out.interfaces.size(); ++k)
        out.lambdas.push_back(conservative_lambda(out.diffusivities[k + 1], out.diffusivities[k]));
    return out;
}

PdeMedium PdeMedium::from(const MultiMedium& medium, std::vector<double> lambdas) {
    PdeMedium out = from(medium);
    out.lambdas = std::move(lambdas);
    out.validate();
    return out;
}

void PdeMedium::validate() const {
    if (diffusivities.size() != interfaces.size() + 1)
        throw ConfigError("pde medium needs one diffusivity per piece");
    if (lambdas.size() != interfaces.size()) throw ConfigError("pde medium needs one lambda per interface");
    for (std::size_t k = 1; k < interfaces.size(); ++k)
        if (!(interfaces[k] > interfaces[k - 1])) throw ConfigError("interfaces must be strictly increasing");
    for (double d : diffusivities)
        if (!(d >= kMinDiffusivity) || !std::isfinite(d)) throw ConfigError("diffusivities must be positive");
    for (double l : lambdas)
        if (!(l > 0.0 && l < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
}

std::size_t PdeMedium::piece(double x) const noexcept {
    return static_cast<std::size_t>(std::lower_bound(interfaces.begin(), interfaces.end(), x) - interfaces.begin());
}

bool PdeMedium::conservative(double tol) const noexcept {
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double star = conservative_lambda(diffusivities[k + 1], diffusivities[k]);
        if (std::abs(lambdas[k] - star) > tol) return false;
    }
    return true;
}

Grid::Grid(double x_min, double x_max, double dx, std::span<const double> interfaces) {
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
        throw ConfigError("grid needs finite x_min < x_max");
    if (!(dx > 0.0) || dx > x_max - x_min) throw ConfigError("grid spacing must lie in (0, x_max - x_min]");
    std::vector<double> breaks{x_min};
    for (double s : interfaces) {
        if (!(s > x_min && s < x_max)) throw ConfigError("every interface must lie strictly inside the grid");
        breaks.push_back(s);
    }
    breaks.push_back(x_max);
    nodes_.push_back(x_min);
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double len = breaks[k + 1] - breaks[k];
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / dx - 1e-9)));
        const double h = len / static_cast<double>(n);
        for (std::size_t i = 1; i < n; ++i) nodes_.push_back(breaks[k] + static_cast<double>(i) * h);
        nodes_.push_back(breaks[k + 1]);
    }
    weights_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        const double h = nodes_[i + 1] - nodes_[i];
        weights_[i] += h / 2;
        weights_[i + 1] += h / 2;
    }
}

std::size_t Grid::nearest(double x) const noexcept {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
    if (it == nodes_.begin()) return 0;
    if (it == nodes_.end()) return nodes_.size() - 1;
    const auto i = static_cast<std::size_t>(it - nodes_.begin());
    return (x - nodes_[i - 1] <= nodes_[i] - x) ? i - 1 : i;
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

// Matrix with row i = diag(M) - c K on free rows and the identity on fixed rows.
SparseMatrix system_matrix(const SemiDiscrete& sys, double c, const std::vector<bool>& is_fixed) {
    const auto n = static_cast<Eigen::Index>(sys.mass.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(sys.stiffness.nonZeros()) + sys.mass.size());
    for (Eigen::Index col = 0; col < sys.stiffness.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(sys.stiffness, col); it; ++it)
            if (!is_fixed[static_cast<std::size_t>(it.row())]) trips.emplace_back(it.row(), it.col(), -c * it.value());
    for (Eigen::Index i = 0; i < n; ++i)
        trips.emplace_back(i, i, is_fixed[static_cast<std::size_t>(i)] ? 1.0 : sys.mass[static_cast<std::size_t>(i)]);
    SparseMatrix a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
}

class Factorized {
public:
    explicit Factorized(const SparseMatrix& a) {
        lu_.analyzePattern(a);
        lu_.factorize(a);
        if (lu_.info() != Eigen::Success)
            throw NumericalError("singular time-step matrix: " + lu_.lastErrorMessage());
    }
    Vector solve(const Vector& rhs) {
        Vector x = lu_.solve(rhs);
        if (lu_.info() != Eigen::Success || !x.allFinite()) throw NumericalError("time-step solve failed");
        return x;
    }

private:
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace

TimeSeries integrate_system(const SemiDiscrete& sys, std::span<const double> u0, double t_end, double dt,
                            TimeScheme scheme, std::span<const double> snapshot_times, double explicit_dt_limit) {
    const std::size_t n = sys.mass.size();
    if (u0.size() != n) throw ConfigError("initial data size does not match the grid");
    if (static_cast<std::size_t>(sys.stiffness.rows()) != n || static_cast<std::size_t>(sys.stiffness.cols()) != n)
        throw ConfigError("stiffness matrix size does not match the grid");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
    if (!(dt > 0.0) || dt > t_end) throw ConfigError("dt must lie in (0, t_end]");
    for (double v : u0)
        if (!std::isfinite(v)) throw ConfigError("initial data must be finite");

    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t_end / dt - 1e-9)));
    const double h = t_end / static_cast<double>(steps);
    if (scheme == TimeScheme::explicit_euler && h > explicit_dt_limit * (1 + 1e-12))
        throw ConfigError("explicit step " + format_double(h) + " exceeds the stability limit " +
                          format_double(explicit_dt_limit));

    std::vector<bool> is_fixed(n, false);
    for (const auto& [node, value] : sys.fixed) {
        if (node >= n) throw ConfigError("fixed node outside the grid");
        is_fixed[node] = true;
    }

    std::vector<std::size_t> snap_steps{0, steps};
    for (double t : snapshot_times) {
        if (!(t >= 0.0 && t <= t_end)) throw ConfigError("snapshot time outside [0, t_end]");
        snap_steps.push_back(static_cast<std::size_t>(std::llround(t / h)));
    }
    std::sort(snap_steps.begin(), snap_steps.end());
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

    Vector u = Eigen::Map<const Vector>(u0.data(), static_cast<Eigen::Index>(n));
    for (const auto& [node, value] : sys.fixed) u[static_cast<Eigen::Index>(node)] = value;
    const Vector mass = Eigen::Map<const Vector>(sys.mass.data(), static_cast<Eigen::Index>(n));

    TimeSeries out;
    out.steps = steps;
    out.dt = h;
    out.inflow.assign(sys.fixed.size(), 0.0);

    auto free_mass = [&](const Vector& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!is_fixed[i]) s += sys.mass[i] * v[static_cast<Eigen::Index>(i)];
        return s;
    };
    if (!sys.measure.empty() && sys.measure.size() != n) throw ConfigError("measure size does not match the grid");
    auto reported_mass = [&](const Vector& v) {
        if (sys.measure.empty()) return free_mass(v);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += sys.measure[i] * v[static_cast<Eigen::Index>(i)];
        return s;
    };
    std::size_t next_snap = 0;
    auto maybe_snapshot = [&](std::size_t k) {
        if (next_snap < snap_steps.size() && snap_steps[next_snap] == k) {
            out.times.push_back(static_cast<double>(k) * h);
            out.u.emplace_back(u.data(), u.data() + n);
            out.weighted_mass.push_back(reported_mass(u));
            ++next_snap;
        }
    };
    auto set_fixed = [&](Vector& v) {
        for (const auto& [node, value] : sys.fixed) v[static_cast<Eigen::Index>(node)] = value;
    };

#ifndef NDEBUG
    const bool check_max = sys.monotone && scheme != TimeScheme::crank_nicolson &&
                           std::all_of(u0.begin(), u0.end(), [](double v) { return v >= 0.0; }) &&
                           std::all_of(sys.fixed.begin(), sys.fixed.end(), [](const auto& f) { return f.second == 0.0; });
    double prev_max = u.maxCoeff();
#endif

    // One step from u with the given weights; `theta` is the implicit fraction.
    auto advance = [&](Factorized* solver, double step, double theta) {
        const Vector ku = sys.stiffness * u;
        Vector next;
        if (solver == nullptr) {
            next = u + step * ku.cwiseQuotient(mass);
        } else {
            Vector rhs = mass.cwiseProduct(u) + (1.0 - theta) * step * ku;
            set_fixed(rhs);
            next = solver->solve(rhs);
        }
        set_fixed(next);
        const Vector kn = theta > 0.0 ? Vector(sys.stiffness * next) : Vector();
        const double before = free_mass(u);
        double inflow_step = 0.0;
        for (std::size_t f = 0; f < sys.fixed.size(); ++f) {
            const auto node = static_cast<Eigen::Index>(sys.fixed[f].first);
            double flux = (1.0 - theta) * ku[node];
            if (theta > 0.0) flux += theta * kn[node];
            // K has zero column sums, so flux leaving the free nodes enters the fixed ones.
            out.inflow[f] += step * flux;
            inflow_step += step * flux;
        }
        out.max_step_imbalance = std::max(out.max_step_imbalance, std::abs(free_mass(next) - before + inflow_step));
        out.max_step_change = std::max(out.max_step_change, std::abs(reported_mass(next) - reported_mass(u)));
        u = std::move(next);
        if (!u.allFinite()) throw NumericalError("non-finite value in time stepping");
#ifndef NDEBUG
        if (check_max) {
            const double m = u.maxCoeff();
            assert(m <= prev_max * (1 + 1e-12) + 1e-300 && "discrete maximum principle violated");
            prev_max = m;
        }
#endif
    };

    maybe_snapshot(0);
    std::size_t k = 0;
    if (scheme == TimeScheme::explicit_euler) {
        for (; k < steps; ++k) {
            advance(nullptr, h, 0.0);
            maybe_snapshot(k + 1);
        }
    } else {
        if (scheme == TimeScheme::crank_nicolson) {
            // Rannacher start: the first two steps as four backward-Euler half steps damp the
            // high-frequency modes that Crank-Nicolson leaves undamped for rough data.
            const std::size_t start = std::min<std::size_t>(2, steps);
            Factorized half(system_matrix(sys, h / 2, is_fixed));
            for (; k < start; ++k) {
                advance(&half, h / 2, 1.0);
                advance(&half, h / 2, 1.0);
                maybe_snapshot(k + 1);
            }
            for (; k < steps; ++k) {
                advance(&half, h, 0.5);
                maybe_snapshot(k + 1);
            }
        } else {
            Factorized implicit(system_matrix(sys, h, is_fixed));
            for (; k < steps; ++k) {
                advance(&implicit, h, 1.0);
                maybe_snapshot(k + 1);
            }
        }
    }
    return out;
}

namespace {

struct PieceDensities {
    std::vector<double> s;  // scale density per piece
    std::vector<double> m;  // speed density per piece
};

// s' and m' per piece: m' s' D / 2 = 1 on each piece and s'_{k+1} / s'_k = (1 - lambda_k) / lambda_k.
PieceDensities piece_densities(const PdeMedium& medium) {
    PieceDensities pd;
    const std::size_t pieces = medium.diffusivities.size();
    pd.s.resize(pieces);
    pd.m.resize(pieces);
    pd.s[0] = 1.0 / medium.diffusivities[0];
    for (std::size_t k = 0; k + 1 < pieces; ++k)
        pd.s[k + 1] = pd.s[k] * (1.0 - medium.lambdas[k]) / medium.lambdas[k];
    for (std::size_t k = 0; k < pieces; ++k) pd.m[k] = 2.0 / (medium.diffusivities[k] * pd.s[k]);
    return pd;
}

}  // namespace

GridSolution solve_interface_pde(const PdeMedium& medium, const Grid& grid, const BoundaryConditions& bc,
                                 std::span<const double> u0, double t_end, double dt, const PdeOptions& options) {
    medium.validate();
    const auto x = grid.nodes();
    const std::size_t n = grid.size();
    for (double s : medium.interfaces)
        if (s <= grid.x_min() || s >= grid.x_max()) throw ConfigError("every interface must lie inside the grid");
    if (options.drift != 0.0 && !medium.conservative(1e-12))
        throw ConfigError("drift is only supported at conservative interfaces");
    if (!std::isfinite(options.drift)) throw ConfigError("drift must be finite");
    if (n < 3) throw ConfigError("grid needs at least three nodes");

    const PieceDensities pd = piece_densities(medium);
    std::vector<std::size_t> cell_piece(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) cell_piece[i] = medium.piece(0.5 * (x[i] + x[i + 1]));

    SemiDiscrete sys;
    sys.mass.assign(n, 0.0);
    sys.measure.assign(grid.weights().begin(), grid.weights().end());
    sys.monotone = true;
    std::vector<Eigen::Triplet<double>> trips;
    double min_ratio = std::numeric_limits<double>::infinity();
    const double v = options.drift;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t p = cell_piece[i];
        const double h = x[i + 1] - x[i];
        sys.mass[i] += pd.m[p] * h / 2;
        sys.mass[i + 1] += pd.m[p] * h / 2;
        const double g = 1.0 / (pd.s[p] * h);
        const auto a = static_cast<Eigen::Index>(i);
        const auto b = static_cast<Eigen::Index>(i + 1);
        trips.emplace_back(a, a, -g);
        trips.emplace_back(a, b, g);
        trips.emplace_back(b, b, -g);
        trips.emplace_back(b, a, g);
        if (v != 0.0) {
            // Upwinded advective flux from i to i+1, in speed-measure units (m' = 2 at lambda*).
            const double f = pd.m[p] * std::abs(v);
            const auto up = v > 0.0 ? a : b;
            const auto down = v > 0.0 ? b : a;
            trips.emplace_back(up, up, -f);
            trips.emplace_back(down, up, f);
        }
        min_ratio = std::min(min_ratio, h * h / medium.diffusivities[p]);
    }
    sys.stiffness.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    sys.stiffness.setFromTriplets(trips.begin(), trips.end());
    sys.stiffness.makeCompressed();

    auto add_boundary = [&](const Boundary& b, std::size_t node) {
        switch (b.type) {
            case BoundaryType::dirichlet_zero: sys.fixed.emplace_back(node, 0.0); break;
            case BoundaryType::value:
                if (!std::isfinite(b.value)) throw ConfigError("boundary value must be finite");
                sys.fixed.emplace_back(node, b.value);
                break;
            case BoundaryType::neumann_zero: break;
        }
    };
    add_boundary(bc.left, 0);
    add_boundary(bc.right, n - 1);

    // Explicit stability: dt <= min h^2 / (2 max D) on the uniform pieces, with the drift's CFL share.
    double explicit_limit = min_ratio / 2.0;
    if (v != 0.0) {
        double min_h = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < n; ++i) min_h = std::min(min_h, x[i + 1] - x[i]);
        explicit_limit = 1.0 / (1.0 / explicit_limit + std::abs(v) / min_h);
    }

    const TimeSeries ts = integrate_system(sys, u0, t_end, dt, options.scheme, options.snapshot_times, explicit_limit);

    GridSolution sol;
    sol.x.assign(x.begin(), x.end());
    sol.t_snapshots = ts.times;
    sol.u = ts.u;
    sol.steps = ts.steps;
    sol.dt = ts.dt;
    sol.mass = ts.weighted_mass;
    // Fixed nodes absorb K u in speed-measure units; divide by the boundary cell's m' for length units.
    sol.boundary_leakage = 0.0;
    for (std::size_t f = 0; f < sys.fixed.size(); ++f) {
        const std::size_t node = sys.fixed[f].first;
        const std::size_t cell = node == 0 ? 0 : n - 2;
        sol.boundary_leakage += ts.inflow[f] / pd.m[cell_piece[cell]];
    }
    sol.max_step_mass_drift = ts.max_step_change / std::abs(sol.mass.front());
    return sol;
}

std::vector<double> delta_initial(const Grid& grid, double x0) {
    if (x0 < grid.x_min() || x0 > grid.x_max()) throw ConfigError("delta location outside the grid");
    std::vector<double> u(grid.size(), 0.0);
    const std::size_t j = grid.nearest(x0);
    u[j] = 1.0 / grid.weights()[j];
    return u;
}

std::vector<double> breakthrough_curve(const GridSolution& solution, double x_obs) {
    const auto& x = solution.x;
    if (x.size() < 2 || !(x_obs >= x.front() && x_obs <= x.back()))
        throw ConfigError("observation point outside the grid");
    auto it = std::upper_bound(x.begin(), x.end(), x_obs);
    std::size_t i = it == x.end() ? x.size() - 2 : static_cast<std::size_t>(it - x.begin()) - 1;
    i = std::min(i, x.size() - 2);
    const double w = (x_obs - x[i]) / (x[i + 1] - x[i]);
    std::vector<double> out;
    out.reserve(solution.u.size());
    for (const auto& u : solution.u) out.push_back((1 - w) * u[i] + w * u[i + 1]);
    return out;
}

InterfaceMedium preset_heat_conduction(double kappa_plus, double kappa_minus, double rho_plus, double rho_minus) {
    for (double p : {kappa_plus, kappa_minus, rho_plus, rho_minus})
        if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("heat conduction parameters must be positive");
    return InterfaceMedium(kappa_plus / rho_plus, kappa_minus / rho_minus, kappa_plus / (kappa_plus + kappa_minus));
}

InterfaceMedium preset_atw(double r, double f, double h_plus, double h_minus) {
    if (!(r > 0.0)) throw ConfigError("bottom friction r must be positive");
    if (!(f < 0.0)) throw ConfigError("Coriolis parameter f must be negative");
    if (!(h_plus > 0.0) || !(h_minus > 0.0)) throw ConfigError("bottom slopes must be positive");
    return InterfaceMedium(-r / (f * h_plus), -r / (f * h_minus), 0.5);
}

std::string solution_csv(const GridSolution& solution) {
    std::string out = "t,x,u\n";
    for (std::size_t k = 0; k < solution.u.size(); ++k) {
        const std::string t = format_double(solution.t_snapshots[k]);
        for (std::size_t i = 0; i < solution.x.size(); ++i) {
            out += t;
            out += ',';
            out += format_double(solution.x[i]);
            out += ',';
            out += format_double(solution.u[k][i]);
            out += '\n';
        }
    }
    return out;
}

}  // namespace skewdiff
