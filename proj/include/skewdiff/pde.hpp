#pragma once

#include <Eigen/SparseCore>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewdiff/media.hpp"

namespace skewdiff {

/// Piecewise-constant diffusivities with a general interface parameter at each interface.
struct PdeMedium {
    std::vector<double> interfaces;
    std::vector<double> diffusivities;  // one per piece, left to right
    std::vector<double> lambdas;        // one per interface

    static PdeMedium from(const InterfaceMedium& medium);
    /// Conservative interfaces, lambda_k = D_right/(D_right + D_left).
    static PdeMedium from(const MultiMedium& medium);
    static PdeMedium from(const MultiMedium& medium, std::vector<double> lambdas);

    void validate() const;
    std::size_t piece(double x) const noexcept;  // interface points belong to the left piece
    bool conservative(double tol = 1e-12) const noexcept;
};

/// Nodes on [x_min, x_max] with a node exactly at every interface and uniform spacing
/// (at most `dx`) on each piece between consecutive interfaces or bounds.
class Grid {
public:
    Grid(double x_min, double x_max, double dx, std::span<const double> interfaces = {});

    std::span<const double> nodes() const noexcept { return nodes_; }
    /// Dual-cell lengths (trapezoid weights).
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t nearest(double x) const noexcept;
    double x_min() const noexcept { return nodes_.front(); }
    double x_max() const noexcept { return nodes_.back(); }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

enum class BoundaryType { dirichlet_zero, neumann_zero, value };

struct Boundary {
    BoundaryType type = BoundaryType::neumann_zero;
    double value = 0.0;
};

struct BoundaryConditions {
    Boundary left;
    Boundary right;
};

enum class TimeScheme { implicit, crank_nicolson, explicit_euler };

struct PdeOptions {
    TimeScheme scheme = TimeScheme::implicit;
    /// Constant drift v in u_t = (1/2) D u'' - v u_x; only allowed at conservative interfaces.
    double drift = 0.0;
    /// Extra output times (rounded to the step grid); 0 and t_end are always stored.
    std::vector<double> snapshot_times;
};

struct GridSolution {
    std::vector<double> x;
    std::vector<double> t_snapshots;
    std::vector<std::vector<double>> u;
    std::vector<double> mass;    // trapezoid integral of u per snapshot
    double max_step_mass_drift;  // max over steps of |mass change| / initial mass
    double boundary_leakage;     // time-integrated outward boundary flux, same units as mass
    std::size_t steps;
    double dt;                   // step actually used (t_end / steps)
};

/// Semi-discrete linear system M du/dt = K u with lumped (diagonal) M and some nodes held
/// at fixed values. K must have zero column sums for `inflow` to account for mass exactly.
struct SemiDiscrete {
    std::vector<double> mass;
    Eigen::SparseMatrix<double> stiffness;
    std::vector<std::pair<std::size_t, double>> fixed;
    /// Weights q for the reported mass sum_i q_i u_i over all nodes; empty means M on free nodes.
    std::vector<double> measure;
    /// Enables the debug-build maximum-principle check for nonnegative data and zero fixed values.
    bool monotone = false;
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<std::vector<double>> u;
    std::vector<double> weighted_mass;  // reported mass per snapshot (see SemiDiscrete::measure)
    double max_step_change = 0.0;       // max over steps of |change of reported mass|
    double max_step_imbalance = 0.0;    // max |change of sum M u over free nodes + fixed-node inflow|
    std::vector<double> inflow;         // per fixed node, time-integrated flux into it
    std::size_t steps = 0;
    double dt = 0.0;
};

/// Integrates the system from u0 to t_end with steps of at most dt. Throws ConfigError on
/// an explicit step above the stability bound `explicit_dt_limit` and NumericalError
/// when the linear solve fails.
TimeSeries integrate_system(const SemiDiscrete& system, std::span<const double> u0, double t_end, double dt,
                            TimeScheme scheme, std::span<const double> snapshot_times, double explicit_dt_limit);

/// Interface problem u_t = (1/2) D u'' on each piece, continuity and
/// lambda u_x(x_k+) = (1 - lambda) u_x(x_k-) at every interface. Vertex-centred finite volumes
/// in scale/speed form; tridiagonal M-matrix, exactly conservative at lambda*.
GridSolution solve_interface_pde(const PdeMedium& medium, const Grid& grid, const BoundaryConditions& bc,
                                 std::span<const double> u0, double t_end, double dt,
                                 const PdeOptions& options = {});

/// Unit-mass hat at the node nearest x0.
std::vector<double> delta_initial(const Grid& grid, double x0);

/// u(t, x_obs) per snapshot by linear interpolation between neighbouring nodes.
std::vector<double> breakthrough_curve(const GridSolution& solution, double x_obs);

/// D = kappa/rho on each side, lambda = kappa+/(kappa+ + kappa-).
InterfaceMedium preset_heat_conduction(double kappa_plus, double kappa_minus, double rho_plus, double rho_minus);

/// Arrested topographic wave: D = -r/(f h) on each side, lambda = 1/2; the solver's time axis is
/// the along-shore coordinate. Requires r > 0, f < 0, h > 0.
InterfaceMedium preset_atw(double r, double f, double h_plus, double h_minus);

/// CSV with header `t,x,u`, one row per snapshot and node.
std::string solution_csv(const GridSolution& solution);

}  // namespace skewdiff
