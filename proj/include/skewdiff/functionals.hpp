#pragma once

#include <limits>
#include <span>
#include <vector>

#include "skewdiff/media.hpp"
#include "skewdiff/paths.hpp"
#include "skewdiff/stats.hpp"

namespace skewdiff {

struct ExitStats {
    double p_exit_left = 0.0;
    double p_exit_right = 0.0;
    double mean_exit_time = 0.0;
    // 3-sigma half-widths; zero for analytic results
    double ci_p = 0.0;
    double ci_time = 0.0;
};

/// Exit law of (a, b) from x via the piecewise-constant scale and speed densities:
/// p_right = s(a, x)/s(a, b) and E tau = int G(x, y) m(dy), integrated exactly.
/// Requires a < x < b.
ExitStats exit_stats_analytic(const InterfaceMedium& medium, double a, double x, double b);
/// Multi-interface media are conservative at every interface: s' = 1/D_k, m' = 2.
ExitStats exit_stats_analytic(const MultiMedium& medium, double a, double x, double b);

/// Monte Carlo exit statistics from `x` (config.x0 is ignored). Crossings inside a step
/// are detected with the Brownian-bridge probability when both ends lie in the piece
/// of the boundary; the exit time is taken at the middle of the exit step.
/// Throws HorizonError when some path has not left (a, b) by config.horizon.
ExitStats exit_stats_mc(const InterfaceMedium& medium, double a, double x, double b, const SimConfig& config);
ExitStats exit_stats_mc(const MultiMedium& medium, double a, double x, double b, const SimConfig& config);

struct SurvivalCurve {
    std::vector<double> t_grid;
    std::vector<double> survival;
    std::vector<double> halfwidth;
    /// Raw estimate increased somewhere by more than its CI (before isotonic cleanup).
    bool monotonicity_violation = false;
};

/// P_{x0}(H_level > t) on t_grid. Each path carries the product of within-step
/// non-crossing probabilities; steps are refined to dt/substeps within
/// 4 sqrt(max D dt) of the interface. config.x0 is ignored.
SurvivalCurve first_passage_survival(const InterfaceMedium& medium, double x0, double level,
                                     std::span<const double> t_grid, const SimConfig& config);

struct PassageOrderingRow {
    double t = 0.0;
    Estimate from_minus;  // P_{-y}(H_y > t)
    Estimate from_plus;   // P_y(H_{-y} > t)
    double factor = 0.0;
    bool bound_separated = false;   // upper CI of from_minus < factor * lower CI of from_plus
    bool strict_separated = false;  // upper CI of from_minus < lower CI of from_plus
};

/// Compares injections at -y and +y: P_{-y}(H_y > t) <= factor * P_y(H_{-y} > t).
std::vector<PassageOrderingRow> passage_ordering(const InterfaceMedium& medium, double y, double factor,
                                                 std::span<const double> t_grid, const SimConfig& config);

/// Union of half-open intervals (lo, hi]; lo may be -inf and hi +inf. The half-open
/// form keeps x = 0 on the minus side for sets split at the interface.
class IntervalSet {
public:
    IntervalSet() = default;
    IntervalSet(double lo, double hi);
    static IntervalSet real_line();
    IntervalSet& add(double lo, double hi);
    bool contains(double x) const noexcept;

private:
    std::vector<std::pair<double, double>> pieces_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Left-endpoint Riemann sum of 1_set(X) over the path grid.
double natural_occupation_time(const PathSample& path, const IntervalSet& set);

enum class OccupationWeight { time, quadratic_variation };

/// Streams config.n_paths skew-diffusion paths and returns, for every set, the per-path
/// occupation times (result[set][path]); quadratic_variation weights each increment by D(X).
std::vector<std::vector<double>> occupation_times(const InterfaceMedium& medium, const SimConfig& config,
                                                  std::span<const IntervalSet> sets,
                                                  OccupationWeight weight = OccupationWeight::time);

struct OccupationBalanceRow {
    double lambda = 0.0;
    double alpha = 0.0;
    Estimate plus;        // E Gamma+(t)
    Estimate difference;  // E Gamma+(t) - E Gamma-(t)
    int expected_sign = 0;
    bool sign_consistent = false;
    bool plus_matches_alpha_t = false;
};

/// E Gamma+ - E Gamma- at t = config.horizon for each medium, with the sign predicted by
/// lambda against sqrt(D+)/(sqrt(D+) + sqrt(D-)).
std::vector<OccupationBalanceRow> occupation_balance_report(std::span<const InterfaceMedium> media,
                                                            const SimConfig& config);

struct LocalTimeEstimate {
    double epsilon = 0.0;
    Estimate l_plus;
    Estimate l_minus;
    Estimate ratio;  // l_plus / l_minus
    std::size_t n_paths = 0;
};

/// One-sided natural local times at a from stored paths: occupation of (a, a+eps] and
/// (a-eps, a], divided by eps.
LocalTimeEstimate natural_local_time(std::span<const PathSample> paths, double a, double epsilon);

/// Exact expectation of the same finite-window estimates for the lambda-skew diffusion
/// started at x0 and run for time t: (1/eps) int_0^t P(X_s in window) ds, by quadrature of
/// the closed-form CDF. Half-widths are zero.
LocalTimeEstimate expected_local_time(const InterfaceMedium& medium, double x0, double t, double epsilon);

/// Right/left semimartingale local time ratio: occupation increments weighted by D(X).
Estimate semimartingale_local_time_jump(std::span<const PathSample> paths, const InterfaceMedium& medium,
                                        double epsilon);

struct LocalTimeStudy {
    std::vector<LocalTimeEstimate> natural;
    std::vector<Estimate> semimartingale_ratio;
};

/// Streaming version over several window widths from one set of paths at the interface.
LocalTimeStudy local_time_study(const InterfaceMedium& medium, std::span<const double> epsilons,
                                const SimConfig& config);

struct OccupationDensityReport {
    Estimate direct;          // E Gamma(window)
    double from_local_time;   // sum over bins of L(center) * width
    double discrepancy;       // from_local_time - direct.value
};

/// Compares the occupation of [lo, hi] with the bin-midpoint sum of natural local time
/// estimated on windows of half the bin width around each center.
OccupationDensityReport occupation_density_consistency(std::span<const PathSample> paths, double lo, double hi,
                                                       double bin_width);

}  // namespace skewdiff
