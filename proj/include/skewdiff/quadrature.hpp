#pragma once

#include <functional>
#include <span>

namespace skewdiff {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Globally adaptive Gauss-Kronrod (G7/K15) on [lo, hi], bisecting the worst panel until
/// the summed error estimate is below `abs_tol`. The panel budget is 64 * max_depth;
/// QuadratureError (with the achieved error) is thrown when it runs out.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol = 1e-12,
                           int max_depth = 30);

/// Integrates over [lo, hi] after splitting at every breakpoint inside the interval,
/// so that kinks of piecewise-smooth integrands fall on panel edges.
QuadratureResult integrate_split(const std::function<double(double)>& f, double lo, double hi,
                                 std::span<const double> breakpoints, double abs_tol = 1e-12);

}  // namespace skewdiff
