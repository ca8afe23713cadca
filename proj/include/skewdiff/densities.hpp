#pragma once

#include "skewdiff/media.hpp"

namespace skewdiff {

/// Transition density of the flux-continuous (physical) skew diffusion. The medium's
/// lambda is ignored. Boundary rows follow the printed case order: (x>0,y>0), (x<0,y<0),
/// (x<=0,y>=0), (x>=0,y<=0); the third case owns x = 0 or y = 0 when both apply.
double physical_density(const InterfaceMedium& medium, double t, double x, double y);

/// Transition density of alpha-skew Brownian motion (Walsh). y = 0 is assigned to the
/// minus side, so (x>0, y=0) uses the crossing kernel 2(1-alpha) phi.
double skew_bm_density(double alpha, double t, double x, double y);

/// Density of X = s_sqrtD(B^(alpha(lambda))), by change of variables.
double skew_diffusion_density(const InterfaceMedium& medium, double t, double x, double y);

/// Distribution functions matching the densities above (closed forms in Phi).
double skew_bm_cdf(double alpha, double t, double x, double y);
double skew_diffusion_cdf(const InterfaceMedium& medium, double t, double x, double y);

/// P(X(t) on `side` | X(0) = x) by adaptive quadrature of skew_diffusion_density,
/// absolute tolerance 1e-10, tails truncated at 12 standard deviations.
/// Throws QuadratureError if the tolerance is not reached.
double half_line_mass(const InterfaceMedium& medium, double t, double x, Side side);

}  // namespace skewdiff
