#pragma once

namespace skewdiff {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2 = 1.41421356237309504880;

double normal_pdf(double z) noexcept;
/// Phi(z), computed through erfc so that the lower tail keeps full relative precision.
double normal_cdf(double z) noexcept;
/// 1 - Phi(z) without cancellation.
double normal_sf(double z) noexcept;
/// Inverse of Phi on (0, 1); Wichura's AS241 (relative accuracy ~1e-16).
double normal_quantile(double p) noexcept;

/// Gaussian density with mean `mean` and variance `var`.
double gaussian_pdf(double x, double mean, double var) noexcept;

/// Draw from N(mean, sd^2) conditioned on (0, inf) given u ~ U(0,1).
/// Inverts the complementary tail, so truncation points deep in the tail stay accurate.
double truncated_normal_above_zero(double mean, double sd, double u) noexcept;
/// Draw from N(mean, sd^2) conditioned on (-inf, 0).
double truncated_normal_below_zero(double mean, double sd, double u) noexcept;

}  // namespace skewdiff
