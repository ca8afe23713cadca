#include "skewdiff/densities.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "skewdiff/error.hpp"
#include "skewdiff/quadrature.hpp"
#include "skewdiff/special.hpp"

namespace skewdiff {

namespace {

void check_time(double t) {
    if (!(t > 0.0)) throw ConfigError("time must be positive");
}

}  // namespace

double physical_density(const InterfaceMedium& m, double t, double x, double y) {
    check_time(t);
    const double dp = m.d_plus(), dm = m.d_minus();
    const double sp = std::sqrt(dp), sm = std::sqrt(dm);
    const double skew = (sp - sm) / (sp + sm);
    if (x > 0.0 && y > 0.0) {
        return (std::exp(-(y - x) * (y - x) / (2.0 * dp * t)) + skew * std::exp(-(y + x) * (y + x) / (2.0 * dp * t))) /
               std::sqrt(2.0 * M_PI * dp * t);
    }
    if (x < 0.0 && y < 0.0) {
        return (std::exp(-(y - x) * (y - x) / (2.0 * dm * t)) - skew * std::exp(-(y + x) * (y + x) / (2.0 * dm * t))) /
               std::sqrt(2.0 * M_PI * dm * t);
    }
    const double cross = 2.0 / (sp + sm) / std::sqrt(2.0 * M_PI * t);
    if (x <= 0.0 && y >= 0.0) {
        const double d = y * sm - x * sp;
        return cross * std::exp(-d * d / (2.0 * dm * dp * t));
    }
    const double d = y * sp - x * sm;
    return cross * std::exp(-d * d / (2.0 * dm * dp * t));
}

double skew_bm_density(double alpha, double t, double x, double y) {
    check_time(t);
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * t);
    const double direct = norm * std::exp(-(y - x) * (y - x) / (2.0 * t));
    if (x > 0.0 && y > 0.0) return direct + (2.0 * alpha - 1.0) * norm * std::exp(-(y + x) * (y + x) / (2.0 * t));
    if (x < 0.0 && y <= 0.0) return direct - (2.0 * alpha - 1.0) * norm * std::exp(-(y + x) * (y + x) / (2.0 * t));
    if (x <= 0.0 && y > 0.0) return 2.0 * alpha * direct;
    return 2.0 * (1.0 - alpha) * direct;
}

namespace {

// Image under the inverse scale map that stays on the same side of 0 even when it underflows.
double to_bm(const InterfaceMedium& m, double x) noexcept {
    const double b = scale_map_inverse(m, x);
    return x > 0.0 && b == 0.0 ? std::numeric_limits<double>::denorm_min() : b;
}

}  // namespace

double skew_diffusion_density(const InterfaceMedium& m, double t, double x, double y) {
    const double bx = to_bm(m, x);
    const double by = to_bm(m, y);
    return skew_bm_density(alpha_of_lambda(m), t, bx, by) / std::sqrt(m.diffusivity(y));
}

double skew_bm_cdf(double alpha, double t, double x, double y) {
    check_time(t);
    const double st = std::sqrt(t);
    const auto Phi = [st](double z) { return normal_cdf(z / st); };
    if (x > 0.0) {
        if (y <= 0.0) return 2.0 * (1.0 - alpha) * Phi(y - x);
        return 2.0 * (1.0 - alpha) * Phi(-x) + (Phi(y - x) - Phi(-x)) + (2.0 * alpha - 1.0) * (Phi(y + x) - Phi(x));
    }
    if (y <= 0.0) return Phi(y - x) - (2.0 * alpha - 1.0) * Phi(y + x);
    const double at_zero = Phi(-x) - (2.0 * alpha - 1.0) * Phi(x);
    return at_zero + 2.0 * alpha * (Phi(y - x) - Phi(-x));
}

double skew_diffusion_cdf(const InterfaceMedium& m, double t, double x, double y) {
    return skew_bm_cdf(alpha_of_lambda(m), t, to_bm(m, x), to_bm(m, y));
}

double half_line_mass(const InterfaceMedium& m, double t, double x, Side side) {
    check_time(t);
    constexpr double tol = 1e-10;
    const auto f = [&](double y) { return skew_diffusion_density(m, t, x, y); };
    const std::array<double, 1> kinks{x};
    if (side == Side::plus) {
        const double hi = std::max(x, 0.0) + 12.0 * std::sqrt(m.d_plus() * t);
        return integrate_split(f, 0.0, hi, kinks, tol).value;
    }
    const double lo = std::min(x, 0.0) - 12.0 * std::sqrt(m.d_minus() * t);
    return integrate_split(f, lo, 0.0, kinks, tol).value;
}

}  // namespace skewdiff
