#pragma once

#include <span>
#include <vector>

namespace skewdiff {

/// Smallest accepted diffusivity.
inline constexpr double kMinDiffusivity = 1e-12;

enum class Side { minus, plus };

/// Side of the interface at 0 that owns x. The interface point itself belongs to the minus side.
constexpr Side side_of(double x) noexcept { return x > 0.0 ? Side::plus : Side::minus; }

/// Two half-lines with constant diffusivities glued at x = 0 by the condition
/// lambda u'(0+) = (1 - lambda) u'(0-), u continuous.
class InterfaceMedium {
public:
    /// Throws ConfigError unless d_plus, d_minus >= kMinDiffusivity and 0 < lambda < 1.
    InterfaceMedium(double d_plus, double d_minus, double lambda);

    /// Flux-continuous medium, lambda = D+/(D+ + D-).
    static InterfaceMedium conservative(double d_plus, double d_minus);

    double d_plus() const noexcept { return d_plus_; }
    double d_minus() const noexcept { return d_minus_; }
    double lambda() const noexcept { return lambda_; }
    double diffusivity(double x) const noexcept { return x > 0.0 ? d_plus_ : d_minus_; }

    bool is_conservative(double tol = 1e-14) const noexcept;

private:
    double d_plus_;
    double d_minus_;
    double lambda_;
};

/// Piecewise-constant diffusivity with several conservative interfaces.
/// diffusivities[k] applies on (x_{k-1}, x_k]; diffusivities.front() on (-inf, x_0].
class MultiMedium {
public:
    MultiMedium(std::vector<double> interfaces, std::vector<double> diffusivities);

    std::span<const double> interfaces() const noexcept { return interfaces_; }
    std::span<const double> diffusivities() const noexcept { return diffusivities_; }

    /// Index of the piece containing x; interface points belong to the piece on their left.
    std::size_t piece(double x) const noexcept;
    double diffusivity(double x) const noexcept { return diffusivities_[piece(x)]; }

    /// Transmission parameter of interface k, sqrt(D_right)/(sqrt(D_right) + sqrt(D_left)).
    double alpha(std::size_t k) const noexcept;
    double min_gap() const noexcept;
    double max_diffusivity() const noexcept;

    /// Image of each interface under the inverse scale map, int_0^{x_k} D^{-1/2}.
    std::span<const double> scale_knots() const noexcept { return knots_; }

private:
    std::vector<double> interfaces_;
    std::vector<double> diffusivities_;
    std::vector<double> knots_;
};

/// Piecewise-constant scale and speed densities of a single-interface medium.
struct ScaleSpeed {
    double s_plus;
    double s_minus;
    double m_plus;
    double m_minus;
};

/// alpha(lambda) = lambda sqrt(D-) / (lambda sqrt(D-) + (1 - lambda) sqrt(D+)).
double alpha_of_lambda(const InterfaceMedium& medium) noexcept;
double alpha_of_lambda(double d_plus, double d_minus, double lambda) noexcept;

/// lambda* = D+/(D+ + D-).
double conservative_lambda(double d_plus, double d_minus) noexcept;
inline double conservative_lambda(const InterfaceMedium& m) noexcept {
    return conservative_lambda(m.d_plus(), m.d_minus());
}

/// alpha* = sqrt(D+)/(sqrt(D+) + sqrt(D-)); the transmission parameter at lambda*.
double conservative_alpha(double d_plus, double d_minus) noexcept;

/// Transmission parameter of X = X(0) + int sqrt(D) dB + (gamma/2) L^X(t,0). Requires gamma < 1.
double alpha_of_gamma(const InterfaceMedium& medium, double gamma);
/// Interface parameter matching a local-time coefficient, 1/(2 - gamma).
double lambda_of_gamma(double gamma);
/// Inverse of lambda_of_gamma, 2 - 1/lambda.
double gamma_of_lambda(double lambda) noexcept;

/// s_sqrtD: maps skew Brownian coordinates to physical ones, slope sqrt(D) on each side.
double scale_map(const InterfaceMedium& medium, double b) noexcept;
double scale_map_inverse(const InterfaceMedium& medium, double x) noexcept;

/// Multi-interface version: continuous, piecewise linear with slope sqrt(D_k), fixing 0.
double scale_map(const MultiMedium& medium, double b) noexcept;
double scale_map_inverse(const MultiMedium& medium, double x) noexcept;

/// Scale and speed densities with d/dm d/ds = (1/2) D d^2/dx^2 on each side and the
/// lambda-weighted derivative jump at 0. Normalized so that s'(+-) = (1-lambda, lambda) *
/// (1/D+ + 1/D-), which reduces to s' = 1/D, m' = 2 at lambda*.
ScaleSpeed speed_scale(const InterfaceMedium& medium) noexcept;

}  // namespace skewdiff
