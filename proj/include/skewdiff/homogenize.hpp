#pragma once

#include <memory>
#include <vector>

#include "skewdiff/config.hpp"
#include "skewdiff/paths.hpp"
#include "skewdiff/stats.hpp"

namespace skewdiff {

/// Polynomial in the global coordinate, c[0] + c[1] x + c[2] x^2 + ...
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

    double operator()(double x) const noexcept;
    /// Antiderivative vanishing at 0.
    Polynomial antiderivative() const;
    const std::vector<double>& coeffs() const noexcept { return c_; }

    friend Polynomial operator+(const Polynomial& p, const Polynomial& q);
    friend Polynomial operator-(const Polynomial& p, const Polynomial& q);
    friend Polynomial operator*(const Polynomial& p, const Polynomial& q);
    friend Polynomial operator*(double s, const Polynomial& p);

private:
    std::vector<double> c_;
};

/// Longitudinal velocity v1(x2) on [a, b], piecewise polynomial. Sampled profiles are
/// turned into piecewise quadratics through consecutive sample triples (Simpson's rule).
class VelocityProfile {
public:
    VelocityProfile(std::vector<double> breaks, std::vector<Polynomial> pieces);

    static VelocityProfile constant(double a, double b, double v0);
    /// v0 (1 - ((x - c)/R)^2) with c = (a+b)/2, R = (b-a)/2.
    static VelocityProfile parabolic(double a, double b, double v0);
    /// Uniformly spaced samples with an odd count >= 3. When the count allows, a half-resolution
    /// profile is kept for a Richardson error estimate.
    static VelocityProfile sampled(std::vector<double> x, std::vector<double> v);

    double operator()(double x) const noexcept;
    const std::vector<double>& breaks() const noexcept { return breaks_; }
    const std::vector<Polynomial>& pieces() const noexcept { return pieces_; }
    /// Half-resolution version of a sampled profile, or null.
    const VelocityProfile* coarse() const noexcept { return coarse_.get(); }
    /// The profile under x -> a + b - x.
    VelocityProfile reflected() const;

private:
    std::vector<double> breaks_;
    std::vector<Polynomial> pieces_;
    std::shared_ptr<const VelocityProfile> coarse_;
};

/// Layers [l_k, l_{k+1}] of [a, b] with longitudinal (d1) and transverse (d2) diffusivities.
struct LayeredCrossSection {
    double a = -1.0;
    double b = 1.0;
    std::vector<double> layer_bounds;  // a = l_0 < ... < l_M = b
    std::vector<double> d1;
    std::vector<double> d2;
    VelocityProfile velocity = VelocityProfile::constant(-1.0, 1.0, 0.0);

    /// Throws ConfigError on non-increasing bounds, mismatched sizes, nonpositive diffusivities
    /// or a velocity profile not covering [a, b].
    void validate() const;
    std::size_t layer(double x) const noexcept;

    /// Isotropic layers split at the given interior interfaces.
    static LayeredCrossSection isotropic(double a, double b, std::vector<double> interfaces, std::vector<double> d,
                                         VelocityProfile velocity);
};

/// Average of v1 over [a, b] with respect to the uniform probability pi.
double mean_velocity(const LayeredCrossSection& cs);

/// g(y) = int_a^y (v1 - vbar) pi(dx), pi the uniform probability on [a, b].
double g_function(const LayeredCrossSection& cs, double y);

struct LayerTerms {
    double longitudinal = 0.0;  // D1 (l_{k+1} - l_k)/(b - a)
    double shear = 0.0;         // (b - a)^2 / D2 * int_layer g^2 dpi
};

struct Dispersion {
    double d_bar = 0.0;
    double v_bar = 0.0;
    std::vector<LayerTerms> terms;
    /// Richardson estimate for sampled profiles, 0 for polynomial ones.
    double quadrature_error = 0.0;
};

/// Effective longitudinal dispersion (Fickian convention, Var X1 ~ 2 D_bar t). All integrals
/// are exact piecewise-polynomial integrals.
Dispersion effective_dispersion(const LayeredCrossSection& cs);

/// D_a + 4 v0^2 R^2 / (945 D_h) for isotropic layers D+, D- split at the centre of [-R, R]
/// with a parabolic profile of peak v0.
double single_interface_dispersion(double d_plus, double d_minus, double v0, double r);

/// Var(X1(t) - vbar t) / (2 t) from paths with transverse flux-continuous skew diffusion on
/// [a, b] (reflected at the walls, started from the uniform law) and longitudinal increments
/// v1(X2) dt + sqrt(2 D1(X2) dt) N. config.horizon is t_long; config.x0 is ignored.
Estimate mc_longtime_variance(const LayeredCrossSection& cs, const SimConfig& config);

/// Reads the [layers] section: a, b, bounds, d1, d2 (or d for isotropic layers) and one of
/// velocity = constant V | parabolic V0, or velocity_breaks with velocity_coeffs (pieces
/// separated by ';'), or velocity_x with velocity_v (samples).
LayeredCrossSection cross_section_from_config(const ConfigDoc& doc);

}  // namespace skewdiff
