#include "skewdiff/media.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "skewdiff/error.hpp"

namespace skewdiff {

namespace {

void check_diffusivity(double d, const char* name) {
    if (!(d >= kMinDiffusivity) || !std::isfinite(d))
        throw ConfigError(std::string(name) + " must be finite and >= 1e-12, got " + std::to_string(d));
}

}  // namespace

InterfaceMedium::InterfaceMedium(double d_plus, double d_minus, double lambda)
    : d_plus_(d_plus), d_minus_(d_minus), lambda_(lambda) {
    check_diffusivity(d_plus, "d_plus");
    check_diffusivity(d_minus, "d_minus");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
}

InterfaceMedium InterfaceMedium::conservative(double d_plus, double d_minus) {
    check_diffusivity(d_plus, "d_plus");
    check_diffusivity(d_minus, "d_minus");
    return {d_plus, d_minus, conservative_lambda(d_plus, d_minus)};
}

bool InterfaceMedium::is_conservative(double tol) const noexcept {
    return std::fabs(lambda_ - conservative_lambda(d_plus_, d_minus_)) <= tol;
}

MultiMedium::MultiMedium(std::vector<double> interfaces, std::vector<double> diffusivities)
    : interfaces_(std::move(interfaces)), diffusivities_(std::move(diffusivities)) {
    if (diffusivities_.size() != interfaces_.size() + 1)
        throw ConfigError("MultiMedium needs one diffusivity more than interfaces");
    for (std::size_t k = 1; k < interfaces_.size(); ++k)
        if (!(interfaces_[k] > interfaces_[k - 1])) throw ConfigError("interfaces must be strictly increasing");
    for (double x : interfaces_)
        if (!std::isfinite(x)) throw ConfigError("interface positions must be finite");
    for (double d : diffusivities_) check_diffusivity(d, "diffusivity");

    const std::size_t origin = piece(0.0);
    knots_.resize(interfaces_.size());
    // Walk outward from the piece holding 0.
    for (std::size_t k = origin; k < interfaces_.size(); ++k) {
        const double from = k == origin ? 0.0 : interfaces_[k - 1];
        const double base = k == origin ? 0.0 : knots_[k - 1];
        knots_[k] = base + (interfaces_[k] - from) / std::sqrt(diffusivities_[k]);
    }
    for (std::size_t k = origin; k-- > 0;) {
        const double from = k + 1 == origin ? 0.0 : interfaces_[k + 1];
        const double base = k + 1 == origin ? 0.0 : knots_[k + 1];
        knots_[k] = base - (from - interfaces_[k]) / std::sqrt(diffusivities_[k + 1]);
    }
}

std::size_t MultiMedium::piece(double x) const noexcept {
    // First interface >= x; x on an interface belongs to the left piece.
    return static_cast<std::size_t>(std::lower_bound(interfaces_.begin(), interfaces_.end(), x) - interfaces_.begin());
}

double MultiMedium::alpha(std::size_t k) const noexcept {
    return conservative_alpha(diffusivities_[k + 1], diffusivities_[k]);
}

double MultiMedium::min_gap() const noexcept {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < interfaces_.size(); ++k) gap = std::min(gap, interfaces_[k] - interfaces_[k - 1]);
    return gap;
}

double MultiMedium::max_diffusivity() const noexcept {
    return *std::max_element(diffusivities_.begin(), diffusivities_.end());
}

double alpha_of_lambda(double d_plus, double d_minus, double lambda) noexcept {
    const double a = lambda * std::sqrt(d_minus);
    return a / (a + (1.0 - lambda) * std::sqrt(d_plus));
}

double alpha_of_lambda(const InterfaceMedium& m) noexcept {
    return alpha_of_lambda(m.d_plus(), m.d_minus(), m.lambda());
}

double conservative_lambda(double d_plus, double d_minus) noexcept { return d_plus / (d_plus + d_minus); }

double conservative_alpha(double d_plus, double d_minus) noexcept {
    const double sp = std::sqrt(d_plus);
    return sp / (sp + std::sqrt(d_minus));
}

double alpha_of_gamma(const InterfaceMedium& m, double gamma) {
    if (!(gamma < 1.0)) throw ConfigError("local-time coefficient gamma must be < 1");
    const double sm = std::sqrt(m.d_minus());
    return sm / (sm + std::sqrt(m.d_plus()) * (1.0 - gamma));
}

double lambda_of_gamma(double gamma) {
    if (!(gamma < 1.0)) throw ConfigError("local-time coefficient gamma must be < 1");
    return 1.0 / (2.0 - gamma);
}

double gamma_of_lambda(double lambda) noexcept { return 2.0 - 1.0 / lambda; }

double scale_map(const InterfaceMedium& m, double b) noexcept {
    return b > 0.0 ? std::sqrt(m.d_plus()) * b : std::sqrt(m.d_minus()) * b;
}

double scale_map_inverse(const InterfaceMedium& m, double x) noexcept {
    return x > 0.0 ? x / std::sqrt(m.d_plus()) : x / std::sqrt(m.d_minus());
}

double scale_map_inverse(const MultiMedium& m, double x) noexcept {
    const auto xs = m.interfaces();
    const auto knots = m.scale_knots();
    const std::size_t p = m.piece(x);
    const double d = m.diffusivities()[p];
    // Anchor on a knot of the piece, or on 0 when 0 lies in the same piece.
    if (m.piece(0.0) == p) return x / std::sqrt(d);
    if (p < xs.size()) return knots[p] + (x - xs[p]) / std::sqrt(d);
    return knots[p - 1] + (x - xs[p - 1]) / std::sqrt(d);
}

double scale_map(const MultiMedium& m, double b) noexcept {
    const auto xs = m.interfaces();
    const auto knots = m.scale_knots();
    const auto ds = m.diffusivities();
    // Knots are increasing; locate b among them with the same left-owning convention.
    const std::size_t p =
        static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), b) - knots.begin());
    const double sd = std::sqrt(ds[p]);
    if (m.piece(0.0) == p) return b * sd;
    if (p < xs.size()) return xs[p] + (b - knots[p]) * sd;
    return xs[p - 1] + (b - knots[p - 1]) * sd;
}

ScaleSpeed speed_scale(const InterfaceMedium& m) noexcept {
    const double kappa = 1.0 / m.d_plus() + 1.0 / m.d_minus();
    ScaleSpeed r{};
    r.s_plus = (1.0 - m.lambda()) * kappa;
    r.s_minus = m.lambda() * kappa;
    r.m_plus = 2.0 / (m.d_plus() * r.s_plus);
    r.m_minus = 2.0 / (m.d_minus() * r.s_minus);
    return r;
}

}  // namespace skewdiff
