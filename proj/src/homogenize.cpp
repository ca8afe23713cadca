#include "skewdiff/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewdiff/error.hpp"
#include "skewdiff/parallel.hpp"

namespace skewdiff {

double Polynomial::operator()(double x) const noexcept {
    double s = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * x + *it;
    return s;
}

Polynomial Polynomial::antiderivative() const {
    std::vector<double> c(c_.size() + 1, 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) c[k + 1] = c_[k] / static_cast<double>(k + 1);
    return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial& p, const Polynomial& q) {
    std::vector<double> c(std::max(p.c_.size(), q.c_.size()), 0.0);
    for (std::size_t k = 0; k < p.c_.size(); ++k) c[k] += p.c_[k];
    for (std::size_t k = 0; k < q.c_.size(); ++k) c[k] += q.c_[k];
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& p, const Polynomial& q) { return p + (-1.0) * q; }

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    if (p.c_.empty() || q.c_.empty()) return Polynomial();
    std::vector<double> c(p.c_.size() + q.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.c_.size(); ++i)
        for (std::size_t j = 0; j < q.c_.size(); ++j) c[i + j] += p.c_[i] * q.c_[j];
    return Polynomial(std::move(c));
}

Polynomial operator*(double s, const Polynomial& p) {
    std::vector<double> c = p.c_;
    for (double& v : c) v *= s;
    return Polynomial(std::move(c));
}

VelocityProfile::VelocityProfile(std::vector<double> breaks, std::vector<Polynomial> pieces)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
    if (breaks_.size() < 2 || pieces_.size() + 1 != breaks_.size())
        throw ConfigError("velocity profile needs one polynomial per break interval");
    for (std::size_t k = 1; k < breaks_.size(); ++k)
        if (!(breaks_[k] > breaks_[k - 1])) throw ConfigError("velocity breaks must be strictly increasing");
    for (const auto& p : pieces_)
        for (double c : p.coeffs())
            if (!std::isfinite(c)) throw ConfigError("velocity coefficients must be finite");
}

VelocityProfile VelocityProfile::constant(double a, double b, double v0) {
    return VelocityProfile({a, b}, {Polynomial({v0})});
}

VelocityProfile VelocityProfile::parabolic(double a, double b, double v0) {
    const double c = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    const double r2 = r * r;
    return VelocityProfile({a, b}, {Polynomial({v0 * (1.0 - c * c / r2), 2.0 * c * v0 / r2, -v0 / r2})});
}

VelocityProfile VelocityProfile::sampled(std::vector<double> x, std::vector<double> v) {
    const std::size_t n = x.size();
    if (n < 3 || n % 2 == 0) throw ConfigError("sampled velocity needs an odd number (>= 3) of samples");
    if (v.size() != n) throw ConfigError("sampled velocity needs as many values as positions");
    const double h = (x.back() - x.front()) / static_cast<double>(n - 1);
    if (!(h > 0.0)) throw ConfigError("sample positions must increase");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(x[i] - (x.front() + static_cast<double>(i) * h)) > 1e-9 * (std::abs(h) + std::abs(x[i])))
            throw ConfigError("sample positions must be uniformly spaced");
    std::vector<double> breaks{x.front()};
    std::vector<Polynomial> pieces;
    for (std::size_t j = 0; j + 2 < n; j += 2) {
        // Lagrange quadratic through (x_j, x_{j+1}, x_{j+2}).
        Polynomial p;
        for (std::size_t i = 0; i < 3; ++i) {
            Polynomial basis({1.0});
            for (std::size_t m = 0; m < 3; ++m) {
                if (m == i) continue;
                const double d = x[j + i] - x[j + m];
                basis = basis * Polynomial({-x[j + m] / d, 1.0 / d});
            }
            p = p + v[j + i] * basis;
        }
        pieces.push_back(std::move(p));
        breaks.push_back(x[j + 2]);
    }
    VelocityProfile out(std::move(breaks), std::move(pieces));
    if (n >= 5 && (n - 1) % 4 == 0) {
        std::vector<double> cx, cv;
        for (std::size_t i = 0; i < n; i += 2) {
            cx.push_back(x[i]);
            cv.push_back(v[i]);
        }
        out.coarse_ = std::make_shared<const VelocityProfile>(sampled(std::move(cx), std::move(cv)));
    }
    return out;
}

double VelocityProfile::operator()(double x) const noexcept {
    const auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, x);
    return pieces_[static_cast<std::size_t>(it - breaks_.begin()) - 1](x);
}

VelocityProfile VelocityProfile::reflected() const {
    const double s = breaks_.front() + breaks_.back();
    std::vector<double> breaks;
    for (auto it = breaks_.rbegin(); it != breaks_.rend(); ++it) breaks.push_back(s - *it);
    std::vector<Polynomial> pieces;
    const Polynomial mirror({s, -1.0});
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
        Polynomial q;
        const auto& c = it->coeffs();
        for (auto ci = c.rbegin(); ci != c.rend(); ++ci) q = q * mirror + Polynomial({*ci});
        pieces.push_back(std::move(q));
    }
    VelocityProfile out(std::move(breaks), std::move(pieces));
    if (coarse_) out.coarse_ = std::make_shared<const VelocityProfile>(coarse_->reflected());
    return out;
}

void LayeredCrossSection::validate() const {
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) throw ConfigError("cross-section needs finite a < b");
    if (layer_bounds.size() < 2 || layer_bounds.front() != a || layer_bounds.back() != b)
        throw ConfigError("layer bounds must start at a and end at b");
    for (std::size_t k = 1; k < layer_bounds.size(); ++k)
        if (!(layer_bounds[k] > layer_bounds[k - 1])) throw ConfigError("layer bounds must be strictly increasing");
    const std::size_t m = layer_bounds.size() - 1;
    if (d1.size() != m || d2.size() != m) throw ConfigError("need one d1 and one d2 per layer");
    for (double d : d1)
        if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("d1 must be positive");
    for (double d : d2)
        if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("d2 must be positive");
    const auto& vb = velocity.breaks();
    const double tol = 1e-12 * (b - a);
    if (std::abs(vb.front() - a) > tol || std::abs(vb.back() - b) > tol)
        throw ConfigError("velocity profile must cover exactly [a, b]");
}

std::size_t LayeredCrossSection::layer(double x) const noexcept {
    const auto it = std::lower_bound(layer_bounds.begin() + 1, layer_bounds.end() - 1, x);
    return static_cast<std::size_t>(it - layer_bounds.begin()) - 1;
}

LayeredCrossSection LayeredCrossSection::isotropic(double a, double b, std::vector<double> interfaces,
                                                   std::vector<double> d, VelocityProfile velocity) {
    LayeredCrossSection cs;
    cs.a = a;
    cs.b = b;
    cs.layer_bounds.push_back(a);
    cs.layer_bounds.insert(cs.layer_bounds.end(), interfaces.begin(), interfaces.end());
    cs.layer_bounds.push_back(b);
    cs.d1 = d;
    cs.d2 = std::move(d);
    cs.velocity = std::move(velocity);
    cs.validate();
    return cs;
}

namespace {

struct Segment {
    double lo;
    double hi;
    std::size_t layer;
    const Polynomial* v;
};

std::vector<Segment> segments(const LayeredCrossSection& cs, const VelocityProfile& profile) {
    std::vector<double> cuts(cs.layer_bounds.begin(), cs.layer_bounds.end());
    for (double x : profile.breaks())
        if (x > cs.a && x < cs.b) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Segment> out;
    const auto& vb = profile.breaks();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        const auto it = std::upper_bound(vb.begin() + 1, vb.end() - 1, mid);
        out.push_back({cuts[i], cuts[i + 1], cs.layer(mid), &profile.pieces()[static_cast<std::size_t>(it - vb.begin()) - 1]});
    }
    return out;
}

double integral(const Polynomial& p, double lo, double hi) {
    const Polynomial q = p.antiderivative();
    return q(hi) - q(lo);
}

double mean_velocity_of(const LayeredCrossSection& cs, const VelocityProfile& profile) {
    double s = 0.0;
    for (const auto& seg : segments(cs, profile)) s += integral(*seg.v, seg.lo, seg.hi);
    return s / (cs.b - cs.a);
}

// Lebesgue-measure g, i.e. (b - a) times the pi-measure g, as a polynomial on each segment.
std::vector<Polynomial> g_pieces(const std::vector<Segment>& segs, double vbar) {
    std::vector<Polynomial> out;
    double carried = 0.0;
    for (const auto& seg : segs) {
        const Polynomial q = (*seg.v - Polynomial({vbar})).antiderivative();
        const Polynomial g = q + Polynomial({carried - q(seg.lo)});
        carried = g(seg.hi);
        out.push_back(g);
    }
    return out;
}

Dispersion dispersion_of(const LayeredCrossSection& cs, const VelocityProfile& profile) {
    Dispersion out;
    out.v_bar = mean_velocity_of(cs, profile);
    const double width = cs.b - cs.a;
    const auto segs = segments(cs, profile);
    const auto g = g_pieces(segs, out.v_bar);
    const std::size_t m = cs.d1.size();
    out.terms.assign(m, {});
    for (std::size_t k = 0; k < m; ++k)
        out.terms[k].longitudinal = cs.d1[k] * (cs.layer_bounds[k + 1] - cs.layer_bounds[k]) / width;
    for (std::size_t i = 0; i < segs.size(); ++i)
        out.terms[segs[i].layer].shear += integral(g[i] * g[i], segs[i].lo, segs[i].hi) / (width * cs.d2[segs[i].layer]);
    for (const auto& t : out.terms) out.d_bar += t.longitudinal + t.shear;
    return out;
}

}  // namespace

double mean_velocity(const LayeredCrossSection& cs) {
    cs.validate();
    return mean_velocity_of(cs, cs.velocity);
}

double g_function(const LayeredCrossSection& cs, double y) {
    cs.validate();
    if (!(y >= cs.a && y <= cs.b)) throw ConfigError("g_function needs a <= y <= b");
    const auto segs = segments(cs, cs.velocity);
    const auto g = g_pieces(segs, mean_velocity_of(cs, cs.velocity));
    std::size_t i = 0;
    while (i + 1 < segs.size() && y > segs[i].hi) ++i;
    return g[i](y) / (cs.b - cs.a);
}

Dispersion effective_dispersion(const LayeredCrossSection& cs) {
    cs.validate();
    Dispersion out = dispersion_of(cs, cs.velocity);
    if (const auto* coarse = cs.velocity.coarse())
        out.quadrature_error = std::abs(out.d_bar - dispersion_of(cs, *coarse).d_bar) / 15.0;
    return out;
}

double single_interface_dispersion(double d_plus, double d_minus, double v0, double r) {
    const double d_a = 0.5 * (d_plus + d_minus);
    const double d_h = 1.0 / (1.0 / d_plus + 1.0 / d_minus);
    return d_a + 4.0 * v0 * v0 * r * r / (945.0 * d_h);
}

Estimate mc_longtime_variance(const LayeredCrossSection& cs, const SimConfig& config) {
    cs.validate();
    config.validate();
    const double vbar = mean_velocity(cs);
    // Fickian transverse generator d2 d^2/dx^2 is the (1/2) D form with D = 2 d2.
    std::vector<double> interior(cs.layer_bounds.begin() + 1, cs.layer_bounds.end() - 1);
    std::vector<double> d_transverse;
    for (double d : cs.d2) d_transverse.push_back(2.0 * d);
    const MultiMedium transverse(interior, d_transverse);
    const MultiStepper stepper(transverse);
    double min_gap = cs.b - cs.a;
    for (std::size_t k = 1; k < cs.layer_bounds.size(); ++k)
        min_gap = std::min(min_gap, cs.layer_bounds[k] - cs.layer_bounds[k - 1]);
    const double cap = min_gap * min_gap / (144.0 * transverse.max_diffusivity());
    if (config.dt > cap)
        throw ConfigError("dt too large for the layer widths; need dt <= " + std::to_string(cap));

    const std::size_t n = config.n_paths;
    const std::size_t steps = config.n_steps();
    std::vector<double> y(n);
    parallel_for(n, [&](std::size_t i) {
        RandomStream rng(config.seed, i);
        double x2 = cs.a + (cs.b - cs.a) * rng.uniform();
        CompensatedSum x1;
        for (std::size_t k = 0; k < steps; ++k) {
            const double h = config.step_size(k);
            const std::size_t l = cs.layer(x2);
            x1.add(cs.velocity(x2) * h + std::sqrt(2.0 * cs.d1[l] * h) * rng.normal());
            x2 = stepper(x2, h, rng);
            while (x2 < cs.a || x2 > cs.b) x2 = x2 < cs.a ? 2.0 * cs.a - x2 : 2.0 * cs.b - x2;
        }
        y[i] = x1.value() - vbar * config.horizon;
    });
    RunningMoments mom;
    for (double v : y) mom.add(v);
    const double mean = mom.mean();
    const double var = mom.variance();
    double m4 = 0.0;
    for (double v : y) m4 += std::pow(v - mean, 4);
    m4 /= static_cast<double>(n);
    const double se_var = std::sqrt(std::max(m4 - var * var, 0.0) / static_cast<double>(n));
    const double scale = 1.0 / (2.0 * config.horizon);
    return {var * scale, kCiSigmas * se_var * scale};
}

LayeredCrossSection cross_section_from_config(const ConfigDoc& doc) {
    const std::string sec = "layers";
    LayeredCrossSection cs;
    cs.a = doc.require_double(sec, "a");
    cs.b = doc.require_double(sec, "b");
    if (doc.has(sec, "bounds"))
        cs.layer_bounds = doc.get_doubles(sec, "bounds");
    else
        cs.layer_bounds = {cs.a, cs.b};
    if (doc.has(sec, "d")) {
        if (doc.has(sec, "d1") || doc.has(sec, "d2")) throw ConfigError("give either layers.d or layers.d1/d2");
        cs.d1 = cs.d2 = doc.get_doubles(sec, "d");
    } else {
        cs.d1 = doc.get_doubles(sec, "d1");
        cs.d2 = doc.get_doubles(sec, "d2");
    }
    const int forms = doc.has(sec, "velocity") + doc.has(sec, "velocity_coeffs") + doc.has(sec, "velocity_v");
    if (forms > 1) throw ConfigError("give exactly one velocity description in [layers]");
    if (doc.has(sec, "velocity")) {
        std::istringstream in(*doc.get(sec, "velocity"));
        std::string kind, value, extra;
        in >> kind >> value;
        if (value.empty() || (in >> extra)) throw ConfigError("layers.velocity must be 'constant V' or 'parabolic V0'");
        const double v0 = parse_double(value, "layers.velocity");
        if (kind == "constant")
            cs.velocity = VelocityProfile::constant(cs.a, cs.b, v0);
        else if (kind == "parabolic")
            cs.velocity = VelocityProfile::parabolic(cs.a, cs.b, v0);
        else
            throw ConfigError("unknown velocity kind '" + kind + "'");
    } else if (doc.has(sec, "velocity_coeffs")) {
        std::vector<Polynomial> pieces;
        std::istringstream in(*doc.get(sec, "velocity_coeffs"));
        std::string chunk;
        while (std::getline(in, chunk, ';')) {
            std::vector<double> c;
            std::istringstream cin(chunk);
            std::string tok;
            while (cin >> tok) c.push_back(parse_double(tok, "layers.velocity_coeffs"));
            if (c.empty()) throw ConfigError("empty polynomial in layers.velocity_coeffs");
            pieces.emplace_back(std::move(c));
        }
        auto breaks = doc.has(sec, "velocity_breaks") ? doc.get_doubles(sec, "velocity_breaks")
                                                       : std::vector<double>{cs.a, cs.b};
        cs.velocity = VelocityProfile(std::move(breaks), std::move(pieces));
    } else if (doc.has(sec, "velocity_v")) {
        cs.velocity = VelocityProfile::sampled(doc.get_doubles(sec, "velocity_x"), doc.get_doubles(sec, "velocity_v"));
    } else {
        cs.velocity = VelocityProfile::constant(cs.a, cs.b, 0.0);
    }
    cs.validate();
    return cs;
}

}  // namespace skewdiff
