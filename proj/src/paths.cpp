#include "skewdiff/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skewdiff/error.hpp"
#include "skewdiff/parallel.hpp"
#include "skewdiff/special.hpp"

namespace skewdiff {

void validate(const PathSample& path) {
    if (path.times.size() != path.positions.size()) throw ConfigError("path: times and positions differ in length");
    if (!path.edges.empty() && path.edges.size() != path.times.size())
        throw ConfigError("path: edge labels differ in length");
    if (path.times.empty() || path.times.front() != 0.0) throw ConfigError("path must start at t = 0");
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (!std::isfinite(path.times[i]) || !std::isfinite(path.positions[i]))
            throw ConfigError("path contains non-finite values");
        if (i > 0 && !(path.times[i] > path.times[i - 1])) throw ConfigError("path times must increase strictly");
    }
}

double interpolate(const PathSample& path, double t) {
    const auto& ts = path.times;
    if (t <= ts.front()) return path.positions.front();
    if (t >= ts.back()) return path.positions.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
    return path.positions[j - 1] + w * (path.positions[j] - path.positions[j - 1]);
}

void SimConfig::validate() const {
    if (n_paths == 0) throw ConfigError("n_paths must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (dt > horizon) throw ConfigError("dt must not exceed the horizon");
    if (!std::isfinite(x0)) throw ConfigError("start position must be finite");
}

std::size_t SimConfig::n_steps() const {
    const double ratio = horizon / dt;
    const double rounded = std::round(ratio);
    if (std::fabs(ratio - rounded) <= 1e-9 * ratio) return static_cast<std::size_t>(rounded);
    return static_cast<std::size_t>(std::ceil(ratio));
}

double SimConfig::time(std::size_t k) const {
    return k >= n_steps() ? horizon : static_cast<double>(k) * dt;
}

double SimConfig::step_size(std::size_t k) const { return time(k + 1) - time(k); }

std::vector<int> skew_walk(double alpha, std::size_t n_steps, RandomStream& rng) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    std::vector<int> walk(n_steps + 1, 0);
    std::uint64_t bits = 0;
    int left = 0;
    int s = 0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        if (s == 0) {
            s = rng.uniform() < alpha ? 1 : -1;
        } else {
            if (left == 0) {
                bits = rng.next_u64();
                left = 64;
            }
            s += (bits & 1u) ? 1 : -1;
            bits >>= 1;
            --left;
        }
        walk[k] = s;
    }
    return walk;
}

std::vector<int> skew_walk(double alpha, std::size_t n_steps, std::uint64_t seed) {
    RandomStream rng(seed, 0);
    return skew_walk(alpha, n_steps, rng);
}

PathSample polygonal_rescale(std::span<const int> walk, std::size_t n) {
    if (n == 0) throw ConfigError("polygonal_rescale: n must be >= 1");
    if (walk.size() < n + 1) throw ConfigError("polygonal_rescale: walk has fewer than n steps");
    PathSample path;
    path.times.resize(n + 1);
    path.positions.resize(n + 1);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k <= n; ++k) {
        path.times[k] = static_cast<double>(k) / static_cast<double>(n);
        path.positions[k] = walk[k] * scale;
    }
    return path;
}

namespace {

// Beyond this many standard deviations from the interface the chance of touching it
// within one step is below 1e-16 and the step is a plain Gaussian increment.
constexpr double kFarSigmas = 8.5;

// x >= 0, alpha >= 1/2: the density is a nonnegative mixture of three truncated Gaussians,
// phi(y-x) on (0,inf), (2alpha-1) phi(y+x) on (0,inf), 2(1-alpha) phi(y-x) on (-inf,0).
double mixture_step(double alpha, double x, double sd, RandomStream& rng) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double tail = 0.5 * std::erfc(x / (sd * std::sqrt(2.0)));  // Phi(-x/sd)
    const double direct = 1.0 - tail;
    const double reflect = (2.0 * alpha - 1.0) * tail;
    // inverse-CDF draws from each truncated Gaussian; the truncation masses are direct/tail
    if (u < direct) return x - sd * normal_quantile(v * direct);
    if (u < direct + reflect) return -x - sd * normal_quantile(v * tail);
    return x + sd * normal_quantile(v * tail);
}

// Remaining sign combinations: |B| is reflected Brownian motion, and given the reflected
// endpoint z the path touched 0 with probability 2e/(1+e), e = exp(-2 |x| z / dt)
// (killed vs. reflected endpoint densities); each touch re-draws the side with probability alpha.
double reflected_step(double alpha, double x, double dt, RandomStream& rng) {
    const double r = std::fabs(x);
    const double z = std::fabs(r + std::sqrt(dt) * rng.normal());
    const double e = std::exp(-2.0 * r * z / dt);
    const double touched = 2.0 * e / (1.0 + e);
    if (rng.uniform() < touched) return rng.uniform() < alpha ? z : -z;
    return x > 0.0 ? z : -z;
}

}  // namespace

double exact_step(double alpha, double x, double dt, RandomStream& rng) {
    const double sd = std::sqrt(dt);
    if (std::fabs(x) > kFarSigmas * sd) return x + sd * rng.normal();
    if (x >= 0.0 && alpha >= 0.5) return mixture_step(alpha, x, sd, rng);
    // p^alpha(t, x, y) = p^{1-alpha}(t, -x, -y)
    if (x <= 0.0 && alpha <= 0.5) return -mixture_step(1.0 - alpha, -x, sd, rng);
    return reflected_step(alpha, x, dt, rng);
}

SkewDiffusionStepper::SkewDiffusionStepper(const InterfaceMedium& m)
    : alpha_(alpha_of_lambda(m)), sd_plus_(std::sqrt(m.d_plus())), sd_minus_(std::sqrt(m.d_minus())) {}

double SkewDiffusionStepper::operator()(double x, double dt, RandomStream& rng) const {
    const double b = x > 0.0 ? x / sd_plus_ : x / sd_minus_;
    const double next = exact_step(alpha_, b, dt, rng);
    return next > 0.0 ? next * sd_plus_ : next * sd_minus_;
}

EulerTransformedStepper::EulerTransformedStepper(const InterfaceMedium& m) {
    const double gamma = gamma_of_lambda(m.lambda());
    slope_plus_ = 1.0 - gamma;
    sigma_plus_ = slope_plus_ * std::sqrt(m.d_plus());
    sigma_minus_ = std::sqrt(m.d_minus());
}

double EulerTransformedStepper::operator()(double x, double dt, RandomStream& rng) const {
    const double y = transform(x);
    const double sigma = y > 0.0 ? sigma_plus_ : sigma_minus_;
    const double next = y + sigma * std::sqrt(dt) * rng.normal();
    if (!std::isfinite(next)) throw NumericalError("euler_transformed produced a non-finite state");
    return inverse(next);
}

MultiStepper::MultiStepper(const MultiMedium& m) : medium_(&m) {}

double MultiStepper::operator()(double x, double dt, RandomStream& rng) const {
    const auto xs = medium_->interfaces();
    const auto ds = medium_->diffusivities();
    if (xs.empty()) return x + std::sqrt(ds[0] * dt) * rng.normal();

    // Nearest interface.
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    std::size_t k;
    if (it == xs.end())
        k = xs.size() - 1;
    else if (it == xs.begin())
        k = 0;
    else {
        const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
        k = (x - xs[hi - 1] < xs[hi] - x) ? hi - 1 : hi;
    }
    const double sd_right = std::sqrt(ds[k + 1]);
    const double sd_left = std::sqrt(ds[k]);
    const double rel = x - xs[k];
    const double b = rel > 0.0 ? rel / sd_right : rel / sd_left;
    const double next = exact_step(medium_->alpha(k), b, dt, rng);
    return xs[k] + (next > 0.0 ? next * sd_right : next * sd_left);
}

double max_multi_dt(const MultiMedium& m) noexcept {
    const double gap = m.min_gap();
    if (!std::isfinite(gap)) return std::numeric_limits<double>::infinity();
    return gap * gap / (144.0 * m.max_diffusivity());
}

void check_multi_step(const MultiMedium& m, double dt) {
    if (dt > max_multi_dt(m))
        throw ConfigError("dt = " + std::to_string(dt) + " too large for the interface spacing; need dt <= " +
                          std::to_string(max_multi_dt(m)));
}

namespace {

template <class Step>
std::vector<PathSample> record_paths(const Step& step, const SimConfig& config) {
    config.validate();
    std::vector<PathSample> out(config.n_paths);
    const std::size_t n = config.n_steps();
    parallel_for(config.n_paths, [&](std::size_t i) {
        PathSample& p = out[i];
        p.times.reserve(n + 1);
        p.positions.reserve(n + 1);
        p.times.push_back(0.0);
        p.positions.push_back(config.x0);
        run_path(step, config, i, [&p](double, double, double t1, double x1) {
            p.times.push_back(t1);
            p.positions.push_back(x1);
        });
    });
    return out;
}

template <class Step>
std::vector<double> record_terminal(const Step& step, const SimConfig& config) {
    config.validate();
    std::vector<double> out(config.n_paths);
    parallel_for(config.n_paths,
                 [&](std::size_t i) { out[i] = run_path(step, config, i, [](double, double, double, double) {}); });
    return out;
}

}  // namespace

std::vector<PathSample> simulate_skew_diffusion(const InterfaceMedium& m, const SimConfig& config) {
    switch (config.scheme) {
        case Scheme::exact_step:
            return record_paths(SkewDiffusionStepper(m), config);
        case Scheme::euler_transformed:
            return record_paths(EulerTransformedStepper(m), config);
        case Scheme::skew_walk:
            break;
    }
    throw ConfigError("skew_walk scheme produces lattice paths; use skew_walk/polygonal_rescale");
}

std::vector<PathSample> euler_transformed(const InterfaceMedium& m, const SimConfig& config) {
    return record_paths(EulerTransformedStepper(m), config);
}

std::vector<PathSample> simulate_multi(const MultiMedium& m, const SimConfig& config) {
    check_multi_step(m, config.dt);
    return record_paths(MultiStepper(m), config);
}

std::vector<double> terminal_positions(const InterfaceMedium& m, const SimConfig& config) {
    switch (config.scheme) {
        case Scheme::exact_step:
            return record_terminal(SkewDiffusionStepper(m), config);
        case Scheme::euler_transformed:
            return record_terminal(EulerTransformedStepper(m), config);
        case Scheme::skew_walk:
            break;
    }
    throw ConfigError("skew_walk scheme produces lattice paths; use skew_walk/polygonal_rescale");
}

std::vector<double> terminal_positions(const MultiMedium& m, const SimConfig& config) {
    check_multi_step(m, config.dt);
    return record_terminal(MultiStepper(m), config);
}

}  // namespace skewdiff
