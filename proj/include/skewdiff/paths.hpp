#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skewdiff/media.hpp"
#include "skewdiff/rng.hpp"

namespace skewdiff {

/// A discretized trajectory. `edges` is empty except for network paths.
struct PathSample {
    std::vector<double> times;
    std::vector<double> positions;
    std::vector<int> edges;

    std::size_t size() const noexcept { return times.size(); }
};

/// Throws ConfigError unless times start at 0, increase strictly, match positions
/// in length and all values are finite.
void validate(const PathSample& path);

/// Linear interpolation of the path at time t in [0, times.back()].
double interpolate(const PathSample& path, double t);

enum class Scheme { exact_step, euler_transformed, skew_walk };

struct SimConfig {
    std::size_t n_paths = 1;
    double dt = 1e-3;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::exact_step;
    double x0 = 0.0;

    /// Throws ConfigError on n_paths == 0, dt <= 0, horizon <= 0 or dt > horizon.
    void validate() const;
    /// Number of steps; the last one is shortened so the grid ends exactly at horizon.
    std::size_t n_steps() const;
    double step_size(std::size_t k) const;
    double time(std::size_t k) const;
};

/// alpha-skew random walk on Z started at 0: from 0 it moves up with probability
/// alpha, elsewhere up or down with probability 1/2. Returns n_steps + 1 states.
std::vector<int> skew_walk(double alpha, std::size_t n_steps, RandomStream& rng);
std::vector<int> skew_walk(double alpha, std::size_t n_steps, std::uint64_t seed);

/// Polygonal rescaling on [0, 1]: value walk[k]/sqrt(n) at t = k/n, linear in between.
/// Throws ConfigError if the walk has fewer than n steps.
PathSample polygonal_rescale(std::span<const int> walk, std::size_t n);

/// One draw from the alpha-skew Brownian transition density p^alpha(dt, x, .).
double exact_step(double alpha, double x, double dt, RandomStream& rng);

/// One step of the lambda-skew diffusion s_sqrtD(B^alpha), exact in law.
class SkewDiffusionStepper {
public:
    explicit SkewDiffusionStepper(const InterfaceMedium& medium);
    double operator()(double x, double dt, RandomStream& rng) const;

private:
    double alpha_;
    double sd_plus_;
    double sd_minus_;
};

/// Euler step after the piecewise-linear transform that removes the local-time term:
/// Y = F(X) with F(x) = x for x <= 0 and (1 - gamma) x for x > 0, gamma = 2 - 1/lambda,
/// so dY = sigma(Y) dB without local time.
class EulerTransformedStepper {
public:
    explicit EulerTransformedStepper(const InterfaceMedium& medium);
    double operator()(double x, double dt, RandomStream& rng) const;

    double transform(double x) const noexcept { return x > 0.0 ? slope_plus_ * x : x; }
    double inverse(double y) const noexcept { return y > 0.0 ? y / slope_plus_ : y; }

private:
    double slope_plus_;  // 1 - gamma
    double sigma_plus_;  // (1 - gamma) sqrt(D+)
    double sigma_minus_;
};

/// Exact step in the frame of the nearest interface, using that interface's alpha_k.
/// Valid while no step can reach a second interface; see check_multi_step.
class MultiStepper {
public:
    explicit MultiStepper(const MultiMedium& medium);
    double operator()(double x, double dt, RandomStream& rng) const;

private:
    const MultiMedium* medium_;
};

/// Step-size cap for multi-interface stepping: 12 sqrt(max D dt) <= min gap, so the
/// nearest-interface frame is exact up to an event of mass about exp(-18) per step.
double max_multi_dt(const MultiMedium& medium) noexcept;
void check_multi_step(const MultiMedium& medium, double dt);

/// Full trajectories of the lambda-skew diffusion on the config's time grid. Honors
/// config.scheme (skew_walk is rejected here; use skew_walk/polygonal_rescale).
std::vector<PathSample> simulate_skew_diffusion(const InterfaceMedium& medium, const SimConfig& config);
std::vector<PathSample> euler_transformed(const InterfaceMedium& medium, const SimConfig& config);
std::vector<PathSample> simulate_multi(const MultiMedium& medium, const SimConfig& config);

/// Only the terminal positions X(horizon), one per path.
std::vector<double> terminal_positions(const InterfaceMedium& medium, const SimConfig& config);
std::vector<double> terminal_positions(const MultiMedium& medium, const SimConfig& config);

/// Drives path `path_index` of `config` with `step`, calling
/// observe(t_prev, x_prev, t_next, x_next) after every step. Returns the final position.
/// The stream is keyed by (config.seed, path_index).
template <class Step, class Observer>
double run_path(const Step& step, const SimConfig& config, std::size_t path_index, Observer&& observe) {
    RandomStream rng(config.seed, path_index);
    const std::size_t n = config.n_steps();
    double x = config.x0;
    double t = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double h = config.step_size(k);
        const double next = step(x, h, rng);
        const double t_next = config.time(k + 1);
        observe(t, x, t_next, next);
        x = next;
        t = t_next;
    }
    return x;
}

}  // namespace skewdiff
