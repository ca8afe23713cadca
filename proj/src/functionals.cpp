#include "skewdiff/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "skewdiff/densities.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/parallel.hpp"
#include "skewdiff/quadrature.hpp"

namespace skewdiff {

namespace {

// Piecewise-constant scale and speed densities; piece k covers (breaks[k-1], breaks[k]].
struct Profile {
    std::vector<double> breaks;
    std::vector<double> s;
    std::vector<double> m;

    std::size_t piece(double y) const {
        return static_cast<std::size_t>(std::lower_bound(breaks.begin(), breaks.end(), y) - breaks.begin());
    }
};

ExitStats exit_from_profile(const Profile& pr, double a, double x, double b) {
    if (!(a < x && x < b)) throw ConfigError("exit statistics need a < x < b");
    std::vector<double> cuts{a, x, b};
    for (double c : pr.breaks)
        if (c > a && c < b) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // S relative to a at every cut
    std::vector<double> big_s(cuts.size(), 0.0);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const std::size_t k = pr.piece(0.5 * (cuts[i] + cuts[i + 1]));
        big_s[i + 1] = big_s[i] + pr.s[k] * (cuts[i + 1] - cuts[i]);
    }
    const double s_ab = big_s.back();
    const double s_x = big_s[static_cast<std::size_t>(std::find(cuts.begin(), cuts.end(), x) - cuts.begin())];

    // G(x, y) = (S(x ^ y) - S(a)) (S(b) - S(x v y)) / S(a, b); S is linear on each panel.
    double time = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double p = cuts[i], q = cuts[i + 1], h = q - p;
        const std::size_t k = pr.piece(0.5 * (p + q));
        const double s = pr.s[k], m = pr.m[k];
        if (q <= x)
            time += (s_ab - s_x) / s_ab * m * (big_s[i] * h + 0.5 * s * h * h);
        else
            time += s_x / s_ab * m * ((s_ab - big_s[i]) * h - 0.5 * s * h * h);
    }
    ExitStats out;
    out.p_exit_right = s_x / s_ab;
    out.p_exit_left = (s_ab - s_x) / s_ab;
    out.mean_exit_time = time;
    return out;
}

Profile profile_of(const InterfaceMedium& m) {
    const ScaleSpeed ss = speed_scale(m);
    return {{0.0}, {ss.s_minus, ss.s_plus}, {ss.m_minus, ss.m_plus}};
}

Profile profile_of(const MultiMedium& m) {
    Profile pr;
    pr.breaks.assign(m.interfaces().begin(), m.interfaces().end());
    for (double d : m.diffusivities()) {
        pr.s.push_back(1.0 / d);
        pr.m.push_back(2.0);
    }
    return pr;
}

// Piece bookkeeping shared by the Monte Carlo estimators.
struct InterfaceGeometry {
    const InterfaceMedium& medium;

    std::size_t piece(double x) const noexcept { return x > 0.0 ? 1 : 0; }
    double diffusivity(std::size_t k) const noexcept { return k == 1 ? medium.d_plus() : medium.d_minus(); }
    bool touches(std::size_t k, double level) const noexcept { return k == 1 ? level >= 0.0 : level <= 0.0; }
    double distance_to_interface(double x) const noexcept { return std::fabs(x); }
    double max_diffusivity() const noexcept { return std::max(medium.d_plus(), medium.d_minus()); }
};

struct MultiGeometry {
    const MultiMedium& medium;

    std::size_t piece(double x) const noexcept { return medium.piece(x); }
    double diffusivity(std::size_t k) const noexcept { return medium.diffusivities()[k]; }
    bool touches(std::size_t k, double level) const noexcept {
        const auto xs = medium.interfaces();
        const double lo = k == 0 ? -kInf : xs[k - 1];
        const double hi = k == xs.size() ? kInf : xs[k];
        return level >= lo && level <= hi;
    }
    double distance_to_interface(double x) const noexcept {
        double d = kInf;
        for (double c : medium.interfaces()) d = std::min(d, std::fabs(x - c));
        return d;
    }
    double max_diffusivity() const noexcept { return medium.max_diffusivity(); }
};

// Probability that the path between x0 and x1 (a step of length dt) hit `level`:
// 1 when the endpoints straddle it, the Brownian-bridge value when both ends lie in
// the level's piece, 0 otherwise (the crossing would need to pass an interface first).
template <class Geometry>
double crossing_probability(const Geometry& g, double x0, double x1, double level, double dt) {
    const double u = x0 - level, v = x1 - level;
    if (u == 0.0 || v == 0.0 || (u < 0.0) != (v < 0.0)) return 1.0;
    const std::size_t k = g.piece(x0);
    if (k != g.piece(x1) || !g.touches(k, level)) return 0.0;
    return std::exp(-2.0 * u * v / (g.diffusivity(k) * dt));
}

struct ExitDraw {
    int side = 0;  // -1 left, +1 right, 0 not exited
    double time = 0.0;
};

template <class Geometry, class Step>
ExitStats exit_mc(const Geometry& g, const Step& step, double a, double x, double b, const SimConfig& config) {
    if (!(a < x && x < b)) throw ConfigError("exit statistics need a < x < b");
    config.validate();
    std::vector<ExitDraw> draws(config.n_paths);
    parallel_for(config.n_paths, [&](std::size_t i) {
        RandomStream rng(config.seed, i);
        double pos = x, t = 0.0;
        const std::size_t n = config.n_steps();
        for (std::size_t k = 0; k < n; ++k) {
            const double h = config.step_size(k);
            const double next = step(pos, h, rng);
            const double pl = crossing_probability(g, pos, next, a, h);
            const double pr = crossing_probability(g, pos, next, b, h);
            if (pl > 0.0 || pr > 0.0) {
                const double u = (pl == 1.0 || pr == 1.0) ? 0.0 : rng.uniform();
                if (pl == 1.0 || u < pl) {
                    draws[i] = {-1, t + 0.5 * h};
                    return;
                }
                if (pr == 1.0 || u < pl + pr) {
                    draws[i] = {1, t + 0.5 * h};
                    return;
                }
            }
            pos = next;
            t = config.time(k + 1);
        }
    });
    std::size_t left = 0, unfinished = 0;
    RunningMoments times;
    for (const auto& d : draws) {
        if (d.side == 0) {
            ++unfinished;
            continue;
        }
        left += d.side < 0;
        times.add(d.time);
    }
    if (unfinished > 0)
        throw HorizonError("paths did not leave the interval before the horizon",
                           static_cast<double>(unfinished) / static_cast<double>(config.n_paths));
    const Estimate pl = proportion(left, config.n_paths);
    const Estimate tm = times.mean_estimate();
    ExitStats out;
    out.p_exit_left = pl.value;
    out.p_exit_right = 1.0 - pl.value;
    out.ci_p = pl.halfwidth;
    out.mean_exit_time = tm.value;
    out.ci_time = tm.halfwidth;
    return out;
}

constexpr int kInterfaceSubsteps = 8;

}  // namespace

ExitStats exit_stats_analytic(const InterfaceMedium& m, double a, double x, double b) {
    return exit_from_profile(profile_of(m), a, x, b);
}

ExitStats exit_stats_analytic(const MultiMedium& m, double a, double x, double b) {
    return exit_from_profile(profile_of(m), a, x, b);
}

ExitStats exit_stats_mc(const InterfaceMedium& m, double a, double x, double b, const SimConfig& config) {
    return exit_mc(InterfaceGeometry{m}, SkewDiffusionStepper(m), a, x, b, config);
}

ExitStats exit_stats_mc(const MultiMedium& m, double a, double x, double b, const SimConfig& config) {
    check_multi_step(m, config.dt);
    return exit_mc(MultiGeometry{m}, MultiStepper(m), a, x, b, config);
}

SurvivalCurve first_passage_survival(const InterfaceMedium& m, double x0, double level,
                                     std::span<const double> t_grid, const SimConfig& config) {
    if (level == x0) throw ConfigError("first passage level must differ from the start");
    if (t_grid.empty()) throw ConfigError("empty time grid");
    for (std::size_t j = 0; j < t_grid.size(); ++j)
        if (!(t_grid[j] > 0.0) || (j > 0 && !(t_grid[j] > t_grid[j - 1])))
            throw ConfigError("time grid must be positive and increasing");
    if (!(config.dt > 0.0) || config.n_paths == 0) throw ConfigError("invalid simulation config");

    const InterfaceGeometry g{m};
    const SkewDiffusionStepper step(m);
    const std::size_t nt = t_grid.size();
    std::vector<double> weights(config.n_paths * nt, 0.0);

    parallel_for(config.n_paths, [&](std::size_t i) {
        RandomStream rng(config.seed, i);
        double x = x0, t = 0.0, w = 1.0;
        for (std::size_t j = 0; j < nt && w > 0.0; ++j) {
            const double target = t_grid[j];
            while (w > 0.0 && t < target) {
                double h = std::min(config.dt, target - t);
                if (target - (t + h) < 1e-12 * target) h = target - t;
                const bool near = g.distance_to_interface(x) < 4.0 * std::sqrt(g.max_diffusivity() * h);
                const int sub = near ? kInterfaceSubsteps : 1;
                const double hh = h / sub;
                for (int s = 0; s < sub && w > 0.0; ++s) {
                    const double next = step(x, hh, rng);
                    w *= 1.0 - crossing_probability(g, x, next, level, hh);
                    x = next;
                }
                t = (h == target - t) ? target : t + h;
            }
            weights[i * nt + j] = w;
        }
    });

    SurvivalCurve out;
    out.t_grid.assign(t_grid.begin(), t_grid.end());
    for (std::size_t j = 0; j < nt; ++j) {
        RunningMoments mom;
        for (std::size_t i = 0; i < config.n_paths; ++i) mom.add(weights[i * nt + j]);
        const Estimate e = mom.mean_estimate();
        out.survival.push_back(e.value);
        out.halfwidth.push_back(e.halfwidth);
    }
    // Pool-adjacent-violators for a non-increasing curve.
    for (std::size_t j = 1; j < nt; ++j)
        if (out.survival[j] > out.survival[j - 1] + out.halfwidth[j] + out.halfwidth[j - 1])
            out.monotonicity_violation = true;
    std::vector<double> level_value, level_count;
    for (double v : out.survival) {
        level_value.push_back(v);
        level_count.push_back(1.0);
        while (level_value.size() > 1 && level_value[level_value.size() - 2] < level_value.back()) {
            const double c = level_count.back() + level_count[level_count.size() - 2];
            const double v2 = (level_value.back() * level_count.back() +
                               level_value[level_value.size() - 2] * level_count[level_count.size() - 2]) /
                              c;
            level_value.pop_back();
            level_count.pop_back();
            level_value.back() = v2;
            level_count.back() = c;
        }
    }
    std::size_t j = 0;
    for (std::size_t b = 0; b < level_value.size(); ++b)
        for (int c = 0; c < static_cast<int>(level_count[b]); ++c) out.survival[j++] = level_value[b];
    return out;
}

std::vector<PassageOrderingRow> passage_ordering(const InterfaceMedium& m, double y, double factor,
                                                 std::span<const double> t_grid, const SimConfig& config) {
    if (!(y > 0.0)) throw ConfigError("passage ordering needs y > 0");
    SimConfig other = config;
    other.seed = config.seed + 1;
    const SurvivalCurve from_minus = first_passage_survival(m, -y, y, t_grid, config);
    const SurvivalCurve from_plus = first_passage_survival(m, y, -y, t_grid, other);
    std::vector<PassageOrderingRow> rows;
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        PassageOrderingRow r;
        r.t = t_grid[j];
        r.from_minus = {from_minus.survival[j], from_minus.halfwidth[j]};
        r.from_plus = {from_plus.survival[j], from_plus.halfwidth[j]};
        r.factor = factor;
        r.bound_separated = r.from_minus.hi() < factor * r.from_plus.lo();
        r.strict_separated = r.from_minus.hi() < r.from_plus.lo();
        rows.push_back(r);
    }
    return rows;
}

IntervalSet::IntervalSet(double lo, double hi) { add(lo, hi); }

IntervalSet IntervalSet::real_line() { return IntervalSet(-kInf, kInf); }

IntervalSet& IntervalSet::add(double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("interval needs lo < hi");
    pieces_.emplace_back(lo, hi);
    return *this;
}

bool IntervalSet::contains(double x) const noexcept {
    for (const auto& [lo, hi] : pieces_)
        if (x > lo && x <= hi) return true;
    return false;
}

double natural_occupation_time(const PathSample& path, const IntervalSet& set) {
    CompensatedSum s;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        if (set.contains(path.positions[i])) s.add(path.times[i + 1] - path.times[i]);
    return s.value();
}

std::vector<std::vector<double>> occupation_times(const InterfaceMedium& m, const SimConfig& config,
                                                  std::span<const IntervalSet> sets, OccupationWeight weight) {
    config.validate();
    const SkewDiffusionStepper step(m);
    std::vector<std::vector<double>> out(sets.size(), std::vector<double>(config.n_paths, 0.0));
    parallel_for(config.n_paths, [&](std::size_t i) {
        std::vector<CompensatedSum> acc(sets.size());
        run_path(step, config, i, [&](double t0, double x0, double t1, double) {
            const double w = weight == OccupationWeight::time ? 1.0 : m.diffusivity(x0);
            for (std::size_t k = 0; k < sets.size(); ++k)
                if (sets[k].contains(x0)) acc[k].add(w * (t1 - t0));
        });
        for (std::size_t k = 0; k < sets.size(); ++k) out[k][i] = acc[k].value();
    });
    return out;
}

std::vector<OccupationBalanceRow> occupation_balance_report(std::span<const InterfaceMedium> media,
                                                            const SimConfig& config) {
    const std::vector<IntervalSet> sides{IntervalSet(0.0, kInf), IntervalSet(-kInf, 0.0)};
    std::vector<OccupationBalanceRow> rows;
    for (const auto& m : media) {
        const auto occ = occupation_times(m, config, sides);
        OccupationBalanceRow r;
        r.lambda = m.lambda();
        r.alpha = alpha_of_lambda(m);
        RunningMoments plus;
        for (double v : occ[0]) plus.add(v);
        r.plus = plus.mean_estimate();
        r.difference = paired_difference(occ[0], occ[1]);
        const double threshold = conservative_alpha(m.d_plus(), m.d_minus());
        const double gap = m.lambda() - threshold;
        r.expected_sign = std::fabs(gap) <= 1e-12 ? 0 : (gap > 0.0 ? 1 : -1);
        if (r.expected_sign == 0)
            r.sign_consistent = r.difference.contains(0.0);
        else
            r.sign_consistent = r.expected_sign > 0 ? r.difference.lo() > 0.0 : r.difference.hi() < 0.0;
        r.plus_matches_alpha_t = r.plus.contains(r.alpha * config.horizon);
        rows.push_back(r);
    }
    return rows;
}

namespace {

LocalTimeEstimate local_time_from(std::span<const double> plus, std::span<const double> minus, double epsilon) {
    LocalTimeEstimate e;
    e.epsilon = epsilon;
    e.n_paths = plus.size();
    RunningMoments p, q;
    for (double v : plus) p.add(v / epsilon);
    for (double v : minus) q.add(v / epsilon);
    e.l_plus = p.mean_estimate();
    e.l_minus = q.mean_estimate();
    e.ratio = ratio_of_means(plus, minus);
    return e;
}

}  // namespace

LocalTimeEstimate natural_local_time(std::span<const PathSample> paths, double a, double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    const IntervalSet up(a, a + epsilon), down(a - epsilon, a);
    std::vector<double> plus, minus;
    for (const auto& p : paths) {
        plus.push_back(natural_occupation_time(p, up));
        minus.push_back(natural_occupation_time(p, down));
    }
    return local_time_from(plus, minus, epsilon);
}

LocalTimeEstimate expected_local_time(const InterfaceMedium& m, double x0, double t, double epsilon) {
    if (!(epsilon > 0.0) || !(t > 0.0)) throw ConfigError("epsilon and t must be positive");
    const auto mass = [&](double lo, double hi) {
        return integrate([&](double s) { return skew_diffusion_cdf(m, s, x0, hi) - skew_diffusion_cdf(m, s, x0, lo); },
                         0.0, t, 1e-11)
            .value;
    };
    LocalTimeEstimate e;
    e.epsilon = epsilon;
    e.l_plus = {mass(0.0, epsilon) / epsilon, 0.0};
    e.l_minus = {mass(-epsilon, 0.0) / epsilon, 0.0};
    e.ratio = {e.l_plus.value / e.l_minus.value, 0.0};
    return e;
}

Estimate semimartingale_local_time_jump(std::span<const PathSample> paths, const InterfaceMedium& m,
                                        double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    const IntervalSet up(0.0, epsilon), down(-epsilon, 0.0);
    std::vector<double> plus, minus;
    for (const auto& p : paths) {
        CompensatedSum a, b;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            const double x = p.positions[i], w = m.diffusivity(x) * (p.times[i + 1] - p.times[i]);
            if (up.contains(x)) a.add(w);
            if (down.contains(x)) b.add(w);
        }
        plus.push_back(a.value());
        minus.push_back(b.value());
    }
    return ratio_of_means(plus, minus);
}

LocalTimeStudy local_time_study(const InterfaceMedium& m, std::span<const double> epsilons, const SimConfig& config) {
    std::vector<IntervalSet> sets;
    for (double e : epsilons) {
        if (!(e > 0.0)) throw ConfigError("epsilon must be positive");
        sets.emplace_back(0.0, e);
        sets.emplace_back(-e, 0.0);
    }
    config.validate();
    const SkewDiffusionStepper step(m);
    const std::size_t ns = sets.size();
    // per path: time occupation then quadratic-variation-weighted occupation of each set
    std::vector<double> acc(config.n_paths * 2 * ns, 0.0);
    parallel_for(config.n_paths, [&](std::size_t i) {
        std::vector<CompensatedSum> time(ns), qv(ns);
        run_path(step, config, i, [&](double t0, double x0, double t1, double) {
            const double h = t1 - t0, d = m.diffusivity(x0);
            for (std::size_t k = 0; k < ns; ++k)
                if (sets[k].contains(x0)) {
                    time[k].add(h);
                    qv[k].add(d * h);
                }
        });
        for (std::size_t k = 0; k < ns; ++k) {
            acc[(i * 2) * ns + k] = time[k].value();
            acc[(i * 2 + 1) * ns + k] = qv[k].value();
        }
    });
    LocalTimeStudy out;
    std::vector<double> plus(config.n_paths), minus(config.n_paths);
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        for (int weighted = 0; weighted < 2; ++weighted) {
            for (std::size_t i = 0; i < config.n_paths; ++i) {
                plus[i] = acc[(i * 2 + weighted) * ns + 2 * e];
                minus[i] = acc[(i * 2 + weighted) * ns + 2 * e + 1];
            }
            if (weighted == 0)
                out.natural.push_back(local_time_from(plus, minus, epsilons[e]));
            else
                out.semimartingale_ratio.push_back(ratio_of_means(plus, minus));
        }
    }
    return out;
}

OccupationDensityReport occupation_density_consistency(std::span<const PathSample> paths, double lo, double hi,
                                                       double bin_width) {
    if (!(lo < hi) || !(bin_width > 0.0)) throw ConfigError("invalid occupation window");
    const auto bins = static_cast<std::size_t>(std::llround((hi - lo) / bin_width));
    if (bins == 0 || std::fabs(bins * bin_width - (hi - lo)) > 1e-9 * (hi - lo))
        throw ConfigError("window length must be a multiple of the bin width");
    const IntervalSet window(lo, hi);
    RunningMoments direct, summed;
    for (const auto& p : paths) {
        direct.add(natural_occupation_time(p, window));
        double s = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double c = lo + (static_cast<double>(k) + 0.5) * bin_width;
            const double local = natural_occupation_time(p, IntervalSet(c - 0.25 * bin_width, c + 0.25 * bin_width)) /
                                 (0.5 * bin_width);
            s += local * bin_width;
        }
        summed.add(s);
    }
    OccupationDensityReport r;
    r.direct = direct.mean_estimate();
    r.from_local_time = summed.mean();
    r.discrepancy = r.from_local_time - r.direct.value;
    return r;
}

}  // namespace skewdiff
