#include "skewdiff/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>

namespace skewdiff {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

void RunningMoments::add(double x) noexcept {
    ++n_;
    sum_.add(x);
    sum_sq_.add(x * x);
}

double RunningMoments::mean() const noexcept { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }

double RunningMoments::variance() const noexcept {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double m = mean();
    return std::max(0.0, (sum_sq_.value() - n * m * m) / (n - 1.0));
}

Estimate RunningMoments::mean_estimate(double sigmas) const noexcept {
    return {mean(), sigmas * std::sqrt(variance() / static_cast<double>(std::max<std::size_t>(n_, 1)))};
}

Estimate proportion(std::size_t hits, std::size_t trials, double sigmas) {
    if (trials == 0) return {};
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    return {p, sigmas * std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

Estimate ratio_of_means(std::span<const double> a, std::span<const double> b, double sigmas) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("ratio_of_means: size mismatch");
    const double n = static_cast<double>(a.size());
    CompensatedSum sa, sb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa.add(a[i]);
        sb.add(b[i]);
    }
    const double ma = sa.value() / n, mb = sb.value() / n;
    if (mb == 0.0) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    const double r = ma / mb;
    // Linearized residuals a_i - r b_i.
    CompensatedSum ss;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - r * b[i];
        ss.add(e * e);
    }
    const double var = ss.value() / (n - 1.0) / (n * mb * mb);
    return {r, sigmas * std::sqrt(var)};
}

Estimate paired_difference(std::span<const double> a, std::span<const double> b, double sigmas) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_difference: size mismatch");
    RunningMoments m;
    for (std::size_t i = 0; i < a.size(); ++i) m.add(a[i] - b[i]);
    return m.mean_estimate(sigmas);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_lattice_statistic(std::vector<double> samples, double spacing, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    const double tie = 0.25 * spacing;
    double d = 0.0;
    std::size_t i = 0;
    while (i < samples.size()) {
        const double v = samples[i];
        const double below = static_cast<double>(i) / n;
        while (i < samples.size() && samples[i] < v + tie) ++i;
        const double at = static_cast<double>(i) / n;
        d = std::max({d, std::fabs(below - cdf(v - 0.5 * spacing)), std::fabs(at - cdf(v + 0.5 * spacing))});
    }
    return d;
}

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double kolmogorov_quantile(double level) {
    // Bisection on the survival function.
    double lo = 0.2, hi = 5.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_sf(mid) > level)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double ks_critical(std::size_t n, double level) {
    return kolmogorov_quantile(level) / std::sqrt(static_cast<double>(n));
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double level) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return kolmogorov_quantile(level) * std::sqrt((nn + mm) / (nn * mm));
}

namespace {

double chi2_sf(double stat, int dof) {
    if (dof <= 0) return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected_prob,
                                double min_expected) {
    if (observed.size() != expected_prob.size()) throw std::invalid_argument("chi_square_test: size mismatch");
    double total = 0.0;
    for (double o : observed) total += o;

    // Pool adjacent bins left to right until each pooled bin is large enough.
    std::vector<double> obs, exp;
    double acc_o = 0.0, acc_e = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        acc_o += observed[i];
        acc_e += expected_prob[i] * total;
        if (acc_e >= min_expected) {
            obs.push_back(acc_o);
            exp.push_back(acc_e);
            acc_o = acc_e = 0.0;
        }
    }
    if (!exp.empty()) {
        obs.back() += acc_o;
        exp.back() += acc_e;
    }

    ChiSquareResult r;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double d = obs[i] - exp[i];
        r.statistic += d * d / exp[i];
    }
    r.dof = static_cast<int>(obs.size()) - 1;
    r.p_value = chi2_sf(r.statistic, r.dof);
    return r;
}

ChiSquareResult chi_square_two_sample(std::span<const double> counts_a, std::span<const double> counts_b,
                                      double min_expected) {
    if (counts_a.size() != counts_b.size()) throw std::invalid_argument("chi_square_two_sample: size mismatch");
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < counts_a.size(); ++i) {
        na += counts_a[i];
        nb += counts_b[i];
    }
    std::vector<double> pa, pb;
    double acc_a = 0.0, acc_b = 0.0;
    for (std::size_t i = 0; i < counts_a.size(); ++i) {
        acc_a += counts_a[i];
        acc_b += counts_b[i];
        const double pooled = (acc_a + acc_b) / (na + nb);
        if (pooled * std::min(na, nb) >= min_expected) {
            pa.push_back(acc_a);
            pb.push_back(acc_b);
            acc_a = acc_b = 0.0;
        }
    }
    if (!pa.empty()) {
        pa.back() += acc_a;
        pb.back() += acc_b;
    }
    ChiSquareResult r;
    const double k1 = std::sqrt(nb / na), k2 = std::sqrt(na / nb);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = k1 * pa[i] - k2 * pb[i];
        r.statistic += d * d / (pa[i] + pb[i]);
    }
    r.dof = static_cast<int>(pa.size()) - 1;
    r.p_value = chi2_sf(r.statistic, r.dof);
    return r;
}

}  // namespace skewdiff
