#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace skewdiff {

/// Confidence intervals throughout the library are 3-sigma normal approximations.
inline constexpr double kCiSigmas = 3.0;

/// Point estimate with a symmetric confidence half-width.
struct Estimate {
    double value = 0.0;
    double halfwidth = 0.0;

    double lo() const noexcept { return value - halfwidth; }
    double hi() const noexcept { return value + halfwidth; }
    bool contains(double x) const noexcept { return x >= lo() && x <= hi(); }
};

/// Neumaier-compensated sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sample mean and variance with compensated accumulation.
class RunningMoments {
public:
    void add(double x) noexcept;
    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept;
    double variance() const noexcept;  ///< unbiased
    Estimate mean_estimate(double sigmas = kCiSigmas) const noexcept;

private:
    std::size_t n_ = 0;
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
};

/// Proportion with binomial standard error.
Estimate proportion(std::size_t hits, std::size_t trials, double sigmas = kCiSigmas);

/// Ratio of means sum(a)/sum(b) over paired samples, delta-method interval.
Estimate ratio_of_means(std::span<const double> a, std::span<const double> b, double sigmas = kCiSigmas);

/// Mean of a - b over paired samples.
Estimate paired_difference(std::span<const double> a, std::span<const double> b, double sigmas = kCiSigmas);

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against a continuous CDF.
/// Sorts a copy of the samples.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b);

/// KS distance for lattice-valued samples (spacing h) against a continuous limit CDF.
/// The empirical CDF at each lattice value v is compared with cdf(v + h/2), i.e. the
/// limit law binned onto the lattice cells; without this the discreteness alone
/// produces a distance of order the largest atom.
double ks_lattice_statistic(std::vector<double> samples, double spacing, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov critical value at significance `level` for sample size n.
double ks_critical(std::size_t n, double level = 0.01);
double ks_two_sample_critical(std::size_t n, std::size_t m, double level = 0.01);
/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 0.0;
};

/// Pearson test of observed counts against expected bin probabilities. Bins whose
/// expected count falls below `min_expected` are pooled with their neighbours.
ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected_prob,
                                double min_expected = 5.0);

/// Two-sample homogeneity test on two binned count vectors.
ChiSquareResult chi_square_two_sample(std::span<const double> counts_a, std::span<const double> counts_b,
                                      double min_expected = 5.0);

}  // namespace skewdiff
