#pragma once

#include <stdexcept>
#include <string>

namespace skewdiff {

/// Invalid parameters or configuration; maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature stopped before reaching the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved, double requested)
        : std::runtime_error(what + " (achieved " + std::to_string(achieved) + ", requested " +
                             std::to_string(requested) + ")"),
          achieved_(achieved),
          requested_(requested) {}

    double achieved() const noexcept { return achieved_; }
    double requested() const noexcept { return requested_; }

private:
    double achieved_;
    double requested_;
};

/// A numerical routine produced a non-finite value or a singular system.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A Monte Carlo run ended before every path reached its stopping event.
class HorizonError : public std::runtime_error {
public:
    HorizonError(const std::string& what, double unfinished_fraction)
        : std::runtime_error(what + " (unfinished fraction " + std::to_string(unfinished_fraction) + ")"),
          fraction_(unfinished_fraction) {}

    double unfinished_fraction() const noexcept { return fraction_; }

private:
    double fraction_;
};

}  // namespace skewdiff
