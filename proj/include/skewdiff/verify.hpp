#pragma once

#include <cstdint>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

namespace skewdiff {

struct VerifyOptions {
    std::uint64_t seed = 20240611;
    /// Multiplies every Monte Carlo sample count (floored at a small minimum); 1 is full scale.
    double scale = 1.0;
    /// Adds the long-time Monte Carlo dispersion check to criterion 12.
    bool slow = false;
    /// Criterion 14 re-runs the others at this scale (1 for a full-scale re-run).
    double repro_scale = 0.02;
    /// Worker count for criterion 14's second run.
    int repro_threads = 2;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    /// Deterministic for a given (options, seed): no timings in here.
    nlohmann::ordered_json details;
    double seconds = 0.0;
};

inline constexpr int kCriterionCount = 14;

std::string criterion_title(int id);

/// Runs one acceptance criterion (1..14). Throws ConfigError on an unknown id.
CriterionResult run_criterion(int id, const VerifyOptions& options);

/// Runs the given criteria in order, reporting each result as it completes.
std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, const VerifyOptions& options,
                                          const std::function<void(const CriterionResult&)>& on_result = {});

/// {"criteria": [{id, title, pass, details}], "all_pass"}; timings are left out.
nlohmann::ordered_json results_json(const std::vector<CriterionResult>& results);

}  // namespace skewdiff
