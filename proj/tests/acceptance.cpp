#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <thread>

#include "skewdiff/error.hpp"
#include "skewdiff/parallel.hpp"
#include "skewdiff/verify.hpp"

// One PASS/FAIL line per acceptance criterion. Criteria listed in --expect-fail are known to
// fail on the stated bounds; their FAIL lines are printed but do not fail the process.
int main(int argc, char** argv) {
    CLI::App app{"skewdiff acceptance suite"};
    skewdiff::VerifyOptions opts;
    std::vector<int> only;
    std::vector<int> expect_fail;
    int threads = 0;
    app.add_option("--seed", opts.seed);
    app.add_option("--scale", opts.scale)->check(CLI::PositiveNumber);
    app.add_option("--repro-scale", opts.repro_scale)->check(CLI::PositiveNumber);
    app.add_flag("--slow", opts.slow);
    app.add_option("--only", only)->delimiter(',')->check(CLI::Range(1, skewdiff::kCriterionCount));
    app.add_option("--expect-fail", expect_fail)->delimiter(',')->check(CLI::Range(1, skewdiff::kCriterionCount));
    app.add_option("--threads", threads, "worker threads (default $SKEWDIFF_THREADS, else all cores)")
        ->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);
    if (threads == 0 && !std::getenv("SKEWDIFF_THREADS")) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads > 0) skewdiff::set_thread_count(threads);

    std::vector<int> ids = only;
    if (ids.empty())
        for (int id = 1; id <= skewdiff::kCriterionCount; ++id) ids.push_back(id);
    const std::set<int> expected(expect_fail.begin(), expect_fail.end());

    int unexpected = 0;
    try {
        skewdiff::run_criteria(ids, opts, [&](const skewdiff::CriterionResult& r) {
            const bool known = expected.count(r.id) > 0;
            if (!r.pass && !known) ++unexpected;
            std::printf("criterion %2d %-38s %s%s  (%.1f s)\n", r.id, r.title.c_str(), r.pass ? "PASS" : "FAIL",
                        r.pass ? "" : (known ? " [known]" : ""), r.seconds);
            if (!r.pass) std::printf("    %s\n", r.details.dump().c_str());
            std::fflush(stdout);
        });
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return unexpected == 0 ? 0 : 1;
}
