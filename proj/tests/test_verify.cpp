#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "skewdiff/error.hpp"
#include "skewdiff/verify.hpp"

using namespace skewdiff;

TEST_CASE("deterministic criteria pass and report details") {
    const VerifyOptions opts;
    for (int id : {1, 2, 3, 4, 11, 12}) {
        const auto r = run_criterion(id, opts);
        CAPTURE(id);
        CHECK(r.id == id);
        CHECK(r.pass);
        CHECK(r.details.is_object());
        CHECK(!r.title.empty());
    }
}

TEST_CASE("results json is stable and flags failures") {
    VerifyOptions opts;
    opts.scale = 0.01;
    const auto a = run_criteria({2, 9}, opts);
    const auto b = run_criteria({2, 9}, opts);
    CHECK(results_json(a).dump() == results_json(b).dump());
    auto failed = a;
    failed[0].pass = false;
    CHECK_FALSE(results_json(failed)["all_pass"].get<bool>());
    CHECK(results_json(a)["criteria"].size() == 2);
}

TEST_CASE("unknown criteria are configuration errors") {
    CHECK_THROWS_AS(run_criterion(0, {}), ConfigError);
    CHECK_THROWS_AS(run_criterion(15, {}), ConfigError);
}
