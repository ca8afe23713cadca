#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "skewdiff/config.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/io.hpp"

using namespace skewdiff;

TEST_CASE("parse sections, comments and lists") {
    const auto doc = ConfigDoc::parse("# header\n[medium]\nd_plus = 4   # coarse side\nd_minus=1\n\n[grid]\nx = -1 0.5 2\n");
    CHECK(doc.require_double("medium", "d_plus") == 4.0);
    CHECK(doc.get_double("medium", "lambda", 0.25) == 0.25);
    CHECK(doc.get_doubles("grid", "x") == std::vector<double>{-1.0, 0.5, 2.0});
    CHECK_FALSE(doc.has("sim", "seed"));
    CHECK_NOTHROW(doc.reject_unknown({{"medium", {"d_plus", "d_minus"}}, {"grid", {"x"}}}));
    CHECK_THROWS_AS(doc.reject_unknown({{"medium", {"d_plus"}}, {"grid", {"x"}}}), ConfigError);
    CHECK_THROWS_AS(doc.reject_unknown({{"medium", {"d_plus", "d_minus"}}}), ConfigError);
}

TEST_CASE("malformed documents") {
    CHECK_THROWS_AS(ConfigDoc::parse("d = 1\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDoc::parse("[a\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDoc::parse("[a]\nx\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDoc::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDoc::parse("[a]\n[a]\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDoc::parse("[a]\nx =\n"), ConfigError);
    const auto doc = ConfigDoc::parse("[a]\nx = 1.5e\n");
    CHECK_THROWS_AS(doc.require_double("a", "x"), ConfigError);
    CHECK_THROWS_AS(doc.require_double("a", "y"), ConfigError);
}

TEST_CASE("numbers and ranges") {
    CHECK(parse_double("0.1", "v") == 0.1);
    CHECK(parse_double(" -3e-2 ", "v") == -0.03);
    CHECK_THROWS_AS(parse_double("1,5", "v"), ConfigError);
    CHECK_THROWS_AS(parse_double("inf", "v"), ConfigError);
    CHECK(parse_int("42", "n") == 42);
    CHECK_THROWS_AS(parse_int("4.2", "n"), ConfigError);
    const auto r = parse_range("-5:5:0.01", "y");
    CHECK(r.size() == 1001);
    CHECK(r.front() == -5.0);
    CHECK(r.back() == doctest::Approx(5.0));
    CHECK_THROWS_AS(parse_range("1:0:0.1", "y"), ConfigError);
    CHECK_THROWS_AS(parse_range("0:1", "y"), ConfigError);
}

TEST_CASE("round-trip formatting and atomic writes") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
        CHECK(parse_double(format_double(v), "v") == v);
    const auto dir = std::filesystem::temp_directory_path() / "skewdiff_io_test";
    std::filesystem::remove_all(dir);
    const auto file = dir / "nested" / "out.csv";
    write_file_atomic(file, "a,b\n1,2\n");
    CHECK(read_file(file) == "a,b\n1,2\n");
    write_file_atomic(file, "x\n");
    CHECK(read_file(file) == "x\n");
    CHECK_FALSE(std::filesystem::exists(file.string() + ".tmp"));
    std::filesystem::remove_all(dir);
}
