/// @file test_config.cpp
/// Flat key = value configuration grammar: comments, dotted keys, typed
/// getters, and line-numbered BadConfig diagnostics.

#include <doctest.h>

#include <string>

#include "cbfed/config.hpp"
#include "cbfed/errors.hpp"

using namespace cbfed;

TEST_CASE("basic parsing with comments and dotted keys") {
    const Config cfg = Config::parse_string("# header comment\n"
                                            "mesh.nx = 8\n"
                                            "solver.tol = 1e-9   # trailing note\n"
                                            "\n"
                                            "superpotential.kind = absval\n"
                                            "solver.force = true\n");
    CHECK(cfg.get_int("mesh.nx", 0) == 8);
    CHECK(cfg.get_double("solver.tol", 0.0) == doctest::Approx(1e-9));
    CHECK(cfg.get_string("superpotential.kind", "") == "absval");
    CHECK(cfg.get_bool("solver.force", false));
    CHECK(cfg.get_double("model.mu", 1.5) == 1.5);  // fallback
    CHECK(cfg.has("mesh.nx"));
    CHECK_FALSE(cfg.has("mesh.ny"));
}

TEST_CASE("malformed lines carry their line number") {
    try {
        Config::parse_string("a = 1\nnot a key value\n", "demo.cfg");
        FAIL("expected BadConfig");
    } catch (const BadConfig& e) {
        CHECK(std::string(e.what()).find("demo.cfg:2") != std::string::npos);
    }
    try {
        Config::parse_string("key =\n", "demo.cfg");
        FAIL("expected BadConfig");
    } catch (const BadConfig& e) {
        CHECK(std::string(e.what()).find(":1") != std::string::npos);
    }
}

TEST_CASE("type errors carry key and line") {
    const Config cfg = Config::parse_string("x = abc\ny = 1.5\n", "t.cfg");
    CHECK_THROWS_AS(cfg.get_double("x", 0.0), BadConfig);
    CHECK_THROWS_AS(cfg.get_int("y", 0), BadConfig);  // 1.5 is not an integer
    CHECK_THROWS_AS(cfg.get_bool("x", false), BadConfig);
}

TEST_CASE("duplicate keys are rejected") {
    CHECK_THROWS_AS(Config::parse_string("a = 1\na = 2\n"), BadConfig);
}

TEST_CASE("unknown keys are flagged by check_consumed") {
    const Config cfg = Config::parse_string("known = 1\nmystery.key = 2\n", "u.cfg");
    CHECK(cfg.get_int("known", 0) == 1);
    try {
        cfg.check_consumed();
        FAIL("expected BadConfig");
    } catch (const BadConfig& e) {
        const std::string msg = e.what();
        CHECK(msg.find("mystery.key") != std::string::npos);
        CHECK(msg.find("u.cfg:2") != std::string::npos);
    }
    // Consuming everything clears the check.
    CHECK(cfg.get_int("mystery.key", 0) == 2);
    CHECK_NOTHROW(cfg.check_consumed());
}

TEST_CASE("required keys") {
    const Config cfg = Config::parse_string("present = 2.5\n");
    CHECK(cfg.require_double("present") == doctest::Approx(2.5));
    CHECK_THROWS_AS(cfg.require_string("absent"), BadConfig);
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(Config::parse_file("/nonexistent/path.cfg"), BadConfig);
}
