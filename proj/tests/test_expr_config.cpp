#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "modlab/config.hpp"
#include "modlab/expr.hpp"

using namespace modlab;

TEST_CASE("radial expression grammar") {
  CHECK(RadialExpr::parse("2+3*4")(0.0) == doctest::Approx(14.0));
  CHECK(RadialExpr::parse("(2+3)*4")(0.0) == doctest::Approx(20.0));
  CHECK(RadialExpr::parse("-t*t")(3.0) == doctest::Approx(-9.0));
  CHECK(RadialExpr::parse("pow(log(e/t),2)")(1.0) == doctest::Approx(1.0));
  CHECK(RadialExpr::parse("pow(log(e/t),2)")(std::exp(-1.0)) == doctest::Approx(4.0));
  CHECK(RadialExpr::parse("sqrt(abs(-r))")(4.0) == doctest::Approx(2.0));
  CHECK(RadialExpr::parse("pi")(0.0) == doctest::Approx(pi));
  CHECK(RadialExpr::parse("1e-3 + 2.5E2")(0.0) == doctest::Approx(250.001));
  CHECK(RadialExpr::parse("x/2")(5.0) == doctest::Approx(2.5));

  CHECK_THROWS_AS(RadialExpr::parse("foo(t)"), Error);
  CHECK_THROWS_AS(RadialExpr::parse("t t"), Error);
  CHECK_THROWS_AS(RadialExpr::parse("(1+2"), Error);
  CHECK_THROWS_AS(RadialExpr::parse("pow(t)"), Error);
  CHECK_THROWS_AS(RadialExpr::parse(""), Error);
}

TEST_CASE("minimal modulus config gets the documented defaults") {
  RunConfig cfg = parse_config(json::object(), "modulus");
  CHECK(cfg.resolved["grid"] == 256);
  CHECK(cfg.resolved["curves"] == 400);
  CHECK(cfg.resolved["tol"].get<double>() == doctest::Approx(1e-3));
  CHECK(cfg.resolved["seed"] == 0);
  CHECK(cfg.resolved["n"] == 2);
  CHECK(cfg.resolved["p"].get<double>() == doctest::Approx(2.0));
  CHECK(cfg.resolved["format"] == "csv");
  CHECK(cfg.resolved["domain"]["kind"] == "annulus");
}

TEST_CASE("strict schema validation with pointer paths") {
  try {
    parse_config(json{{"p", 1.0}}, "modulus");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "/p");
    CHECK(std::string(e.what()).find("p > 1") != std::string::npos);
  }

  try {
    parse_config(json{{"foo", 1}}, "modulus");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "/foo");
  }

  try {
    parse_config(json{{"domain", {{"bar", 1}}}}, "modulus");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "/domain/bar");
  }

  CHECK_THROWS_AS(parse_config(json{{"n", 4}}, "modulus"), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"format", "xml"}}, "modulus"), ConfigError);
  CHECK_THROWS_AS(parse_config(json::object(), "no-such-command"), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"kind", "bogus"}}, "criteria"), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"q", "foo(t)"}, {"kind", "divergence"}}, "criteria"),
                  ConfigError);
}

TEST_CASE("resolved config reparses to itself") {
  RunConfig first = parse_config(json{{"p", 3.0}, {"grid", 64}}, "modulus");
  RunConfig second = parse_config(first.resolved, "modulus");
  CHECK(first.resolved == second.resolved);
}

TEST_CASE("builders from resolved fragments") {
  RunConfig mc = parse_config(json{{"domain", {{"kind", "annulus"}, {"r1", 1.0}, {"r2", 2.0}}}},
                              "modulus");
  Domain dom = build_domain(mc.resolved);
  CHECK(dom.r1 == 1.0);
  CHECK(dom.r2 == 2.0);
  CHECK(dom.dim() == 2);

  MetricField flat = build_metric(mc.resolved);
  CHECK(flat.at(Vec(1.5, 0.0)) == 1.0);

  RunConfig conf = parse_config(json{{"metric", "1/t"},
                                     {"domain", {{"kind", "annulus"}, {"r1", 1.0}, {"r2", 2.0}}}},
                                "modulus");
  MetricField hyp = build_metric(conf.resolved);
  CHECK(hyp.at(Vec(2.0, 0.0)) == doctest::Approx(0.5));

  RunConfig dc = parse_config(json{{"map", "identity"}}, "dilatation");
  auto [ident, none] = build_map(dc.resolved);
  CHECK_FALSE(none.has_value());
  CHECK(ident.eval(Vec(1.0, 2.0)) == Vec(1.0, 2.0));

  RunConfig cc = parse_config(
      json{{"map", {{"catalog", "radial_power"}, {"params", {{"alpha", 0.25}}}}}},
      "dilatation");
  auto [rp, entry] = build_map(cc.resolved);
  REQUIRE(entry.has_value());
  CHECK(entry->params.at("alpha") == doctest::Approx(0.25));

  RunConfig rc = parse_config(
      json{{"map", {{"radial", {{"rho", "t*t"}, {"drho", "2*t"}}}}}}, "dilatation");
  auto [rad, none2] = build_map(rc.resolved);
  CHECK(rad.eval(Vec(0.5, 0.0))[0] == doctest::Approx(0.25));

  CHECK_THROWS_AS(build_map(parse_config(json{{"map", {{"catalog", "bogus"}}}},
                                         "dilatation").resolved),
                  ConfigError);
}
