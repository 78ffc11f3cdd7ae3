#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "modlab/catalog.hpp"

using namespace modlab;

namespace {

Vec random_point(int n, double rmin, double rmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (;;) {
    Vec x = zero_vec(n);
    for (int i = 0; i < n; ++i) x[i] = unif(rng);
    double r = x.norm();
    if (r > rmin && r < rmax) return x;
  }
}

}  // namespace

TEST_CASE("catalog listing") {
  auto names = catalog_names();
  REQUIRE(names.size() == 6);
  for (const auto& name : names) {
    CatalogEntry e = make_catalog_map(name);
    CHECK(e.name == name);
    CHECK_FALSE(e.map.punctures.empty());
  }
  CHECK_THROWS_AS(make_catalog_map("nonsense"), ParameterRange);
}

TEST_CASE("exact dilatations match the numeric path on every entry") {
  std::mt19937_64 rng(11);
  for (const auto& name : catalog_names()) {
    CatalogEntry e = make_catalog_map(name);
    double p = (e.map.n == 3) ? 3.0 : 2.0;
    for (int k = 0; k < 20; ++k) {
      Vec x = random_point(e.map.n, 0.05, 0.9, rng);
      DifferentialReport rep = differential_report(e.map, x, 1e-6);
      double ki = inner_dilatation(rep, p);
      double ko = outer_dilatation(rep, p);
      CHECK(ki == doctest::Approx(e.exact_inner(x, p)).epsilon(1e-5));
      CHECK(ko == doctest::Approx(e.exact_outer(x, p)).epsilon(1e-5));
    }
  }
}

TEST_CASE("blow-up map stretch values") {
  CatalogEntry e = make_catalog_map("annulus_blowup");  // alpha = 0.5, n = 3
  auto [lt, lr] = radial_stretches(*e.map.radial_profile, 0.25);
  CHECK(lt == doctest::Approx(6.0));
  CHECK(lr == doctest::Approx(1.0));
  Vec x(0.25, 0.0, 0.0);
  CHECK(exact_dilatation(e, x, 3.0) == doctest::Approx(36.0).epsilon(1e-12));
  CHECK_THROWS_AS(exact_dilatation(e, Vec(1e-14, 0.0, 0.0), 3.0), NearSingularity);
}

TEST_CASE("exact dilatations are rotation invariant for radial entries") {
  CatalogEntry e = make_catalog_map("radial_power", {{"alpha", 0.5}});
  double r = 0.3;
  double base = e.exact_inner(Vec(r, 0.0), 2.0);
  for (int k = 1; k < 8; ++k) {
    double th = 2.0 * pi * k / 8.0;
    CHECK(e.exact_inner(Vec(r * std::cos(th), r * std::sin(th)), 2.0) ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("power map multiplicity: m preimages identified") {
  CatalogEntry e = make_catalog_map("planar_power", {{"m", 2.0}});
  REQUIRE(e.map.multiplicity.has_value());
  CHECK(*e.map.multiplicity == 2);
  Vec z(0.4, 0.3);
  Vec fz = e.map.eval(z);
  Vec fneg = e.map.eval(z * -1.0);  // antipodal preimage of z^2
  CHECK(dist(fz, fneg) < 1e-14);

  CatalogEntry tw = make_catalog_map("twisting", {{"m", 3.0}});
  CHECK(*tw.map.multiplicity == 3);
  // The twist preserves cylindrical radius and height.
  Vec x(0.2, 0.1, 0.4);
  Vec y = tw.map.eval(x);
  CHECK(std::hypot(y[0], y[1]) == doctest::Approx(std::hypot(x[0], x[1])));
  CHECK(y[2] == doctest::Approx(x[2]));
}

TEST_CASE("log-weight counterexample: profile limit e^{-1}") {
  CatalogEntry e = make_catalog_map("counterexample_n");
  CHECK(e.limit_set.kind == LimitSetKind::sphere);
  CHECK(e.limit_set.radius == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
  // Dilatation equals the weight: K_{I,n}(x) = q0(|x|).
  for (double r : {0.5, 0.1, 0.01}) {
    double L = std::log(std::exp(1.0) / r);
    CHECK(e.exact_inner(Vec(r, 0.0), 2.0) == doctest::Approx(L * L).epsilon(1e-9));
  }
  CHECK_THROWS_AS(make_catalog_map("counterexample_n", {}, [](double) { return 0.5; }),
                  ParameterRange);
}

TEST_CASE("power-weight counterexample: closed-form profile") {
  CatalogEntry e = make_catalog_map("counterexample_alpha");  // n=2, alpha=1.5
  // q0(t) = t^{-3/4} gives rho(r) = 1/(3 - 2 sqrt(r)) and limit radius 1/3.
  CHECK(e.limit_set.radius == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  auto& prof = *e.map.radial_profile;
  CHECK(prof.rho(0.25) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(prof.rho(1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(make_catalog_map("counterexample_alpha", {{"alpha", 2.5}}),
                  ParameterRange);
}

TEST_CASE("limit probes confirm the declared boundary behavior") {
  CatalogEntry blow = make_catalog_map("annulus_blowup");
  LimitProbeReport rb =
      probe_limit_set(blow, 32, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  CHECK(rb.descriptor_confirmed);
  CHECK(rb.separations.back().second == doctest::Approx(2.0).epsilon(0.01));

  CatalogEntry rp = make_catalog_map("radial_power");
  LimitProbeReport rr = probe_limit_set(
      rp, 32, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8});
  CHECK(rr.descriptor_confirmed);
  CHECK(rr.separations.back().second < 1e-3);

  CHECK_THROWS_AS(probe_limit_set(blow, 1, {1e-2}), ParameterRange);
  CHECK_THROWS_AS(probe_limit_set(blow, 8, {}), ParameterRange);
}
