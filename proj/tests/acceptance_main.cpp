// Acceptance gate: one line per criterion, PASS/FAIL, nonzero exit on any
// failure. Tolerances are pinned in-line next to each check.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "modlab/catalog.hpp"
#include "modlab/criteria.hpp"
#include "modlab/modulus.hpp"

using namespace modlab;

namespace {

int failures = 0;

void report(int idx, const std::string& label, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", idx, label.c_str(),
              detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double ring_estimate(int n, double p, double r1, double r2, int curves, int grid,
                     double jitter, std::uint64_t seed) {
  Vec o = zero_vec(n);
  Domain dom = make_domain(DomainKind::annulus, o, r1, r2);
  CurveFamily fam = sample_ring_curves(o, r1, r2, curves, jitter, seed);
  return estimate_modulus(fam, p, dom, MetricField::flat(n), grid).value;
}

// --- criterion 1: ring modulus oracle --------------------------------------

void criterion_ring_oracle() {
  double e2 = ring_estimate(2, 2.0, 1.0, std::exp(1.0), 400, 256, 0.0, 0);
  double r2 = 2.0 * pi;
  double d2 = std::abs(e2 - r2) / r2;

  double e3 = ring_estimate(3, 3.0, 1.0, 2.0, 400, 256, 0.0, 0);
  double r3 = 4.0 * pi / (std::log(2.0) * std::log(2.0));
  double d3 = std::abs(e3 - r3) / r3;

  report(1, "ring modulus vs closed form", d2 <= 0.05 && d3 <= 0.08,
         "n=2 rel_err=" + fmt(d2) + " (tol 0.05), n=3 rel_err=" + fmt(d3) + " (tol 0.08)");
}

// --- criterion 2: modulus properties over seeds ----------------------------

void criterion_properties() {
  bool ok = true;
  std::string worst;
  double worst_margin = 1e9;
  auto note = [&](const std::string& what, double margin) {
    if (margin < worst_margin) {
      worst_margin = margin;
      worst = what;
    }
    if (margin < 0.0) ok = false;
  };

  Vec o = zero_vec(2);
  MetricField flat = MetricField::flat(2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CurveFamily full = sample_ring_curves(o, 1.0, 2.0, 160, 0.15, seed);
    Domain dom = make_domain(DomainKind::annulus, o, 1.0, 2.0);

    // Nesting: a subfamily admits every density of the full family.
    CurveFamily half;
    half.kind = full.kind;
    for (std::size_t i = 0; i < full.curves.size(); i += 2)
      half.curves.push_back(full.curves[i]);
    double mf = estimate_modulus(full, 2.0, dom, flat, 64).value;
    double mh = estimate_modulus(half, 2.0, dom, flat, 64).value;
    note("nesting seed " + std::to_string(seed), mf + 1e-6 - mh);

    // Subadditivity on a disjoint split of the family.
    CurveFamily other;
    other.kind = full.kind;
    for (std::size_t i = 1; i < full.curves.size(); i += 2)
      other.curves.push_back(full.curves[i]);
    double mo = estimate_modulus(other, 2.0, dom, flat, 64).value;
    note("subadditivity seed " + std::to_string(seed), 1.01 * (mh + mo) - mf);

    // Minorization: every extended curve contains an original curve.
    Domain wide = make_domain(DomainKind::annulus, o, 1.0, 3.0);
    CurveFamily extended = full;
    for (auto& c : extended.curves) {
      Vec tail = c.vertices.back();
      Vec dir = tail.normalized();
      dir.n = 2;
      for (int k = 1; k <= 16; ++k)
        c.vertices.push_back(dir * (2.0 + k / 16.0));
    }
    double morig = estimate_modulus(full, 2.0, wide, flat, 96).value;
    double mext = estimate_modulus(extended, 2.0, wide, flat, 96).value;
    note("minorization seed " + std::to_string(seed), 1.01 * morig - mext);

    // Scale invariance of the planar 2-modulus.
    const double c = 2.5;
    CurveFamily scaled = full;
    for (auto& cur : scaled.curves)
      for (auto& v : cur.vertices) v = v * c;
    Domain sdom = make_domain(DomainKind::annulus, o, c, 2.0 * c);
    double ms = estimate_modulus(scaled, 2.0, sdom, flat, 64).value;
    double dev = std::abs(ms - mf) / mf;
    note("scale invariance seed " + std::to_string(seed), 0.01 - dev);
  }
  report(2, "modulus properties over 5 seeds", ok,
         "tightest margin " + fmt(worst_margin) + " at " + worst);
}

// --- criterion 3: dilatation oracle ----------------------------------------

void criterion_dilatation() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  bool ok = true;
  double worst = 0.0;
  std::string where;
  for (const auto& name : catalog_names()) {
    CatalogEntry e = make_catalog_map(name);
    MappingSpec numeric = e.map;
    numeric.exact_jacobian.reset();  // force central differences
    double p = static_cast<double>(e.map.n);
    for (int k = 0; k < 50; ++k) {
      Vec x = zero_vec(e.map.n);
      for (;;) {
        for (int i = 0; i < e.map.n; ++i) x[i] = unif(rng);
        double r = x.norm();
        if (r > 0.05 && r < 0.9) break;
      }
      DifferentialReport rep = differential_report(numeric, x, 1e-5);
      double ki = inner_dilatation(rep, p);
      double ko = outer_dilatation(rep, p);
      double ri = std::abs(ki - e.exact_inner(x, p)) / e.exact_inner(x, p);
      double ro = std::abs(ko - e.exact_outer(x, p)) / e.exact_outer(x, p);
      double r = std::max(ri, ro);
      if (r > worst) {
        worst = r;
        where = name;
      }
      if (r > 1e-4) ok = false;
    }
  }

  CatalogEntry blow = make_catalog_map("annulus_blowup");
  Vec probe(0.25, 0.0, 0.0);
  double exact = exact_dilatation(blow, probe, 3.0);
  bool exact36 = exact == 36.0;
  MappingSpec numeric = blow.map;
  numeric.exact_jacobian.reset();
  double knum =
      inner_dilatation(differential_report(numeric, probe, 1e-5), 3.0);
  bool num36 = std::abs(knum - 36.0) / 36.0 <= 1e-4;
  report(3, "dilatation numeric vs exact", ok && exact36 && num36,
         "max rel_err=" + fmt(worst) + " at " + where + " (tol 1e-4), blow-up exact=" +
             fmt(exact) + " numeric=" + fmt(knum));
}

// --- criterion 4: criteria classification ----------------------------------

void criterion_classification() {
  auto lg = [](double t) { return std::log(std::exp(1.0) / t); };
  VerdictKind d1 = divergence_test([](double) { return 1.0; }, 0.5, 2, 2.0).kind;
  VerdictKind d2 = divergence_test(lg, 0.5, 2, 2.0).kind;
  VerdictKind d3 =
      divergence_test([lg](double t) { double v = lg(t); return v * v; }, 0.5, 2, 2.0).kind;

  MetricField flat = MetricField::flat(2);
  Vec o = zero_vec(2);
  VerdictKind f1 = fmo_test([](const Vec&) { return 1.0; }, o, flat).kind;
  VerdictKind f2 =
      fmo_test([](const Vec& x) { return std::log(1.0 / x.norm()); }, o, flat).kind;
  VerdictKind f3 = fmo_test([](const Vec& x) { return 1.0 / x.norm(); }, o, flat).kind;

  bool ok = d1 == VerdictKind::DIVERGES && d2 == VerdictKind::DIVERGES &&
            d3 == VerdictKind::CONVERGES && f1 == VerdictKind::FMO &&
            f2 == VerdictKind::FMO && f3 == VerdictKind::NOT_FMO;
  report(4, "six classifications, zero INCONCLUSIVE", ok,
         std::string("q=1:") + verdict_name(d1) + " log:" + verdict_name(d2) +
             " log^2:" + verdict_name(d3) + " const:" + verdict_name(f1) +
             " log(1/r):" + verdict_name(f2) + " 1/r:" + verdict_name(f3));
}

// --- criterion 5: integrability sharpness around the exponent threshold ----

void criterion_sharpness() {
  // n = 3, p = 2: the dominating weight |x|^{-(n-1)(p*alpha-1)} is
  // L^n-integrable near 0 exactly when (n-1)(p*alpha-1) < 1, i.e. alpha < 3/4.
  const int n = 3;
  const double p = 2.0;
  Domain ball = make_domain(DomainKind::ball, zero_vec(n), 0.0, 1.0);
  auto run = [&](double alpha) {
    double expo = (n - 1) * (p * alpha - 1.0);
    return ls_integrability_test(
        [expo](const Vec& x) { return std::pow(x.norm(), -expo); }, ball,
        static_cast<double>(n), 256);
  };
  LsIntegrabilityReport below = run(0.5);  // exponent 0 < 1
  LsIntegrabilityReport above = run(0.8);  // exponent 1.2 >= 1
  report(5, "integrability flips across alpha threshold",
         below.converged && !above.converged,
         "alpha=0.5 converged=" + std::to_string(below.converged) +
             ", alpha=0.8 converged=" + std::to_string(above.converged));
}

// --- criterion 6: boundary cluster witnesses -------------------------------

void criterion_limit_sets() {
  CatalogEntry ce = make_catalog_map("counterexample_n");
  LimitProbeReport sphere =
      probe_limit_set(ce, 32, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  double target = 2.0 * std::exp(-1.0);

  CatalogEntry rp = make_catalog_map("radial_power");
  LimitProbeReport point =
      probe_limit_set(rp, 32, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8});

  report(6, "limit set probes", sphere.descriptor_confirmed && point.descriptor_confirmed,
         "sphere separation->" + fmt(sphere.extrapolated) + " vs " + fmt(target) +
             " (tol 2%), point last=" + fmt(point.separations.back().second) +
             " (tol 1e-3)");
}

// --- criterion 7: ring inequality across the catalog -----------------------

struct RingCase {
  std::string label;
  MappingSpec map;
  double p;
  double r1, r2;
  std::function<double(const Vec&)> Q;
  std::function<double(double)> Qr;
};

void criterion_ring_inequality() {
  std::vector<RingCase> cases;

  MappingSpec ident;
  ident.n = 2;
  ident.domain = make_domain(DomainKind::ball, zero_vec(2), 0.0, 100.0);
  ident.evaluator = [](const Vec& x) { return x; };
  cases.push_back({"identity", ident, 2.0, 1.0, std::exp(1.0),
                   [](const Vec&) { return 1.0; }, [](double) { return 1.0; }});

  auto add_entry = [&](const std::string& name, double p, double r1, double r2) {
    CatalogEntry e = make_catalog_map(name);
    auto Qf = [e, p](const Vec& x) { return e.exact_inner(x, p); };
    auto Qr = [e, p](double t) { return e.exact_inner(Vec(t, 0.0), p); };
    cases.push_back({name, e.map, p, r1, r2, Qf, Qr});
  };
  add_entry("planar_power", 2.0, 0.1, 0.5);
  add_entry("radial_power", 2.0, 0.1, 0.5);
  add_entry("counterexample_n", 2.0, 0.1, 0.5);
  add_entry("counterexample_alpha", 1.5, 0.1, 0.5);

  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    // Extremal radial density t^{-(n-1)/(p-1)} Q(t)^{-1/(p-1)}, normalized.
    double expo = (2 - 1) / (c.p - 1.0);
    auto raw = [&c, expo](double t) {
      return std::pow(t, -expo) * std::pow(std::max(c.Qr(t), 1e-300), -1.0 / (c.p - 1.0));
    };
    const int N = 4096;
    double h = (c.r2 - c.r1) / N;
    double acc = raw(c.r1) + raw(c.r2);
    for (int i = 1; i < N; ++i) acc += raw(c.r1 + i * h) * ((i % 2) ? 4.0 : 2.0);
    acc *= h / 3.0;
    double scale = (1.0 + 1e-9) / acc;
    auto eta = [raw, scale](double t) { return raw(t) * scale; };

    RingInequalityReport rep = check_ring_inequality(
        c.map, zero_vec(2), c.r1, c.r2, c.p, c.Q, eta, 300, 192);
    double ratio = rep.lhs / rep.rhs;
    bool holds = rep.holds;
    bool equality_ok = true;
    if (c.label == "identity") equality_ok = std::abs(ratio - 1.0) <= 0.02;
    if (!holds || !equality_ok) ok = false;
    if (!detail.empty()) detail += ", ";
    detail += c.label + ":" + fmt(ratio);
  }
  report(7, "ring inequality lhs <= 1.05 rhs", ok, "lhs/rhs " + detail);
}

// --- criterion 8: iterated vs direct volume integral -----------------------

void criterion_fubini() {
  const int n = 3;
  Vec o = zero_vec(n);
  double r1 = std::exp(-3.0), r2 = std::exp(-1.0);
  MetricField flat = MetricField::flat(n);
  auto Q = [](const Vec& x) { return std::log(1.0 / x.norm()); };

  // Sphere-then-radius: int q(r) r^{n-1} dr with q the spherical mean factor.
  const int N = 2000;  // even, Simpson
  double h = (r2 - r1) / N;
  auto shell = [&](double r) {
    return spherical_mean_q(Q, o, r, flat, 64) * std::pow(r, n - 1);
  };
  double iterated = shell(r1) + shell(r2);
  for (int i = 1; i < N; ++i) iterated += shell(r1 + i * h) * ((i % 2) ? 4.0 : 2.0);
  iterated *= h / 3.0;

  Domain ann = make_domain(DomainKind::annulus, o, r1, r2);
  double direct = volume_integrate(ann, flat, Q, 256);
  double dev = std::abs(iterated - direct) / direct;
  report(8, "iterated integration matches volume integral", dev <= 0.005,
         "iterated=" + fmt(iterated) + " direct=" + fmt(direct) + " rel_dev=" + fmt(dev) +
             " (tol 0.005)");
}

// --- criterion 9: determinism ----------------------------------------------

void criterion_determinism() {
  double a1 = ring_estimate(2, 2.0, 1.0, 2.0, 200, 96, 0.1, 7);
  double a2 = ring_estimate(2, 2.0, 1.0, 2.0, 200, 96, 0.1, 7);

  auto lg2 = [](double t) {
    double v = std::log(std::exp(1.0) / t);
    return v * v;
  };
  double b1 = divergence_test(lg2, 0.5, 2, 2.0).evidence.back().second;
  double b2 = divergence_test(lg2, 0.5, 2, 2.0).evidence.back().second;

  CatalogEntry ce = make_catalog_map("counterexample_n");
  double c1 = probe_limit_set(ce, 16, {1e-2, 1e-4, 1e-6}).extrapolated;
  double c2 = probe_limit_set(ce, 16, {1e-2, 1e-4, 1e-6}).extrapolated;

  bool ok = a1 == a2 && b1 == b2 && c1 == c2;
  report(9, "same-seed reruns are bit-identical", ok,
         "modulus " + fmt(a1) + "==" + fmt(a2) + ", ladder " + fmt(b1) + "==" + fmt(b2) +
             ", probe " + fmt(c1) + "==" + fmt(c2));
}

}  // namespace

int main() {
  criterion_ring_oracle();
  criterion_properties();
  criterion_dilatation();
  criterion_classification();
  criterion_sharpness();
  criterion_limit_sets();
  criterion_ring_inequality();
  criterion_fubini();
  criterion_determinism();
  if (failures == 0) {
    std::printf("all 9 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return 1;
}
