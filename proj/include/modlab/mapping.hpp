#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "modlab/errors.hpp"
#include "modlab/geometry.hpp"
#include "modlab/vec.hpp"

namespace modlab {

enum class MapKind { generic, radial, catalog };

struct RadialProfile {
  std::function<double(double)> rho;
  std::function<double(double)> drho;
};

// An evaluable mapping with optional exact-derivative data. Punctures are
// isolated points where the map is undefined (typically the ring center).
struct MappingSpec {
  MapKind kind{MapKind::generic};
  int n{2};
  std::function<Vec(const Vec&)> evaluator;
  std::optional<std::function<Eigen::MatrixXd(const Vec&)>> exact_jacobian;
  std::optional<RadialProfile> radial_profile;
  Domain domain;
  std::vector<Vec> punctures;
  std::optional<int> multiplicity;

  bool evaluable(const Vec& x) const {
    for (const auto& q : punctures)
      if (dist(x, q) == 0.0) return false;
    double d = dist(x, domain.center);
    double pad = 1e-12 * std::max(1.0, domain.r2);
    return d >= domain.r1 - pad && d <= domain.r2 + pad;
  }

  Vec eval(const Vec& x) const { return evaluator(x); }

  double distance_to_punctures(const Vec& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& q : punctures) d = std::min(d, dist(x, q));
    return d;
  }
};

// f(x) = x0 + rho(|x - x0|) * (x - x0)/|x - x0| about the domain center,
// with the exact Jacobian assembled from the tangential and radial stretches.
inline MappingSpec make_radial_map(const Domain& dom, std::function<double(double)> rho,
                                   std::function<double(double)> drho) {
  MappingSpec m;
  m.kind = MapKind::radial;
  m.n = dom.dim();
  m.domain = dom;
  m.punctures = {dom.center};
  Vec c = dom.center;
  int n = m.n;
  auto rho_f = rho;
  m.evaluator = [c, rho_f](const Vec& x) {
    Vec d = x - c;
    double r = d.norm();
    return c + d * (rho_f(r) / r);
  };
  m.exact_jacobian = [c, n, rho, drho](const Vec& x) {
    Vec d = x - c;
    double r = d.norm();
    Vec u = d * (1.0 / r);
    double lt = rho(r) / r;   // tangential stretch
    double lr = drho(r);      // radial stretch
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n) * lt;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) J(i, j) += (lr - lt) * u[i] * u[j];
    return J;
  };
  m.radial_profile = RadialProfile{std::move(rho), std::move(drho)};
  m.multiplicity = 1;
  return m;
}

struct DifferentialReport {
  Vec point;
  Eigen::MatrixXd jacobian;
  std::vector<double> singular_values;  // ascending
  double jac_det{0.0};                  // signed
  double L{0.0};                        // largest stretch
  double l{0.0};                        // smallest stretch
  bool finite_distortion{true};
};

// Tangential stretch rho(r)/r and radial stretch rho'(r) of a radial profile.
inline std::pair<double, double> radial_stretches(const RadialProfile& profile, double r) {
  if (!(r > 0.0)) throw Error("radial_stretches: r > 0 required");
  return {profile.rho(r) / r, profile.drho(r)};
}

// Jacobian singular values at x: exact derivative when available, central
// differences with step h otherwise. For conformal metrics the stretches are
// scaled by lambda(f(x))/lambda(x) before any dilatation is formed.
inline DifferentialReport differential_report(const MappingSpec& map, const Vec& x, double h,
                                              const MetricField& metric = MetricField{0, nullptr}) {
  if (!(h > 0.0)) throw Error("differential_report: h > 0 required");
  if (map.distance_to_punctures(x) <= 2.0 * h)
    throw NearSingularity("differential_report: point within 2h of a puncture");

  int n = map.n;
  Eigen::MatrixXd J(n, n);
  if (map.exact_jacobian) {
    J = (*map.exact_jacobian)(x);
  } else {
    for (int j = 0; j < n; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      Vec fp = map.eval(xp);
      Vec fm = map.eval(xm);
      for (int i = 0; i < n; ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * h);
    }
  }

  DifferentialReport rep;
  rep.point = x;
  rep.jacobian = J;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  rep.singular_values.assign(svd.singularValues().data(),
                             svd.singularValues().data() + n);
  std::sort(rep.singular_values.begin(), rep.singular_values.end());
  rep.jac_det = J.determinant();

  double factor = 1.0;
  if (metric.lambda && metric.n == n) {
    double lx = metric.at(x);
    double lf = metric.at(map.eval(x));
    factor = lf / lx;
  }
  if (factor != 1.0) {
    for (auto& s : rep.singular_values) s *= factor;
    rep.jac_det *= std::pow(factor, n);
  }

  rep.l = rep.singular_values.front();
  rep.L = rep.singular_values.back();
  const double thr = 1e-10;
  rep.finite_distortion = (std::abs(rep.jac_det) >= thr) || (rep.L < thr);
  return rep;
}

// K_{I,p} = |J| / l^p when J != 0; 1 when the derivative vanishes; +inf
// otherwise (the degenerate branch is encoded as a sentinel, not an error).
inline double inner_dilatation(const DifferentialReport& rep, double p) {
  if (!(p >= 1.0)) throw ParameterRange("inner_dilatation: p >= 1 required");
  if (rep.jac_det != 0.0 && rep.l > 0.0)
    return std::abs(rep.jac_det) / std::pow(rep.l, p);
  if (rep.L == 0.0) return 1.0;
  return std::numeric_limits<double>::infinity();
}

// K_{O,p} = L^p / |J| with the same degenerate branches.
inline double outer_dilatation(const DifferentialReport& rep, double p) {
  if (!(p >= 1.0)) throw ParameterRange("outer_dilatation: p >= 1 required");
  if (rep.jac_det != 0.0) return std::pow(rep.L, p) / std::abs(rep.jac_det);
  if (rep.L == 0.0) return 1.0;
  return std::numeric_limits<double>::infinity();
}

// Fraction of sampled points where the finite-distortion implication
// (J = 0 => full derivative = 0) holds, with threshold 1e-10.
inline double finite_distortion_survey(const MappingSpec& map, int samples,
                                       std::uint64_t seed) {
  if (samples < 1) throw Error("finite_distortion_survey: samples >= 1 required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Domain& dom = map.domain;
  double h = 1e-5 * dom.r2;
  int held = 0;
  for (int k = 0; k < samples; ++k) {
    Vec x = dom.center;
    // Deterministic rejection sampling inside the domain, away from punctures.
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Vec cand = dom.center;
      for (int i = 0; i < map.n; ++i) cand[i] += dom.r2 * unif(rng);
      double d = dist(cand, dom.center);
      if (d <= dom.r1 || d >= dom.r2 * (1.0 - 1e-9)) continue;
      if (map.distance_to_punctures(cand) <= 4.0 * h) continue;
      x = cand;
      break;
    }
    DifferentialReport rep = differential_report(map, x, h);
    const double thr = 1e-10;
    bool ok = (std::abs(rep.jac_det) >= thr) || (rep.L < thr);
    if (ok) ++held;
  }
  return static_cast<double>(held) / samples;
}

}  // namespace modlab
