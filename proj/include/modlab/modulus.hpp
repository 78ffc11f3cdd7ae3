#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "modlab/errors.hpp"
#include "modlab/geometry.hpp"
#include "modlab/mapping.hpp"
#include "modlab/util.hpp"

namespace modlab {

// Discretized admissible density rho >= 0 on a polar grid over a ring domain.
// n=2: nr radial shells x na angular sectors. n=3: nr shells x an equal-area
// (cos(theta), phi) grid; the angular binning is deliberately coarse so that a
// few hundred sampled curves cover every bin.
struct DensityGrid {
  Vec center;
  double r1{0.0}, r2{1.0};
  int n{2};
  int nr{0};
  int nu{1}, nphi{1};          // angular bins (n=2 uses nphi only)
  std::vector<double> measure; // metric cell measure, size nr * nang()
  std::vector<double> rho;

  int nang() const { return nu * nphi; }
  int cells() const { return nr * nang(); }

  int angular_index(const Vec& d) const {
    if (n == 2) {
      double th = std::atan2(d[1], d[0]);
      if (th < 0.0) th += 2.0 * pi;
      int j = static_cast<int>(th / (2.0 * pi) * nphi);
      return std::clamp(j, 0, nphi - 1);
    }
    double r = d.norm();
    double u = (r > 0.0) ? d[2] / r : 0.0;
    int iu = std::clamp(static_cast<int>((u + 1.0) / 2.0 * nu), 0, nu - 1);
    double ph = std::atan2(d[1], d[0]);
    if (ph < 0.0) ph += 2.0 * pi;
    int jp = std::clamp(static_cast<int>(ph / (2.0 * pi) * nphi), 0, nphi - 1);
    return iu * nphi + jp;
  }

  // -1 when the point falls outside the radial range.
  int cell_index(const Vec& p) const {
    Vec d = p - center;
    double r = d.norm();
    if (!(r > r1 && r < r2)) return -1;
    int ir = std::clamp(static_cast<int>((r - r1) / (r2 - r1) * nr), 0, nr - 1);
    return ir * nang() + angular_index(d);
  }
};

inline DensityGrid make_density_grid(const Domain& domain, const MetricField& metric,
                                     int resolution) {
  int n = domain.dim();
  check_dimension(n);
  DensityGrid g;
  g.center = domain.center;
  g.r1 = domain.r1;
  g.r2 = domain.r2;
  g.n = n;
  g.nr = std::max(8, resolution);
  if (n == 2) {
    g.nu = 1;
    g.nphi = std::max(8, resolution);
  } else {
    g.nu = 8;
    g.nphi = 16;
  }
  g.measure.assign(static_cast<std::size_t>(g.cells()), 0.0);
  g.rho.assign(static_cast<std::size_t>(g.cells()), 0.0);

  double dr = (g.r2 - g.r1) / g.nr;
  for (int ir = 0; ir < g.nr; ++ir) {
    double ri = g.r1 + ir * dr;
    double ro = ri + dr;
    double rmid = 0.5 * (ri + ro);
    if (n == 2) {
      double dtheta = 2.0 * pi / g.nphi;
      double shell = 0.5 * (ro * ro - ri * ri) * dtheta;
      for (int j = 0; j < g.nphi; ++j) {
        double th = (j + 0.5) * dtheta;
        Vec p = g.center + Vec(rmid * std::cos(th), rmid * std::sin(th));
        double lam = metric.at(p);
        g.measure[static_cast<std::size_t>(ir * g.nphi + j)] = shell * lam * lam;
      }
    } else {
      double du = 2.0 / g.nu;
      double dphi = 2.0 * pi / g.nphi;
      double shell = (ro * ro * ro - ri * ri * ri) / 3.0 * du * dphi;
      for (int iu = 0; iu < g.nu; ++iu) {
        double u = -1.0 + (iu + 0.5) * du;
        double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        for (int jp = 0; jp < g.nphi; ++jp) {
          double ph = (jp + 0.5) * dphi;
          Vec p = g.center + Vec(rmid * s * std::cos(ph), rmid * s * std::sin(ph), rmid * u);
          double lam = metric.at(p);
          g.measure[static_cast<std::size_t>((ir * g.nu + iu) * g.nphi + jp)] =
              shell * lam * lam * lam;
        }
      }
    }
  }
  return g;
}

struct ModulusEstimate {
  double value{0.0};
  double p{2.0};
  int iterations{0};
  double max_violation{0.0};
  std::vector<double> energy_history;
  bool converged{true};
};

// Closed-form reference for the ring family Gamma(S(x0,r1), S(x0,r2), A) under
// the flat metric, by 1-D variational reduction of the radial problem:
//   M = omega_{n-1} * (int_{r1}^{r2} t^{-(n-1)/(p-1)} dt)^{1-p}
// with the log branch at p = n.
inline double ring_modulus_reference(int n, double p, double r1, double r2) {
  check_dimension(n);
  if (!(p > 1.0)) throw ParameterRange("ring_modulus_reference: p > 1 required");
  if (!(r1 > 0.0 && r1 < r2)) throw InvalidRadii("ring_modulus_reference: need 0 < r1 < r2");
  double beta = (n - 1) / (p - 1.0);
  double integral;
  if (std::abs(beta - 1.0) < 1e-14) {
    integral = std::log(r2 / r1);
  } else {
    integral = (std::pow(r2, 1.0 - beta) - std::pow(r1, 1.0 - beta)) / (1.0 - beta);
  }
  return unit_sphere_area(n) * std::pow(integral, 1.0 - p);
}

namespace detail {

struct CurveSupport {
  std::vector<int> cell;
  std::vector<double> weight;  // metric length of the curve inside the cell
};

// Cell-crossing accumulation: each polyline segment is cut into substeps
// smaller than half a cell; the substep's metric length goes to the cell
// containing its midpoint. Substeps outside the radial range are dropped.
inline CurveSupport curve_support(const Curve& curve, const DensityGrid& grid,
                                  const MetricField& metric) {
  CurveSupport sup;
  double dr = (grid.r2 - grid.r1) / grid.nr;
  double angscale = (grid.n == 2) ? 2.0 * pi / grid.nphi : 2.0 / grid.nu;
  std::vector<std::pair<int, double>> hits;
  for (std::size_t i = 1; i < curve.vertices.size(); ++i) {
    const Vec& a = curve.vertices[i - 1];
    const Vec& b = curve.vertices[i];
    double seglen = dist(a, b);
    if (seglen == 0.0) continue;
    double rmin = std::max(grid.r1, std::min(dist(a, grid.center), dist(b, grid.center)));
    double target = 0.5 * std::min(dr, rmin * angscale);
    int steps = std::max(1, static_cast<int>(std::ceil(seglen / std::max(target, 1e-300))));
    steps = std::min(steps, 100000);
    double ds = seglen / steps;
    for (int k = 0; k < steps; ++k) {
      double s = (k + 0.5) / steps;
      Vec mid = a + (b - a) * s;
      int c = grid.cell_index(mid);
      if (c < 0) continue;
      hits.emplace_back(c, metric.at(mid) * ds);
    }
  }
  std::sort(hits.begin(), hits.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& [c, w] : hits) {
    if (!sup.cell.empty() && sup.cell.back() == c) {
      sup.weight.back() += w;
    } else {
      sup.cell.push_back(c);
      sup.weight.push_back(w);
    }
  }
  return sup;
}

}  // namespace detail

// Discrete p-modulus estimate: minimize sum(rho^p * dV) subject to
// int_gamma rho ds >= 1 per sampled curve and rho >= 0. Solved by exact dual
// coordinate ascent over the per-curve multipliers in a fixed sweep order;
// the stationarity map rho_c = ((A^T lambda)_c / (p dV_c))^{1/(p-1)} keeps the
// density nonnegative. The returned density is rescaled to exact admissibility,
// so the reported value is a certified upper bound for the discrete problem.
inline ModulusEstimate estimate_modulus(const CurveFamily& family, double p,
                                        const Domain& domain, const MetricField& metric,
                                        int grid_resolution, int max_iter = 2000,
                                        double tol = 1e-3) {
  if (!(p > 1.0)) throw ParameterRange("estimate_modulus: p > 1 required (strict convexity)");
  ModulusEstimate est;
  est.p = p;
  if (family.empty()) return est;  // M_p of the empty family is 0

  DensityGrid grid = make_density_grid(domain, metric, grid_resolution);
  const std::size_t m = family.curves.size();
  std::vector<detail::CurveSupport> sup(m);
  parallel_for(m, [&](std::size_t i) {
    sup[i] = detail::curve_support(family.curves[i], grid, metric);
  });

  bool degenerate = false;
  for (const auto& s : sup) {
    double tw = 0.0;
    for (double w : s.weight) tw += w;
    if (tw <= 0.0) degenerate = true;
  }

  // Union of supports; only these cells can carry positive density.
  std::vector<int> active;
  for (const auto& s : sup) active.insert(active.end(), s.cell.begin(), s.cell.end());
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());

  std::vector<double> sdual(grid.measure.size(), 0.0);  // (A^T lambda)_c
  std::vector<double> lambda(m, 0.0);
  const double e1 = 1.0 / (p - 1.0);
  auto rho_of = [&](int c) {
    double s = sdual[static_cast<std::size_t>(c)];
    if (s <= 0.0) return 0.0;
    double a = s / (p * grid.measure[static_cast<std::size_t>(c)]);
    return (p == 2.0) ? a : std::pow(a, e1);
  };
  auto line_integral = [&](const detail::CurveSupport& s, double delta,
                           const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.cell.size(); ++k) {
      std::size_t c = static_cast<std::size_t>(s.cell[k]);
      double sv = sdual[c] + delta * w[k];
      if (sv <= 0.0) continue;
      double a = sv / (p * grid.measure[c]);
      acc += w[k] * ((p == 2.0) ? a : std::pow(a, e1));
    }
    return acc;
  };

  double value = 0.0;
  double min_ell = 0.0;
  int sweeps = 0;
  for (sweeps = 0; sweeps < max_iter; ++sweeps) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto& s = sup[i];
      if (s.cell.empty()) continue;
      double ell0 = line_integral(s, 0.0, s.weight);
      if (std::abs(ell0 - 1.0) < 1e-15 && lambda[i] >= 0.0) continue;
      if (ell0 >= 1.0 && lambda[i] == 0.0) continue;

      double lo = -lambda[i];
      double hi;
      double delta;
      if (p == 2.0) {
        double slope = 0.0;
        for (std::size_t k = 0; k < s.cell.size(); ++k)
          slope += s.weight[k] * s.weight[k] /
                   (2.0 * grid.measure[static_cast<std::size_t>(s.cell[k])]);
        delta = (slope > 0.0) ? (1.0 - ell0) / slope : 0.0;
        delta = std::max(delta, lo);
      } else {
        // Safeguarded Newton on ell(delta) = 1 (monotone increasing).
        if (ell0 < 1.0) {
          hi = std::max(1.0, lambda[i]);
          while (line_integral(s, hi, s.weight) < 1.0 && hi < 1e200) hi *= 2.0;
          lo = 0.0;
        } else {
          hi = 0.0;
        }
        double a = lo, b = hi;
        delta = 0.5 * (a + b);
        for (int it = 0; it < 60; ++it) {
          double ell = line_integral(s, delta, s.weight);
          if (std::abs(ell - 1.0) < 1e-13) break;
          if (ell < 1.0) a = delta; else b = delta;
          // Newton step using the analytic derivative, clipped to the bracket.
          double deriv = 0.0;
          for (std::size_t k = 0; k < s.cell.size(); ++k) {
            std::size_t c = static_cast<std::size_t>(s.cell[k]);
            double sv = sdual[c] + delta * s.weight[k];
            if (sv <= 0.0) continue;
            double pm = p * grid.measure[c];
            deriv += s.weight[k] * s.weight[k] * e1 * std::pow(sv / pm, e1 - 1.0) / pm;
          }
          double next = (deriv > 0.0 && std::isfinite(deriv))
                            ? delta + (1.0 - ell) / deriv
                            : 0.5 * (a + b);
          delta = (next > a && next < b) ? next : 0.5 * (a + b);
        }
        delta = std::max(delta, -lambda[i]);
      }
      if (delta == 0.0) continue;
      lambda[i] += delta;
      for (std::size_t k = 0; k < s.cell.size(); ++k)
        sdual[static_cast<std::size_t>(s.cell[k])] += delta * s.weight[k];
    }

    // Duality-gap stopping on the exactly admissible rescaled density.
    min_ell = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (sup[i].cell.empty()) { min_ell = 0.0; continue; }
      min_ell = std::min(min_ell, line_integral(sup[i], 0.0, sup[i].weight));
    }
    double energy = 0.0;
    for (int c : active) {
      double r = rho_of(c);
      energy += grid.measure[static_cast<std::size_t>(c)] * std::pow(r, p);
    }
    double dual = 0.0;
    for (double l : lambda) dual += l;
    dual -= (p - 1.0) * energy;
    double primal = (min_ell > 0.0) ? energy / std::pow(min_ell, p)
                                    : std::numeric_limits<double>::infinity();
    est.energy_history.push_back(primal);
    if (min_ell > 0.0 && primal - dual <= std::max(1e-12, 1e-8 * primal)) {
      ++sweeps;
      value = primal;
      break;
    }
    value = primal;
  }

  est.iterations = sweeps;
  est.max_violation = std::max(0.0, 1.0 - min_ell);
  est.converged = !degenerate && std::isfinite(value) && est.max_violation <= tol;
  est.value = std::isfinite(value) ? value : 0.0;

  // Store the admissible density for inspection.
  if (min_ell > 0.0) {
    for (int c : active)
      grid.rho[static_cast<std::size_t>(c)] = rho_of(c) / min_ell;
  }
  return est;
}

// Vertex-wise image f(Gamma). With refine=true, segments are subdivided before
// mapping until the image midpoint deviates from the chord midpoint by less
// than a relative tolerance, to control chord error under nonlinear maps.
inline CurveFamily image_family(const CurveFamily& family, const MappingSpec& map,
                                bool refine = false, double chord_tol = 1e-3) {
  CurveFamily out;
  out.kind = FamilyKind::image;
  out.curves.reserve(family.curves.size());
  auto eval = [&](const Vec& v) {
    if (!map.evaluable(v))
      throw EvaluationDomain("image_family: vertex outside the map's domain");
    return map.eval(v);
  };
  for (const auto& curve : family.curves) {
    Curve img;
    img.source_family = curve.source_family;
    if (curve.vertices.empty()) { out.curves.push_back(img); continue; }
    img.vertices.push_back(eval(curve.vertices.front()));
    for (std::size_t i = 1; i < curve.vertices.size(); ++i) {
      const Vec a = curve.vertices[i - 1];
      const Vec b = curve.vertices[i];
      if (refine) {
        // Depth-limited midpoint refinement of the chart segment [a, b].
        std::function<void(const Vec&, const Vec&, const Vec&, const Vec&, int)> rec =
            [&](const Vec& x, const Vec& y, const Vec& fx, const Vec& fy, int depth) {
              Vec mchart = (x + y) * 0.5;
              Vec fm = eval(mchart);
              Vec chord_mid = (fx + fy) * 0.5;
              double scale = std::max(dist(fx, fy), 1e-12);
              if (depth < 8 && dist(fm, chord_mid) > chord_tol * scale) {
                rec(x, mchart, fx, fm, depth + 1);
                img.vertices.push_back(fm);
                rec(mchart, y, fm, fy, depth + 1);
              } else {
                img.vertices.push_back(fm);
              }
            };
        Vec fa = img.vertices.back();
        Vec fb = eval(b);
        rec(a, b, fa, fb, 0);
        img.vertices.push_back(fb);
      } else {
        img.vertices.push_back(eval(b));
      }
    }
    // Drop exact duplicates introduced by degenerate image segments.
    auto last = std::unique(img.vertices.begin(), img.vertices.end());
    img.vertices.erase(last, img.vertices.end());
    out.curves.push_back(std::move(img));
  }
  return out;
}

struct RingInequalityReport {
  double lhs{0.0};
  double rhs{0.0};
  bool holds{false};
  ModulusEstimate lhs_detail;
};

// Numeric check of the ring inequality
//   M_p(f(Gamma(S1,S2,A))) <= int_A Q(x) eta^p(|x-x0|) dv(x)
// for an eta normalized by int_{r1}^{r2} eta >= 1. The 5% slack on the
// comparison absorbs discretization error on both sides.
inline RingInequalityReport check_ring_inequality(
    const MappingSpec& map, const Vec& x0, double r1, double r2, double p,
    const std::function<double(const Vec&)>& Q,
    const std::function<double(double)>& eta, int samples = 400, int grid = 256) {
  if (!(r1 > 0.0 && r1 < r2)) throw InvalidRadii("check_ring_inequality: need 0 < r1 < r2");
  int n = x0.n;
  check_dimension(n);

  // eta normalization by composite Simpson quadrature.
  {
    const int N = 4096;  // even
    double h = (r2 - r1) / N;
    double acc = eta(r1) + eta(r2);
    for (int i = 1; i < N; ++i) acc += eta(r1 + i * h) * ((i % 2) ? 4.0 : 2.0);
    acc *= h / 3.0;
    if (!(acc >= 1.0 - 1e-6))
      throw NotAdmissible("check_ring_inequality: int eta < 1");
  }

  CurveFamily ring = sample_ring_curves(x0, r1, r2, samples, 0.0, 0);
  CurveFamily img = image_family(ring, map, /*refine=*/true);

  Vec c = map.evaluable(x0) ? map.eval(x0) : x0;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (const auto& curve : img.curves)
    for (const auto& v : curve.vertices) {
      double d = dist(v, c);
      rmin = std::min(rmin, d);
      rmax = std::max(rmax, d);
    }
  if (!(rmin > 0.0) || !(rmax > rmin))
    throw NumericalError("/map", "check_ring_inequality: degenerate image ring");

  Domain img_dom = make_domain(DomainKind::annulus, c, rmin * (1.0 - 1e-9),
                               rmax * (1.0 + 1e-9));
  MetricField flat = MetricField::flat(n);
  RingInequalityReport rep;
  rep.lhs_detail = estimate_modulus(img, p, img_dom, flat, grid);
  rep.lhs = rep.lhs_detail.value;

  Domain ann = make_domain(DomainKind::annulus, x0, r1, r2);
  rep.rhs = volume_integrate(ann, flat,
                             [&](const Vec& x) {
                               double t = dist(x, x0);
                               return Q(x) * std::pow(eta(t), p);
                             },
                             grid);
  rep.holds = rep.lhs <= rep.rhs * 1.05;
  return rep;
}

}  // namespace modlab
