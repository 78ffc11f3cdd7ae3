#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "modlab/errors.hpp"
#include "modlab/vec.hpp"

namespace modlab {

// Conformal metric g_ij = lambda(x)^2 * delta_ij on a single chart of R^n.
// lambda == 1 is the flat metric.
struct MetricField {
  int n{2};
  std::function<double(const Vec&)> lambda;

  static MetricField flat(int dim) {
    return MetricField{dim, [](const Vec&) { return 1.0; }};
  }

  static MetricField conformal(int dim, std::function<double(const Vec&)> lam) {
    return MetricField{dim, std::move(lam)};
  }

  double at(const Vec& x) const { return lambda ? lambda(x) : 1.0; }
};

enum class DomainKind { ball, annulus, punctured_ball };

// Spherical shell A(x0, r1, r2) = {r1 < |x - x0| < r2}; ball when r1 = 0.
struct Domain {
  DomainKind kind{DomainKind::ball};
  Vec center;
  double r1{0.0};
  double r2{1.0};

  int dim() const { return center.n; }

  bool contains(const Vec& p) const {
    double d = dist(p, center);
    switch (kind) {
      case DomainKind::ball: return d < r2;
      case DomainKind::annulus: return d > r1 && d < r2;
      case DomainKind::punctured_ball: return d > 0.0 && d < r2;
    }
    return false;
  }
};

struct Curve {
  std::vector<Vec> vertices;
  std::string source_family;

  bool valid() const {
    if (vertices.size() < 2) return false;
    for (std::size_t i = 1; i < vertices.size(); ++i)
      if (dist(vertices[i], vertices[i - 1]) == 0.0) return false;
    return true;
  }
};

enum class FamilyKind { ring_radial, ring_perturbed, image };

struct CurveFamily {
  std::vector<Curve> curves;
  FamilyKind kind{FamilyKind::ring_radial};

  bool empty() const { return curves.empty(); }
};

inline constexpr double pi = std::numbers::pi;

// Surface area of the unit sphere S^{n-1}.
inline double unit_sphere_area(int n) {
  if (n == 2) return 2.0 * pi;
  if (n == 3) return 4.0 * pi;
  throw UnsupportedDimension("unit_sphere_area: n must be 2 or 3");
}

inline void check_dimension(int n) {
  if (n != 2 && n != 3) throw UnsupportedDimension("dimension must be 2 or 3");
}

inline Domain make_domain(DomainKind kind, const Vec& x0, double r1, double r2) {
  check_dimension(x0.n);
  if (kind == DomainKind::ball || kind == DomainKind::punctured_ball) r1 = 0.0;
  if (!(r1 >= 0.0) || !(r1 < r2))
    throw InvalidRadii("make_domain: need 0 <= r1 < r2");
  if (kind == DomainKind::annulus && !(r1 > 0.0))
    throw InvalidRadii("make_domain: annulus needs r1 > 0");
  return Domain{kind, x0, r1, r2};
}

// Quadrature nodes and weights for the metric area of S(x0, r).
// n=2: uniform angles, exact circumference for constant lambda.
// n=3: midpoint product grid in (cos(theta), phi); weights sum to the exact
// Euclidean sphere area for lambda == 1 since the u-grid integrates du exactly.
inline std::vector<std::pair<Vec, double>> sphere_quadrature(const Vec& x0, double r,
                                                             const MetricField& metric,
                                                             int resolution) {
  check_dimension(x0.n);
  if (metric.n != x0.n) throw UnsupportedDimension("sphere_quadrature: metric dimension mismatch");
  if (!(r > 0.0)) throw InvalidRadii("sphere_quadrature: r > 0 required");
  if (resolution < 8) throw Error("sphere_quadrature: resolution >= 8 required");

  std::vector<std::pair<Vec, double>> nodes;
  if (x0.n == 2) {
    nodes.reserve(static_cast<std::size_t>(resolution));
    double dtheta = 2.0 * pi / resolution;
    for (int i = 0; i < resolution; ++i) {
      double th = (i + 0.5) * dtheta;
      Vec p = x0 + Vec(r * std::cos(th), r * std::sin(th));
      // 1-D area element scales by lambda^(n-1) = lambda.
      nodes.emplace_back(p, r * dtheta * metric.at(p));
    }
  } else {
    int nu = resolution;
    int nphi = 2 * resolution;
    nodes.reserve(static_cast<std::size_t>(nu) * nphi);
    double du = 2.0 / nu;
    double dphi = 2.0 * pi / nphi;
    for (int i = 0; i < nu; ++i) {
      double u = -1.0 + (i + 0.5) * du;
      double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int j = 0; j < nphi; ++j) {
        double ph = (j + 0.5) * dphi;
        Vec p = x0 + Vec(r * s * std::cos(ph), r * s * std::sin(ph), r * u);
        double lam = metric.at(p);
        nodes.emplace_back(p, r * r * du * dphi * lam * lam);
      }
    }
  }
  return nodes;
}

namespace detail {

// Quasi-uniform deterministic direction set on S^2 (Fibonacci lattice).
inline Vec fibonacci_direction(int i, int count) {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  double u = (count == 1) ? 0.0 : -1.0 + 2.0 * (i + 0.5) / count;
  double s = std::sqrt(std::max(0.0, 1.0 - u * u));
  double phi = 2.0 * pi * std::fmod(i / golden, 1.0);
  return Vec(s * std::cos(phi), s * std::sin(phi), u);
}

inline Vec any_orthogonal(const Vec& u) {
  Vec w = (std::abs(u[0]) < 0.9) ? Vec(1.0, 0.0, 0.0) : Vec(0.0, 1.0, 0.0);
  w.n = u.n;
  Vec v = w - u * u.dot(w);
  return v.normalized();
}

}  // namespace detail

// Finite stand-in for the family of curves joining S(x0,r1) and S(x0,r2).
// jitter = 0 gives exact radial segments; otherwise each curve is a radial
// sweep with a smooth angular perturbation. Endpoint radii are exact by
// construction, so endpoints lie on the boundary spheres.
inline CurveFamily sample_ring_curves(const Vec& x0, double r1, double r2, int count,
                                      double jitter, std::uint64_t seed) {
  check_dimension(x0.n);
  if (!(r1 > 0.0) || !(r1 < r2)) throw InvalidRadii("sample_ring_curves: need 0 < r1 < r2");
  if (count < 0) throw Error("sample_ring_curves: count >= 0 required");
  if (!(jitter >= 0.0 && jitter < 0.5)) throw Error("sample_ring_curves: need 0 <= jitter < 0.5");

  CurveFamily fam;
  fam.kind = (jitter == 0.0) ? FamilyKind::ring_radial : FamilyKind::ring_perturbed;
  if (count == 0) return fam;  // empty family is allowed; its modulus is 0

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int segments = 64;
  fam.curves.reserve(static_cast<std::size_t>(count));

  for (int c = 0; c < count; ++c) {
    double phase = 2.0 * pi * unif(rng);
    double amp = jitter * pi * unif(rng);
    Curve curve;
    curve.source_family = "ring";
    curve.vertices.reserve(segments + 1);
    if (x0.n == 2) {
      double theta0 = 2.0 * pi * c / count;
      for (int i = 0; i <= segments; ++i) {
        double s = static_cast<double>(i) / segments;
        double r = r1 + s * (r2 - r1);
        double th = theta0 + amp * std::sin(pi * s + phase);
        curve.vertices.push_back(x0 + Vec(r * std::cos(th), r * std::sin(th)));
      }
    } else {
      Vec u0 = detail::fibonacci_direction(c, count);
      Vec w = detail::any_orthogonal(u0);
      for (int i = 0; i <= segments; ++i) {
        double s = static_cast<double>(i) / segments;
        double r = r1 + s * (r2 - r1);
        double ang = amp * std::sin(pi * s + phase);
        Vec u = u0 * std::cos(ang) + w * std::sin(ang);
        u.n = 3;
        curve.vertices.push_back(x0 + r * u);
      }
    }
    fam.curves.push_back(std::move(curve));
  }
  return fam;
}

// Metric length by the midpoint rule: sum of lambda(segment midpoint)*|dx|.
inline double curve_length(const Curve& curve, const MetricField& metric) {
  double total = 0.0;
  for (std::size_t i = 1; i < curve.vertices.size(); ++i) {
    const Vec& a = curve.vertices[i - 1];
    const Vec& b = curve.vertices[i];
    Vec mid = (a + b) * 0.5;
    total += metric.at(mid) * dist(a, b);
  }
  return total;
}

namespace detail {

struct AngularGrid {
  std::vector<Vec> dirs;      // unit directions
  std::vector<double> domega; // solid-angle weights
};

inline AngularGrid angular_grid(int n, int resolution) {
  AngularGrid g;
  if (n == 2) {
    int na = std::max(16, resolution);
    double dtheta = 2.0 * pi / na;
    for (int i = 0; i < na; ++i) {
      double th = (i + 0.5) * dtheta;
      g.dirs.push_back(Vec(std::cos(th), std::sin(th)));
      g.domega.push_back(dtheta);
    }
  } else {
    int nu = std::clamp(resolution / 8, 8, 64);
    int nphi = 2 * nu;
    double du = 2.0 / nu;
    double dphi = 2.0 * pi / nphi;
    for (int i = 0; i < nu; ++i) {
      double u = -1.0 + (i + 0.5) * du;
      double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int j = 0; j < nphi; ++j) {
        double ph = (j + 0.5) * dphi;
        g.dirs.push_back(Vec(s * std::cos(ph), s * std::sin(ph), u));
        g.domega.push_back(du * dphi);
      }
    }
  }
  return g;
}

}  // namespace detail

// Tensor-product polar quadrature centered at the domain center; the radial
// midpoint nodes times the r^{n-1} weight absorb a point singularity at x0.
inline double volume_integrate(const Domain& domain, const MetricField& metric,
                               const std::function<double(const Vec&)>& field,
                               int resolution) {
  int n = domain.dim();
  check_dimension(n);
  if (resolution < 8) throw Error("volume_integrate: resolution >= 8 required");
  double r1 = domain.r1, r2 = domain.r2;

  detail::AngularGrid ang = detail::angular_grid(n, resolution);
  int nr = resolution;
  double dr = (r2 - r1) / nr;
  double total = 0.0;
  for (int i = 0; i < nr; ++i) {
    double r = r1 + (i + 0.5) * dr;
    double rpow = (n == 2) ? r : r * r;
    double shell = 0.0;
    for (std::size_t j = 0; j < ang.dirs.size(); ++j) {
      Vec p = domain.center + r * ang.dirs[j];
      double lam = metric.at(p);
      double f = field(p);
      if (!std::isfinite(f) || !std::isfinite(lam))
        throw NonFiniteIntegrand("volume_integrate: non-finite integrand at |x-x0|=" + std::to_string(r));
      double lamn = (n == 2) ? lam * lam : lam * lam * lam;
      shell += f * lamn * ang.domega[j];
    }
    total += shell * rpow * dr;
  }
  return total;
}

}  // namespace modlab
