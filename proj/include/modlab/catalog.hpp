#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "modlab/errors.hpp"
#include "modlab/geometry.hpp"
#include "modlab/mapping.hpp"

namespace modlab {

enum class LimitSetKind { none, point, sphere };

struct LimitSet {
  LimitSetKind kind{LimitSetKind::none};
  double radius{0.0};  // sphere case
};

namespace detail {

// Cumulative integral I(r) = int_r^1 g(t) dt cached on a uniform grid in
// u = log(1/t) and evaluated by cubic Hermite interpolation; the derivative
// dI/du = g(t) * t is known exactly, so the interpolant is C^1 and monotone.
// The grid reaches t = 1e-200 so that I(0+) (and with it the limit radius of
// the map) is resolved well below the 2% probe tolerance even for slowly
// converging log-type tails.
class CachedIntegral {
 public:
  CachedIntegral(std::function<double(double)> g, int nodes = 32768, double umax = 460.0)
      : g_(std::move(g)), umax_(umax), nodes_(nodes) {
    du_ = umax_ / (nodes_ - 1);
    value_.resize(static_cast<std::size_t>(nodes_));
    deriv_.resize(static_cast<std::size_t>(nodes_));
    value_[0] = 0.0;
    deriv_[0] = gu(0.0);
    for (int i = 1; i < nodes_; ++i) {
      double u0 = (i - 1) * du_;
      double u1 = i * du_;
      double um = 0.5 * (u0 + u1);
      double step = (du_ / 6.0) * (gu(u0) + 4.0 * gu(um) + gu(u1));  // Simpson
      if (!std::isfinite(step)) throw QuadratureFailure("CachedIntegral: non-finite integrand");
      value_[static_cast<std::size_t>(i)] = value_[static_cast<std::size_t>(i - 1)] + step;
      deriv_[static_cast<std::size_t>(i)] = gu(u1);
    }
  }

  // I(r) for r in (exp(-umax), 1].
  double at(double r) const {
    if (!(r > 0.0)) throw NearSingularity("CachedIntegral: r > 0 required");
    if (r >= 1.0) return 0.0;
    double u = std::log(1.0 / r);
    if (u >= umax_) return value_.back();
    int i = std::min(static_cast<int>(u / du_), nodes_ - 2);
    double t = (u - i * du_) / du_;
    double y0 = value_[static_cast<std::size_t>(i)];
    double y1 = value_[static_cast<std::size_t>(i + 1)];
    double d0 = deriv_[static_cast<std::size_t>(i)] * du_;
    double d1 = deriv_[static_cast<std::size_t>(i + 1)] * du_;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    return h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
  }

  double total() const { return value_.back(); }

  // Heuristic divergence guard: the tail increment over the deepest decade
  // should be negligible against the total when the improper integral is
  // finite.
  bool tail_negligible() const {
    double ln10 = std::log(10.0);
    double u_hi = umax_;
    double u_lo = umax_ - ln10;
    double tail = at_u(u_hi) - at_u(u_lo);
    return tail <= 1e-4 * std::max(total(), 1e-300);
  }

 private:
  double gu(double u) const { return g_(std::exp(-u)) * std::exp(-u); }
  double at_u(double u) const { return at(std::exp(-u)); }

  std::function<double(double)> g_;
  double umax_;
  int nodes_;
  double du_;
  std::vector<double> value_;
  std::vector<double> deriv_;
};

inline void check_q0(const std::function<double(double)>& q0) {
  for (int k = 1; k <= 64; ++k) {
    double t = std::pow(10.0, -k / 8.0);
    double v = q0(t);
    if (!std::isfinite(v)) throw QuadratureFailure("catalog: q0 is non-finite on (0,1)");
    if (v < 1.0 - 1e-9) throw ParameterRange("catalog: q0 >= 1 required on (0,1)");
  }
}

}  // namespace detail

// An explicit example mapping with exact stretch data; the exact dilatations
// are computed from the principal stretches, which keeps the oracle free of
// any unnamed normalization constant.
struct CatalogEntry {
  std::string name;
  std::map<std::string, double> params;
  MappingSpec map;
  std::function<double(const Vec&, double)> exact_inner;  // K_{I,p}(x)
  std::function<double(const Vec&, double)> exact_outer;  // K_{O,p}(x)
  LimitSet limit_set;
  std::function<double(double)> q0;  // counterexample weight, when applicable
};

inline std::vector<std::string> catalog_names() {
  return {"twisting",        "planar_power",     "radial_power",
          "annulus_blowup",  "counterexample_n", "counterexample_alpha"};
}

namespace detail {

// K_{I,p} and K_{O,p} from a stretch vector {lambda_tau x (n-1), lambda_r}.
inline double inner_from_stretches(double lt, double lr, int n, double p) {
  double jac = std::pow(lt, n - 1) * lr;
  double lmin = std::min(lt, lr);
  if (jac != 0.0 && lmin > 0.0) return jac / std::pow(lmin, p);
  if (std::max(lt, lr) == 0.0) return 1.0;
  return std::numeric_limits<double>::infinity();
}

inline double outer_from_stretches(double lt, double lr, int n, double p) {
  double jac = std::pow(lt, n - 1) * lr;
  double lmax = std::max(lt, lr);
  if (jac != 0.0) return std::pow(lmax, p) / jac;
  if (lmax == 0.0) return 1.0;
  return std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline CatalogEntry make_catalog_map(const std::string& name,
                                     std::map<std::string, double> params = {},
                                     std::function<double(double)> q0 = nullptr) {
  auto param = [&](const std::string& key, double def) {
    auto it = params.find(key);
    return it == params.end() ? def : it->second;
  };

  CatalogEntry entry;
  entry.name = name;

  if (name == "twisting") {
    int m = static_cast<int>(param("m", 2.0));
    if (m < 1) throw ParameterRange("twisting: m >= 1 required");
    if (params.count("n") && param("n", 3.0) != 3.0)
      throw ParameterRange("twisting: implemented for n = 3 only");
    entry.params = {{"m", static_cast<double>(m)}, {"n", 3.0}};
    MappingSpec spec;
    spec.kind = MapKind::catalog;
    spec.n = 3;
    spec.domain = make_domain(DomainKind::punctured_ball, zero_vec(3), 0.0, 1.0);
    spec.punctures = {zero_vec(3)};
    spec.multiplicity = m;
    spec.evaluator = [m](const Vec& x) {
      double r = std::hypot(x[0], x[1]);
      double phi = std::atan2(x[1], x[0]);
      return Vec(r * std::cos(m * phi), r * std::sin(m * phi), x[2]);
    };
    spec.exact_jacobian = [m](const Vec& x) {
      double phi = std::atan2(x[1], x[0]);
      double c = std::cos(phi), s = std::sin(phi);
      double cm = std::cos(m * phi), sm = std::sin(m * phi);
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, 3);
      // d f = e'_r e_r^T + m e'_phi e_phi^T + e_z e_z^T
      J(0, 0) = cm * c + m * sm * s;
      J(0, 1) = cm * s - m * sm * c;
      J(1, 0) = sm * c - m * cm * s;
      J(1, 1) = sm * s + m * cm * c;
      J(2, 2) = 1.0;
      return J;
    };
    entry.map = std::move(spec);
    entry.exact_inner = [m](const Vec&, double p) {
      return detail::inner_from_stretches(static_cast<double>(m), 1.0, 2, p);
    };
    entry.exact_outer = [m](const Vec&, double p) {
      // stretches {1, 1, m}: K_O = m^p / m
      return std::pow(static_cast<double>(m), p) / m;
    };
    entry.limit_set = {LimitSetKind::point, 0.0};
    return entry;
  }

  if (name == "planar_power") {
    int m = static_cast<int>(param("m", 2.0));
    if (m < 1) throw ParameterRange("planar_power: m >= 1 required");
    if (params.count("n") && param("n", 2.0) != 2.0)
      throw ParameterRange("planar_power: implemented for n = 2 only");
    entry.params = {{"m", static_cast<double>(m)}, {"n", 2.0}};
    MappingSpec spec;
    spec.kind = MapKind::catalog;
    spec.n = 2;
    spec.domain = make_domain(DomainKind::punctured_ball, zero_vec(2), 0.0, 1.0);
    spec.punctures = {zero_vec(2)};
    spec.multiplicity = m;
    spec.evaluator = [m](const Vec& z) {
      double r = std::hypot(z[0], z[1]);
      double th = std::atan2(z[1], z[0]);
      double rm = std::pow(r, m);
      return Vec(rm * std::cos(m * th), rm * std::sin(m * th));
    };
    spec.exact_jacobian = [m](const Vec& z) {
      // f'(z) = m z^{m-1} acting as a conformal 2x2 block
      double r = std::hypot(z[0], z[1]);
      double th = std::atan2(z[1], z[0]);
      double mod = m * std::pow(r, m - 1);
      double a = mod * std::cos((m - 1) * th);
      double b = mod * std::sin((m - 1) * th);
      Eigen::MatrixXd J(2, 2);
      J << a, -b, b, a;
      return J;
    };
    entry.map = std::move(spec);
    entry.exact_inner = [m](const Vec& z, double p) {
      double mod = m * std::pow(std::hypot(z[0], z[1]), m - 1);
      return detail::inner_from_stretches(mod, mod, 2, p);
    };
    entry.exact_outer = [m](const Vec& z, double p) {
      double mod = m * std::pow(std::hypot(z[0], z[1]), m - 1);
      return detail::outer_from_stretches(mod, mod, 2, p);
    };
    entry.limit_set = {LimitSetKind::point, 0.0};
    return entry;
  }

  int n = static_cast<int>(param("n", (name == "annulus_blowup") ? 3.0 : 2.0));
  check_dimension(n);
  Domain dom = make_domain(DomainKind::punctured_ball, zero_vec(n), 0.0, 1.0);

  if (name == "radial_power") {
    double alpha = param("alpha", 0.5);
    if (!(alpha > 0.0)) throw ParameterRange("radial_power: alpha > 0 required");
    entry.params = {{"alpha", alpha}, {"n", static_cast<double>(n)}};
    entry.map = make_radial_map(
        dom, [alpha](double r) { return std::pow(r, alpha); },
        [alpha](double r) { return alpha * std::pow(r, alpha - 1.0); });
    entry.map.kind = MapKind::catalog;
    entry.exact_inner = [alpha, n](const Vec& x, double p) {
      double r = x.norm();
      double lt = std::pow(r, alpha - 1.0);
      return detail::inner_from_stretches(lt, alpha * lt, n, p);
    };
    entry.exact_outer = [alpha, n](const Vec& x, double p) {
      double r = x.norm();
      double lt = std::pow(r, alpha - 1.0);
      return detail::outer_from_stretches(lt, alpha * lt, n, p);
    };
    entry.limit_set = {LimitSetKind::point, 0.0};
    return entry;
  }

  if (name == "annulus_blowup") {
    double alpha = param("alpha", 0.5);
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterRange("annulus_blowup: alpha in (0,1) required");
    entry.params = {{"alpha", alpha}, {"n", static_cast<double>(n)}};
    entry.map = make_radial_map(
        dom, [alpha](double r) { return 1.0 + std::pow(r, alpha); },
        [alpha](double r) { return alpha * std::pow(r, alpha - 1.0); });
    entry.map.kind = MapKind::catalog;
    entry.exact_inner = [alpha, n](const Vec& x, double p) {
      double r = x.norm();
      double lt = (1.0 + std::pow(r, alpha)) / r;
      double lr = alpha * std::pow(r, alpha - 1.0);
      return detail::inner_from_stretches(lt, lr, n, p);
    };
    entry.exact_outer = [alpha, n](const Vec& x, double p) {
      double r = x.norm();
      double lt = (1.0 + std::pow(r, alpha)) / r;
      double lr = alpha * std::pow(r, alpha - 1.0);
      return detail::outer_from_stretches(lt, lr, n, p);
    };
    entry.limit_set = {LimitSetKind::sphere, 1.0};
    return entry;
  }

  if (name == "counterexample_n") {
    if (!q0) q0 = [](double t) { double L = std::log(std::exp(1.0) / t); return L * L; };
    detail::check_q0(q0);
    entry.params = {{"n", static_cast<double>(n)}};
    entry.q0 = q0;
    double qpow = 1.0 / (n - 1);
    auto cache = std::make_shared<detail::CachedIntegral>(
        [q0, qpow](double t) { return 1.0 / (t * std::pow(q0(t), qpow)); });
    if (!cache->tail_negligible())
      throw ParameterRange("counterexample_n: criterion integral appears divergent");
    auto rho = [cache](double r) { return std::exp(-cache->at(r)); };
    auto drho = [cache, q0, qpow](double r) {
      return std::exp(-cache->at(r)) / (r * std::pow(q0(r), qpow));
    };
    entry.map = make_radial_map(dom, rho, drho);
    entry.map.kind = MapKind::catalog;
    entry.exact_inner = [rho, q0, qpow, n](const Vec& x, double p) {
      double r = x.norm();
      double lt = rho(r) / r;
      double lr = lt / std::pow(q0(r), qpow);
      return detail::inner_from_stretches(lt, lr, n, p);
    };
    entry.exact_outer = [rho, q0, qpow, n](const Vec& x, double p) {
      double r = x.norm();
      double lt = rho(r) / r;
      double lr = lt / std::pow(q0(r), qpow);
      return detail::outer_from_stretches(lt, lr, n, p);
    };
    entry.limit_set = {LimitSetKind::sphere, std::exp(-cache->total())};
    return entry;
  }

  if (name == "counterexample_alpha") {
    double alpha = param("alpha", n - 0.5);
    if (!(alpha > n - 1 && alpha < n))
      throw ParameterRange("counterexample_alpha: alpha in (n-1, n) required");
    if (!q0) {
      double gamma = n - alpha + 0.25;
      q0 = [gamma](double t) { return std::pow(t, -gamma); };
    }
    detail::check_q0(q0);
    entry.params = {{"alpha", alpha}, {"n", static_cast<double>(n)}};
    entry.q0 = q0;
    double rexp = (n - 1.0) / (alpha - 1.0);
    double qexp = 1.0 / (alpha - 1.0);
    double c = (n - alpha) / (alpha - 1.0);
    double beta = (alpha - 1.0) / (alpha - n);
    auto g = [q0, rexp, qexp](double t) {
      // In log space: the factors can over/underflow separately even when
      // the product is moderate (q0 >= 1, so its log is safe).
      return std::exp(-rexp * std::log(t) - qexp * std::log(q0(t)));
    };
    auto cache = std::make_shared<detail::CachedIntegral>(g);
    if (!cache->tail_negligible())
      throw ParameterRange("counterexample_alpha: criterion integral appears divergent");
    auto rho = [cache, c, beta](double r) {
      return std::pow(1.0 + c * cache->at(r), beta);
    };
    auto drho = [cache, g, c, beta, n, alpha](double r) {
      // rho' = g(r) * (1 + c I)^{(n-1)/(alpha-n)}
      return g(r) * std::pow(1.0 + c * cache->at(r), (n - 1.0) / (alpha - n));
    };
    entry.map = make_radial_map(dom, rho, drho);
    entry.map.kind = MapKind::catalog;
    entry.exact_inner = [rho, drho, n](const Vec& x, double p) {
      double r = x.norm();
      return detail::inner_from_stretches(rho(r) / r, drho(r), n, p);
    };
    entry.exact_outer = [rho, drho, n](const Vec& x, double p) {
      double r = x.norm();
      return detail::outer_from_stretches(rho(r) / r, drho(r), n, p);
    };
    entry.limit_set = {LimitSetKind::sphere, std::pow(1.0 + c * cache->total(), beta)};
    return entry;
  }

  throw ParameterRange("make_catalog_map: unknown entry '" + name + "'");
}

// Closed-form K_{I,p} at x via the entry's exact stretch data.
inline double exact_dilatation(const CatalogEntry& entry, const Vec& x, double p) {
  double guard = 1e-10 * entry.map.domain.r2;
  if (entry.map.distance_to_punctures(x) <= guard)
    throw NearSingularity("exact_dilatation: x too close to a puncture");
  return entry.exact_inner(x, p);
}

struct LimitProbeReport {
  std::vector<std::pair<double, double>> separations;  // (radius, max pairwise image distance)
  double extrapolated{0.0};
  bool descriptor_confirmed{false};
};

// Numerical witness for the boundary behavior at the puncture: evaluates the
// map along rays at each ladder radius and tracks the maximal pairwise image
// separation. Raw separations of the log-profile counterexamples approach
// their limit only like 1/log(1/r), so the 2% sphere check also consults a
// linear extrapolation of the last three separations in 1/log(1/r).
inline LimitProbeReport probe_limit_set(const CatalogEntry& entry, int directions,
                                        const std::vector<double>& radii_ladder) {
  if (entry.map.punctures.empty())
    throw Error("probe_limit_set: entry has no declared puncture");
  if (directions < 2) throw ParameterRange("probe_limit_set: directions >= 2 required");
  if (radii_ladder.empty()) throw ParameterRange("probe_limit_set: empty radii ladder");

  int n = entry.map.n;
  const Vec origin = entry.map.punctures.front();
  std::vector<Vec> dirs;
  if (n == 2) {
    for (int i = 0; i < directions; ++i) {
      double th = 2.0 * pi * i / directions;
      dirs.push_back(Vec(std::cos(th), std::sin(th)));
    }
  } else {
    int half = std::max(1, directions / 2);
    for (int i = 0; i < half; ++i) {
      Vec u = detail::fibonacci_direction(i, half);
      dirs.push_back(u);
      dirs.push_back(u * -1.0);  // antipodes realize the full diameter
    }
  }

  LimitProbeReport rep;
  for (double r : radii_ladder) {
    std::vector<Vec> images;
    images.reserve(dirs.size());
    for (const auto& u : dirs) images.push_back(entry.map.eval(origin + r * u));
    double sep = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i)
      for (std::size_t j = i + 1; j < images.size(); ++j)
        sep = std::max(sep, dist(images[i], images[j]));
    rep.separations.emplace_back(r, sep);
  }

  std::size_t m = rep.separations.size();
  rep.extrapolated = rep.separations.back().second;
  if (m >= 3) {
    // Least-squares line through the last three (1/log(1/r), sep) points.
    double sw = 0, sww = 0, sy = 0, swy = 0;
    for (std::size_t i = m - 3; i < m; ++i) {
      double w = 1.0 / std::log(1.0 / rep.separations[i].first);
      double y = rep.separations[i].second;
      sw += w; sww += w * w; sy += y; swy += w * y;
    }
    double denom = 3.0 * sww - sw * sw;
    if (std::abs(denom) > 0.0)
      rep.extrapolated = (sy * sww - sw * swy) / denom;
  }

  double last = rep.separations.back().second;
  if (entry.limit_set.kind == LimitSetKind::sphere) {
    double target = 2.0 * entry.limit_set.radius;
    bool stabilized = m < 2 || std::abs(last - rep.separations[m - 2].second) <= 0.02 * std::max(last, 1e-300);
    double dev = std::min(std::abs(last - target), std::abs(rep.extrapolated - target));
    rep.descriptor_confirmed = stabilized && dev <= 0.02 * target;
  } else if (entry.limit_set.kind == LimitSetKind::point) {
    rep.descriptor_confirmed = last < 1e-3;
  }
  return rep;
}

}  // namespace modlab
