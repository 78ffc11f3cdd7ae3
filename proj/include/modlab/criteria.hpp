#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "modlab/errors.hpp"
#include "modlab/geometry.hpp"

namespace modlab {

enum class VerdictKind { FMO, NOT_FMO, DIVERGES, CONVERGES, INCONCLUSIVE };

inline const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::FMO: return "FMO";
    case VerdictKind::NOT_FMO: return "NOT_FMO";
    case VerdictKind::DIVERGES: return "DIVERGES";
    case VerdictKind::CONVERGES: return "CONVERGES";
    case VerdictKind::INCONCLUSIVE: return "INCONCLUSIVE";
  }
  return "?";
}

// Outcome of an asymptotic test together with its numeric evidence trail
// (scale, statistic) and the fitted exponent the decision rule used.
struct CriterionVerdict {
  VerdictKind kind{VerdictKind::INCONCLUSIVE};
  std::vector<std::pair<double, double>> evidence;
  double fitted_exponent{0.0};
  double growth_threshold{0.05};
  double cauchy_threshold{1e-4};
};

// q_{x0}(r) = r^{1-n} * int_{S(x0,r)} Q dA; the normalized variant divides
// additionally by the unit-sphere area omega_{n-1}.
inline double spherical_mean_q(const std::function<double(const Vec&)>& Q, const Vec& x0,
                               double r, const MetricField& metric, int resolution,
                               bool normalized = false) {
  int n = x0.n;
  check_dimension(n);
  auto nodes = sphere_quadrature(x0, r, metric, resolution);
  double acc = 0.0;
  for (const auto& [p, w] : nodes) {
    double v = Q(p);
    if (!std::isfinite(v)) throw NonFiniteIntegrand("spherical_mean_q: non-finite Q on sphere");
    acc += v * w;
  }
  double mean = acc / std::pow(r, n - 1);
  if (normalized) mean /= unit_sphere_area(n);
  return mean;
}

// ||Q||_s(r) = (int_{S(x0,r)} Q^s dA)^{1/s} over the full sphere.
inline double sphere_lsnorm(const std::function<double(const Vec&)>& Q, const Vec& x0,
                            double r, double s, int resolution) {
  if (!(s >= 1.0)) throw ParameterRange("sphere_lsnorm: s >= 1 required");
  int n = x0.n;
  check_dimension(n);
  MetricField flat = MetricField::flat(n);
  auto nodes = sphere_quadrature(x0, r, flat, resolution);
  double acc = 0.0;
  for (const auto& [p, w] : nodes) {
    double v = Q(p);
    if (!std::isfinite(v)) throw NonFiniteIntegrand("sphere_lsnorm: non-finite Q on sphere");
    acc += std::pow(v, s) * w;
  }
  return std::pow(acc, 1.0 / s);
}

namespace detail {

// int_{a}^{b} f(t) dt with the substitution u = log(1/t); uniform grid in u
// with nodes_per_decade midpoint nodes per factor-10 shrink of t.
inline double log_substituted_integral(const std::function<double(double)>& f, double a,
                                       double b, int nodes_per_decade = 512) {
  if (!(a > 0.0 && a < b)) throw Error("log_substituted_integral: need 0 < a < b");
  double ua = std::log(1.0 / b);
  double ub = std::log(1.0 / a);
  double decades = (ub - ua) / std::log(10.0);
  int nodes = std::max(16, static_cast<int>(std::ceil(decades * nodes_per_decade)));
  double du = (ub - ua) / nodes;
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    double u = ua + (i + 0.5) * du;
    double t = std::exp(-u);
    double v = f(t) * t;  // dt = -t du
    if (!std::isfinite(v)) throw NonFiniteIntegrand("log_substituted_integral: non-finite integrand");
    acc += v * du;
  }
  return acc;
}

}  // namespace detail

// Decade-ladder probe of int_0^{eps0} dt / (t^{(n-1)/(p-1)} q(t)^{1/(p-1)}).
// Divergence of an improper integral cannot be decided numerically; the rule
// below classifies the growth trend of the partial integrals
// I_k = int_{eps0 * 10^{-k}}^{eps0} and reports the evidence with the verdict.
//   CONVERGES: increments over the last 3 decades all below 1e-4 * I_k
//   DIVERGES:  fitted exponent of I_k vs k over the last 3 decades >= 0.05
//   otherwise INCONCLUSIVE
inline CriterionVerdict divergence_test(const std::function<double(double)>& q, double eps0,
                                        int n, double p, int decades = 100) {
  check_dimension(n);
  if (!(p > 1.0)) throw ParameterRange("divergence_test: p > 1 required");
  if (decades < 3) throw ParameterRange("divergence_test: decades >= 3 required");
  if (!(eps0 > 0.0)) throw ParameterRange("divergence_test: eps0 > 0 required");

  const double beta = (n - 1) / (p - 1.0);
  const double qexp = 1.0 / (p - 1.0);
  const int nodes_per_decade = 512;
  const double ln10 = std::log(10.0);

  CriterionVerdict verdict;
  double u0 = std::log(1.0 / eps0);
  double acc = 0.0;
  std::vector<double> partials;
  for (int k = 1; k <= decades; ++k) {
    double du = ln10 / nodes_per_decade;
    for (int i = 0; i < nodes_per_decade; ++i) {
      double u = u0 + (k - 1) * ln10 + (i + 0.5) * du;
      double t = std::exp(-u);
      double qv = q(t);
      if (!(qv > 0.0) || !std::isfinite(qv))
        throw NonFiniteIntegrand("divergence_test: q(t) must be positive and finite");
      // integrand dt = t^{1-beta} q^{-1/(p-1)} du after substitution
      double g = std::exp((1.0 - beta) * std::log(t)) * std::pow(qv, -qexp);
      if (!std::isfinite(g)) throw NonFiniteIntegrand("divergence_test: non-finite integrand");
      acc += g * du;
    }
    partials.push_back(acc);
    verdict.evidence.emplace_back(eps0 * std::pow(10.0, -k), acc);
  }

  int K = decades;
  bool cauchy = true;
  for (int k = K - 2; k <= K; ++k) {
    double inc = partials[k - 1] - partials[k - 2];
    if (!(inc < verdict.cauchy_threshold * partials[k - 1])) cauchy = false;
  }
  double b = (std::log(partials[K - 1]) - std::log(partials[K - 3])) /
             (std::log(static_cast<double>(K)) - std::log(static_cast<double>(K - 2)));
  verdict.fitted_exponent = b;
  if (cauchy) {
    verdict.kind = VerdictKind::CONVERGES;
  } else if (b >= verdict.growth_threshold) {
    verdict.kind = VerdictKind::DIVERGES;
  } else {
    verdict.kind = VerdictKind::INCONCLUSIVE;
  }
  return verdict;
}

// Mean oscillation of Q over dyadic balls B(x0, 2^{-k}). FMO when the
// oscillation stays bounded over the last 4 scales (each at most twice the
// window median); NOT_FMO when it grows monotonically by >= 1.5x per scale.
inline CriterionVerdict fmo_test(const std::function<double(const Vec&)>& Q, const Vec& x0,
                                 const MetricField& metric, int k_min = 3, int k_max = 12,
                                 int resolution = 256) {
  int n = x0.n;
  check_dimension(n);
  if (k_max - k_min + 1 < 4) throw ParameterRange("fmo_test: need at least 4 scales");

  CriterionVerdict verdict;
  verdict.growth_threshold = 1.5;
  std::vector<double> osc;
  double mean_scale = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    double eps = std::pow(2.0, -k);
    Domain ball = make_domain(DomainKind::ball, x0, 0.0, eps);
    double vol = volume_integrate(ball, metric, [](const Vec&) { return 1.0; }, resolution);
    double mean = volume_integrate(ball, metric, Q, resolution) / vol;
    double o = volume_integrate(ball, metric,
                                [&](const Vec& x) { return std::abs(Q(x) - mean); },
                                resolution) / vol;
    osc.push_back(o);
    mean_scale = std::max(mean_scale, std::abs(mean));
    verdict.evidence.emplace_back(eps, o);
  }

  std::size_t m = osc.size();
  bool all_zero = true;
  for (double o : osc) all_zero &= (o <= 1e-12 * (mean_scale + 1.0));
  if (all_zero) {
    verdict.kind = VerdictKind::FMO;
    return verdict;
  }

  bool grows = true;
  for (std::size_t i = m - 4; i + 1 < m; ++i)
    if (!(osc[i + 1] >= 1.5 * osc[i])) grows = false;
  if (grows) {
    verdict.fitted_exponent = osc[m - 1] / osc[m - 2];
    verdict.kind = VerdictKind::NOT_FMO;
    return verdict;
  }

  std::vector<double> window(osc.end() - 4, osc.end());
  std::sort(window.begin(), window.end());
  double median = 0.5 * (window[1] + window[2]);
  bool bounded = true;
  for (std::size_t i = m - 4; i < m; ++i)
    if (!(osc[i] <= 2.0 * median + 1e-12)) bounded = false;
  verdict.kind = bounded ? VerdictKind::FMO : VerdictKind::INCONCLUSIVE;
  return verdict;
}

// A psi schedule on (0, eps0) with its running integral I(eps, eps0);
// Lemma-style admissibility requires 0 < I < infinity for every probed eps.
struct PsiSchedule {
  std::function<double(double)> psi;
  double eps0{0.5};

  double integral(double eps) const {
    double v = detail::log_substituted_integral(psi, eps, eps0);
    if (!(v > 0.0) || !std::isfinite(v))
      throw PsiNotIntegrable("PsiSchedule: I(eps, eps0) must be positive and finite");
    return v;
  }

  // The proof-driven built-in choice psi(t) = (t log(1/t))^{-n/p}; needs
  // eps0 < 1 so that log(1/t) > 0 on the range.
  static PsiSchedule log_power(int n, double p, double eps0) {
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw ParameterRange("psi log_power: need 0 < eps0 < 1");
    double expo = static_cast<double>(n) / p;
    return PsiSchedule{
        [expo](double t) { return std::pow(t * std::log(1.0 / t), -expo); }, eps0};
  }
};

struct OIConditionReport {
  std::vector<std::pair<double, double>> ratios;  // (eps, numerator / I^p)
  bool plausible{false};
};

// Probes whether int_{eps<|x-x0|<eps0} Q * psi^p(d(x,x0)) dv = o(I^p(eps,eps0))
// along a decreasing eps ladder: the ratio sequence should decay toward 0.
inline OIConditionReport oi_condition_check(const std::function<double(const Vec&)>& Q,
                                            const PsiSchedule& schedule, const Vec& x0,
                                            int n, double p,
                                            const std::vector<double>& eps_sequence,
                                            int resolution = 512) {
  check_dimension(n);
  if (eps_sequence.empty()) throw ParameterRange("oi_condition_check: empty eps sequence");
  MetricField flat = MetricField::flat(n);
  OIConditionReport rep;
  for (double eps : eps_sequence) {
    if (!(eps > 0.0 && eps < schedule.eps0))
      throw ParameterRange("oi_condition_check: eps must lie in (0, eps0)");
    double denom = std::pow(schedule.integral(eps), p);
    // Radial part via log substitution (the integrand is singular at 0),
    // angular part via the sphere mean of Q.
    double numer = detail::log_substituted_integral(
        [&](double t) {
          double sphere = 0.0;
          if (n == 2) {
            const int na = 64;
            for (int i = 0; i < na; ++i) {
              double th = (i + 0.5) * 2.0 * pi / na;
              sphere += Q(x0 + Vec(t * std::cos(th), t * std::sin(th))) * (2.0 * pi / na);
            }
            sphere *= t;
          } else {
            const int nu = 16, nphi = 32;
            for (int i = 0; i < nu; ++i) {
              double u = -1.0 + (i + 0.5) * 2.0 / nu;
              double s = std::sqrt(std::max(0.0, 1.0 - u * u));
              for (int j = 0; j < nphi; ++j) {
                double ph = (j + 0.5) * 2.0 * pi / nphi;
                sphere += Q(x0 + Vec(t * s * std::cos(ph), t * s * std::sin(ph), t * u)) *
                          (2.0 / nu) * (2.0 * pi / nphi);
              }
            }
            sphere *= t * t;
          }
          return sphere * std::pow(schedule.psi(t), p);
        },
        eps, schedule.eps0, std::max(64, resolution / 4));
    rep.ratios.emplace_back(eps, numer / denom);
  }
  double first = rep.ratios.front().second;
  double last = rep.ratios.back().second;
  rep.plausible = std::isfinite(first) && std::isfinite(last) && last < 0.2 * first;
  return rep;
}

struct LsIntegrabilityReport {
  std::vector<std::pair<double, double>> values;  // (eps_k, int over A(x0,eps_k,r2))
  bool converged{false};
};

// int Q^s dv over the nested annuli A(x0, r2 * 10^{-k}, r2); converged when
// the last increment is below 5% of the running value (Cauchy trend).
inline LsIntegrabilityReport ls_integrability_test(const std::function<double(const Vec&)>& Q,
                                                   const Domain& domain, double s,
                                                   int resolution = 512, int decades = 8) {
  if (!(s >= 1.0)) throw ParameterRange("ls_integrability_test: s >= 1 required");
  int n = domain.dim();
  check_dimension(n);
  if (decades < 2) throw ParameterRange("ls_integrability_test: decades >= 2 required");
  double r2 = domain.r2;

  detail::AngularGrid ang = detail::angular_grid(n, std::min(resolution, 128));
  auto shell_mean_qs = [&](double t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ang.dirs.size(); ++j) {
      Vec x = domain.center + t * ang.dirs[j];
      double v = Q(x);
      if (!std::isfinite(v)) throw NonFiniteIntegrand("ls_integrability_test: non-finite Q");
      acc += std::pow(v, s) * ang.domega[j];
    }
    double rpow = (n == 2) ? t : t * t;
    return acc * rpow;
  };

  LsIntegrabilityReport rep;
  double acc = 0.0;
  double prev_outer = r2;
  for (int k = 1; k <= decades; ++k) {
    double eps = r2 * std::pow(10.0, -k);
    acc += detail::log_substituted_integral(shell_mean_qs, eps, prev_outer,
                                            std::max(64, resolution / 2));
    prev_outer = eps;
    rep.values.emplace_back(eps, acc);
  }
  double last_inc = rep.values[static_cast<std::size_t>(decades - 1)].second -
                    rep.values[static_cast<std::size_t>(decades - 2)].second;
  rep.converged = last_inc < 0.05 * rep.values.back().second;
  return rep;
}

}  // namespace modlab
