// modlab: command-line driver for the curve-modulus / distortion toolkit.
// One run = one process; every output embeds the fully resolved config so a
// run can be reproduced from its own artifact.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modlab/catalog.hpp"
#include "modlab/config.hpp"
#include "modlab/criteria.hpp"
#include "modlab/errors.hpp"
#include "modlab/expr.hpp"
#include "modlab/geometry.hpp"
#include "modlab/mapping.hpp"
#include "modlab/modulus.hpp"

namespace {

using modlab::json;

std::string num(double v) {
  std::ostringstream o;
  o << std::setprecision(12) << v;
  return o.str();
}

struct Table {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_output(const modlab::RunConfig& cfg, const Table& t) {
  const std::string path = cfg.resolved["output"].get<std::string>();
  std::ofstream out(path);
  if (!out) throw modlab::Error("cannot open output file '" + path + "'");
  if (cfg.resolved["format"] == "json") {
    json doc;
    doc["config"] = cfg.resolved;
    doc["schema"] = t.schema;
    doc["columns"] = t.columns;
    doc["rows"] = t.rows;
    out << doc.dump(2) << "\n";
    return;
  }
  out << "# config " << cfg.resolved.dump() << "\n";
  out << "# schema " << t.schema << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

std::function<double(const modlab::Vec&)> radial_field(const std::string& expr,
                                                       const modlab::Vec& x0) {
  modlab::RadialExpr e = modlab::RadialExpr::parse(expr);
  return [e, x0](const modlab::Vec& x) { return e(modlab::dist(x, x0)); };
}

// --- subcommand bodies -----------------------------------------------------

int run_modulus(const modlab::RunConfig& cfg) {
  using namespace modlab;
  Domain dom = build_domain(cfg.resolved);
  MetricField metric = build_metric(cfg.resolved);
  double p = cfg.resolved["p"].get<double>();
  int grid = cfg.resolved["grid"].get<int>();
  CurveFamily fam = sample_ring_curves(dom.center, dom.r1, dom.r2,
                                       cfg.resolved["curves"].get<int>(),
                                       cfg.resolved["jitter"].get<double>(),
                                       cfg.resolved["seed"].get<std::uint64_t>());
  ModulusEstimate est = estimate_modulus(fam, p, dom, metric, grid,
                                         cfg.resolved["max_iter"].get<int>(),
                                         cfg.resolved["tol"].get<double>());
  double ref = std::numeric_limits<double>::quiet_NaN();
  double rel = std::numeric_limits<double>::quiet_NaN();
  if (dom.r1 > 0.0 && cfg.resolved["metric"] == "flat") {
    ref = ring_modulus_reference(dom.dim(), p, dom.r1, dom.r2);
    rel = std::abs(est.value - ref) / ref;
  }
  Table t;
  t.schema = "modulus-v1";
  t.columns = {"n", "p", "curves", "grid", "seed", "estimate",
               "reference", "rel_err", "iterations", "converged"};
  t.rows.push_back({num(dom.dim()), num(p), num(fam.curves.size()), num(grid),
                    num(static_cast<double>(cfg.resolved["seed"].get<std::uint64_t>())),
                    num(est.value), num(ref), num(rel), num(est.iterations),
                    est.converged ? "1" : "0"});
  write_output(cfg, t);
  std::cout << "modulus estimate=" << num(est.value) << " reference=" << num(ref)
            << " rel_err=" << num(rel) << " -> " << cfg.resolved["output"].get<std::string>()
            << "\n";
  return 0;
}

int run_dilatation(const modlab::RunConfig& cfg) {
  using namespace modlab;
  auto [map, entry] = build_map(cfg.resolved);
  double p = cfg.resolved["p"].get<double>();
  double h = cfg.resolved["h"].get<double>();
  int samples = cfg.resolved["samples"].get<int>();
  std::mt19937_64 rng(cfg.resolved["seed"].get<std::uint64_t>());
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Domain& dom = map.domain;

  Table t;
  t.schema = "dilatation-v1";
  t.columns = {"index", "x0", "x1", "x2", "inner_num", "outer_num",
               "inner_exact", "outer_exact", "rel_err_inner"};
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    Vec x = dom.center;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Vec cand = dom.center;
      for (int i = 0; i < map.n; ++i) cand[i] += dom.r2 * unif(rng);
      double d = dist(cand, dom.center);
      if (d <= std::max(dom.r1, 100.0 * h) || d >= dom.r2 * (1.0 - 1e-6)) continue;
      x = cand;
      break;
    }
    DifferentialReport rep = differential_report(map, x, h);
    double ki = inner_dilatation(rep, p);
    double ko = outer_dilatation(rep, p);
    double ke = std::numeric_limits<double>::quiet_NaN();
    double koe = std::numeric_limits<double>::quiet_NaN();
    double rel = std::numeric_limits<double>::quiet_NaN();
    if (entry) {
      ke = entry->exact_inner(x, p);
      koe = entry->exact_outer(x, p);
      rel = std::abs(ki - ke) / std::max(std::abs(ke), 1e-300);
      worst = std::max(worst, rel);
    }
    t.rows.push_back({num(k), num(x[0]), num(x[1]), map.n == 3 ? num(x[2]) : "",
                      num(ki), num(ko), num(ke), num(koe), num(rel)});
  }
  write_output(cfg, t);
  std::cout << "dilatation samples=" << samples << " max_rel_err_inner=" << num(worst)
            << " -> " << cfg.resolved["output"].get<std::string>() << "\n";
  return 0;
}

int run_criteria(const modlab::RunConfig& cfg) {
  using namespace modlab;
  std::string kind = cfg.resolved["kind"].get<std::string>();
  int n = cfg.resolved["n"].get<int>();
  double p = cfg.resolved["p"].get<double>();
  Vec x0 = zero_vec(n);
  Table t;
  std::string summary;

  if (kind == "divergence") {
    if (!cfg.resolved.contains("q")) throw ConfigError("/q", "expression required");
    RadialExpr q = RadialExpr::parse(cfg.resolved["q"].get<std::string>());
    CriterionVerdict v = divergence_test(q.fn(), cfg.resolved["eps0"].get<double>(), n, p,
                                         cfg.resolved["decades"].get<int>());
    t.schema = "criteria-divergence-v1";
    t.columns = {"eps", "partial_integral", "verdict", "fitted_exponent"};
    for (const auto& [k, val] : v.evidence)
      t.rows.push_back({num(k), num(val), verdict_name(v.kind), num(v.fitted_exponent)});
    summary = verdict_name(v.kind);
  } else if (kind == "fmo") {
    if (!cfg.resolved.contains("Q")) throw ConfigError("/Q", "expression required");
    auto Q = radial_field(cfg.resolved["Q"].get<std::string>(), x0);
    CriterionVerdict v = fmo_test(Q, x0, MetricField::flat(n),
                                  cfg.resolved["k_min"].get<int>(),
                                  cfg.resolved["k_max"].get<int>(),
                                  cfg.resolved["resolution"].get<int>());
    t.schema = "criteria-fmo-v1";
    t.columns = {"scale", "oscillation", "verdict"};
    for (const auto& [eps, o] : v.evidence)
      t.rows.push_back({num(eps), num(o), verdict_name(v.kind)});
    summary = verdict_name(v.kind);
  } else if (kind == "oi") {
    if (!cfg.resolved.contains("Q")) throw ConfigError("/Q", "expression required");
    auto Q = radial_field(cfg.resolved["Q"].get<std::string>(), x0);
    double eps0 = cfg.resolved["eps0"].get<double>();
    PsiSchedule sched = PsiSchedule::log_power(n, p, eps0);
    std::vector<double> ladder;
    for (int k = 2; k <= 8; ++k) ladder.push_back(eps0 * std::pow(2.0, -k));
    OIConditionReport rep = oi_condition_check(Q, sched, x0, n, p, ladder,
                                               cfg.resolved["resolution"].get<int>());
    t.schema = "criteria-oi-v1";
    t.columns = {"eps", "ratio", "plausible"};
    for (const auto& [eps, r] : rep.ratios)
      t.rows.push_back({num(eps), num(r), rep.plausible ? "1" : "0"});
    summary = rep.plausible ? "PLAUSIBLE" : "NOT_SHOWN";
  } else {  // ls
    if (!cfg.resolved.contains("Q")) throw ConfigError("/Q", "expression required");
    auto Q = radial_field(cfg.resolved["Q"].get<std::string>(), x0);
    Domain dom = make_domain(DomainKind::ball, x0, 0.0, cfg.resolved["r_outer"].get<double>());
    LsIntegrabilityReport rep = ls_integrability_test(Q, dom, cfg.resolved["s"].get<double>(),
                                                      cfg.resolved["resolution"].get<int>());
    t.schema = "criteria-ls-v1";
    t.columns = {"eps", "integral", "converged"};
    for (const auto& [eps, v] : rep.values)
      t.rows.push_back({num(eps), num(v), rep.converged ? "1" : "0"});
    summary = rep.converged ? "CONVERGES" : "DIVERGES";
  }

  write_output(cfg, t);
  std::cout << "criteria kind=" << kind << " verdict=" << summary << " -> "
            << cfg.resolved["output"].get<std::string>() << "\n";
  return 0;
}

int run_catalog(const modlab::RunConfig& cfg) {
  using namespace modlab;
  Table t;
  t.schema = "catalog-v1";
  t.columns = {"name", "dimension", "parameters", "limit_set"};
  auto describe = [&](const std::string& name) {
    CatalogEntry e = make_catalog_map(name);
    std::string params;
    for (const auto& [k, v] : e.params) {
      if (!params.empty()) params += "; ";
      params += k + "=" + num(v);
    }
    std::string lim = e.limit_set.kind == LimitSetKind::sphere
                          ? "sphere r=" + num(e.limit_set.radius)
                          : (e.limit_set.kind == LimitSetKind::point ? "point" : "none");
    std::string range;
    if (name == "twisting") range = "m>=1 (integer)";
    else if (name == "planar_power") range = "m>=1 (integer)";
    else if (name == "radial_power") range = "alpha>0";
    else if (name == "annulus_blowup") range = "0<alpha<1";
    else if (name == "counterexample_n") range = "q0>=1 on (0,1)";
    else range = "1<alpha<n; q0>=1 on (0,1)";
    t.rows.push_back({name, num(e.map.n), params + " [" + range + "]", lim});
  };
  if (cfg.resolved.contains("entry")) {
    describe(cfg.resolved["entry"].get<std::string>());
  } else {
    for (const auto& name : catalog_names()) describe(name);
  }
  write_output(cfg, t);
  std::cout << "catalog entries=" << t.rows.size() << " -> "
            << cfg.resolved["output"].get<std::string>() << "\n";
  for (const auto& row : t.rows)
    std::printf("  %-22s n=%s  %s  limit=%s\n", row[0].c_str(), row[1].c_str(),
                row[2].c_str(), row[3].c_str());
  return 0;
}

int run_verify_ring(const modlab::RunConfig& cfg) {
  using namespace modlab;
  auto [map, entry] = build_map(cfg.resolved);
  int n = cfg.resolved["n"].get<int>();
  double p = cfg.resolved["p"].get<double>();
  double r1 = cfg.resolved["r1"].get<double>();
  double r2 = cfg.resolved["r2"].get<double>();
  Vec x0 = map.punctures.empty() ? map.domain.center : map.punctures.front();

  std::function<double(const Vec&)> Q;
  std::function<double(double)> Qr;
  std::string qspec = cfg.resolved["Q"].get<std::string>();
  if (qspec == "exact" && entry) {
    Q = [e = *entry, p](const Vec& x) { return e.exact_inner(x, p); };
    Vec dir = zero_vec(n);
    dir[0] = 1.0;
    Qr = [e = *entry, p, x0, dir](double t) { return e.exact_inner(x0 + t * dir, p); };
  } else {
    RadialExpr qe = RadialExpr::parse(qspec == "exact" ? "1" : qspec);
    Q = [qe, x0](const Vec& x) { return qe(dist(x, x0)); };
    Qr = qe.fn();
  }

  std::function<double(double)> eta;
  if (cfg.resolved["eta"].is_string() && cfg.resolved["eta"] == "extremal") {
    // eta(t) proportional to t^{-(n-1)/(p-1)} Q(t)^{-1/(p-1)}, normalized to
    // unit integral over (r1, r2) by Simpson quadrature.
    double expo = (n - 1) / (p - 1.0);
    auto raw = [expo, p, Qr](double t) {
      return std::pow(t, -expo) * std::pow(std::max(Qr(t), 1e-300), -1.0 / (p - 1.0));
    };
    const int N = 4096;
    double h = (r2 - r1) / N;
    double acc = raw(r1) + raw(r2);
    for (int i = 1; i < N; ++i) acc += raw(r1 + i * h) * ((i % 2) ? 4.0 : 2.0);
    acc *= h / 3.0;
    double scale = (1.0 + 1e-9) / acc;
    eta = [raw, scale](double t) { return raw(t) * scale; };
  } else {
    RadialExpr ee = RadialExpr::parse(cfg.resolved["eta"].get<std::string>());
    eta = ee.fn();
  }

  RingInequalityReport rep = check_ring_inequality(map, x0, r1, r2, p, Q, eta,
                                                   cfg.resolved["samples"].get<int>(),
                                                   cfg.resolved["grid"].get<int>());
  Table t;
  t.schema = "verify-ring-v1";
  t.columns = {"n", "p", "r1", "r2", "lhs", "rhs", "ratio", "holds"};
  t.rows.push_back({num(n), num(p), num(r1), num(r2), num(rep.lhs), num(rep.rhs),
                    num(rep.lhs / std::max(rep.rhs, 1e-300)), rep.holds ? "1" : "0"});
  write_output(cfg, t);
  std::cout << "verify-ring lhs=" << num(rep.lhs) << " rhs=" << num(rep.rhs)
            << " holds=" << (rep.holds ? "yes" : "no") << " -> "
            << cfg.resolved["output"].get<std::string>() << "\n";
  return 0;
}

int run_probe_limit(const modlab::RunConfig& cfg) {
  using namespace modlab;
  auto [map, entry] = build_map(cfg.resolved);
  if (!entry) throw ConfigError("/map", "probe-limit requires a catalog map");
  std::vector<double> radii;
  for (const auto& r : cfg.resolved["radii"]) radii.push_back(r.get<double>());
  LimitProbeReport rep =
      probe_limit_set(*entry, cfg.resolved["directions"].get<int>(), radii);
  Table t;
  t.schema = "probe-limit-v1";
  t.columns = {"radius", "separation", "extrapolated", "confirmed"};
  for (const auto& [r, sep] : rep.separations)
    t.rows.push_back({num(r), num(sep), num(rep.extrapolated),
                      rep.descriptor_confirmed ? "1" : "0"});
  write_output(cfg, t);
  std::cout << "probe-limit entry=" << entry->name << " last_separation="
            << num(rep.separations.back().second)
            << " confirmed=" << (rep.descriptor_confirmed ? "yes" : "no") << " -> "
            << cfg.resolved["output"].get<std::string>() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curve-modulus and distortion toolkit"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, output, format, metric, map, params, rho, drho;
    std::string kind, q, Q, eta, entry, radii;
    double p = 0, s = 0, eps0 = 0, h = 0, tol = 0, jitter = 0, r1 = 0, r2 = 0, r_outer = 0;
    int n = 0, grid = 0, curves = 0, samples = 0, decades = 0, resolution = 0;
    int max_iter = 0, directions = 0, k_min = 0, k_max = 0;
    std::uint64_t seed = 0;
    bool list = false;
  } f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--output", f.output, "output file path");
    sub->add_option("--format", f.format, "csv or json");
    sub->add_option("--n", f.n, "ambient dimension (2 or 3)");
  };

  CLI::App* c_mod = app.add_subcommand("modulus", "ring-family modulus estimate");
  add_common(c_mod);
  c_mod->add_option("--p", f.p);
  c_mod->add_option("--grid", f.grid);
  c_mod->add_option("--curves", f.curves);
  c_mod->add_option("--jitter", f.jitter);
  c_mod->add_option("--tol", f.tol);
  c_mod->add_option("--max-iter", f.max_iter);
  c_mod->add_option("--seed", f.seed);
  c_mod->add_option("--r1", f.r1);
  c_mod->add_option("--r2", f.r2);
  c_mod->add_option("--metric", f.metric);

  CLI::App* c_dil = app.add_subcommand("dilatation", "pointwise dilatation survey");
  add_common(c_dil);
  c_dil->add_option("--p", f.p);
  c_dil->add_option("--step", f.h, "finite-difference step");
  c_dil->add_option("--samples", f.samples);
  c_dil->add_option("--seed", f.seed);
  c_dil->add_option("--map", f.map);
  c_dil->add_option("--params", f.params);
  c_dil->add_option("--rho", f.rho);
  c_dil->add_option("--drho", f.drho);

  CLI::App* c_cri = app.add_subcommand("criteria", "integral criteria probes");
  add_common(c_cri);
  c_cri->add_option("--kind", f.kind);
  c_cri->add_option("--q", f.q);
  c_cri->add_option("--Q", f.Q);
  c_cri->add_option("--p", f.p);
  c_cri->add_option("--s", f.s);
  c_cri->add_option("--eps0", f.eps0);
  c_cri->add_option("--decades", f.decades);
  c_cri->add_option("--resolution", f.resolution);
  c_cri->add_option("--r-outer", f.r_outer);
  c_cri->add_option("--k-min", f.k_min);
  c_cri->add_option("--k-max", f.k_max);

  CLI::App* c_cat = app.add_subcommand("catalog", "list example mappings");
  add_common(c_cat);
  c_cat->add_flag("--list", f.list);
  c_cat->add_option("--entry", f.entry);

  CLI::App* c_ver = app.add_subcommand("verify-ring", "ring inequality check");
  add_common(c_ver);
  c_ver->add_option("--p", f.p);
  c_ver->add_option("--r1", f.r1);
  c_ver->add_option("--r2", f.r2);
  c_ver->add_option("--Q", f.Q);
  c_ver->add_option("--eta", f.eta);
  c_ver->add_option("--samples", f.samples);
  c_ver->add_option("--grid", f.grid);
  c_ver->add_option("--map", f.map);
  c_ver->add_option("--params", f.params);

  CLI::App* c_pro = app.add_subcommand("probe-limit", "boundary cluster probe");
  add_common(c_pro);
  c_pro->add_option("--map", f.map);
  c_pro->add_option("--params", f.params);
  c_pro->add_option("--directions", f.directions);
  c_pro->add_option("--radii", f.radii, "comma-separated radius ladder");

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  try {
    auto cnt = [&](const std::string& flag) -> std::size_t {
      const CLI::Option* o = sub->get_option_no_throw(flag);
      return o ? o->count() : 0;
    };
    modlab::json doc = modlab::json::object();
    if (cnt("--config")) {
      std::ifstream in(f.config);
      if (!in) throw modlab::ConfigError("", "cannot open config file '" + f.config + "'");
      try {
        in >> doc;
      } catch (const std::exception& e) {
        throw modlab::ConfigError("", std::string("invalid JSON: ") + e.what());
      }
    }

    auto set_if = [&](const char* flag, const char* key, auto value) {
      if (cnt(flag)) doc[key] = value;
    };
    set_if("--output", "output", f.output);
    set_if("--format", "format", f.format);
    set_if("--n", "n", f.n);
    if (cnt("--p")) doc["p"] = f.p;
    if (cnt("--seed")) doc["seed"] = f.seed;

    if (name == "modulus") {
      set_if("--grid", "grid", f.grid);
      set_if("--curves", "curves", f.curves);
      set_if("--jitter", "jitter", f.jitter);
      set_if("--tol", "tol", f.tol);
      set_if("--max-iter", "max_iter", f.max_iter);
      set_if("--metric", "metric", f.metric);
      if (cnt("--r1")) doc["domain"]["r1"] = f.r1;
      if (cnt("--r2")) doc["domain"]["r2"] = f.r2;
    } else if (name == "criteria") {
      set_if("--kind", "kind", f.kind);
      set_if("--q", "q", f.q);
      set_if("--Q", "Q", f.Q);
      set_if("--s", "s", f.s);
      set_if("--eps0", "eps0", f.eps0);
      set_if("--decades", "decades", f.decades);
      set_if("--resolution", "resolution", f.resolution);
      set_if("--r-outer", "r_outer", f.r_outer);
      set_if("--k-min", "k_min", f.k_min);
      set_if("--k-max", "k_max", f.k_max);
    } else if (name == "catalog") {
      if (cnt("--list")) doc["list"] = true;
      set_if("--entry", "entry", f.entry);
    } else {
      set_if("--step", "h", f.h);
      set_if("--samples", "samples", f.samples);
      set_if("--grid", "grid", f.grid);
      set_if("--Q", "Q", f.Q);
      set_if("--eta", "eta", f.eta);
      set_if("--directions", "directions", f.directions);
      if (cnt("--r1")) doc["r1"] = f.r1;
      if (cnt("--r2")) doc["r2"] = f.r2;
      if (cnt("--radii")) {
        std::vector<double> radii;
        std::stringstream ss(f.radii);
        std::string tok;
        while (std::getline(ss, tok, ',')) radii.push_back(std::stod(tok));
        doc["radii"] = radii;
      }
      if (cnt("--map") || cnt("--rho")) {
        if (cnt("--rho")) {
          if (!cnt("--drho"))
            throw modlab::ConfigError("/map/radial", "rho and drho expressions required");
          doc["map"] = {{"radial", {{"rho", f.rho}, {"drho", f.drho}}}};
        } else if (f.map == "identity") {
          doc["map"] = "identity";
        } else {
          modlab::json m = {{"catalog", f.map}};
          if (cnt("--params")) m["params"] = modlab::json::parse(f.params);
          doc["map"] = m;
        }
      }
    }

    modlab::RunConfig cfg = modlab::parse_config(std::move(doc), name);
    if (name == "modulus") return run_modulus(cfg);
    if (name == "dilatation") return run_dilatation(cfg);
    if (name == "criteria") return run_criteria(cfg);
    if (name == "catalog") return run_catalog(cfg);
    if (name == "verify-ring") return run_verify_ring(cfg);
    return run_probe_limit(cfg);
  } catch (const modlab::ConfigError& e) {
    modlab::json err = {{"error", {{"type", "ConfigError"},
                                   {"field", e.field},
                                   {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::string field;
    if (auto* ne = dynamic_cast<const modlab::NumericalError*>(&e)) field = ne->field;
    modlab::json err = {{"error", {{"type", "NumericalError"},
                                   {"field", field},
                                   {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
}
