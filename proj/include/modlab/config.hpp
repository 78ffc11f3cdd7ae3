#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "modlab/catalog.hpp"
#include "modlab/errors.hpp"
#include "modlab/expr.hpp"
#include "modlab/geometry.hpp"
#include "modlab/mapping.hpp"

namespace modlab {

using json = nlohmann::json;

// A validated run configuration: one JSON document, strict about unknown
// keys, with all defaults filled into `resolved` so that any output can embed
// the exact configuration that reproduces it.
struct RunConfig {
  std::string subcommand;
  json resolved;
};

namespace cfgdetail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& base) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError(base + "/" + it.key(), "unknown key");
  }
}

inline double need_number(const json& obj, const std::string& key, double def,
                          const std::string& base) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_number())
    throw ConfigError(base + "/" + key, "expected a number");
  return obj[key].get<double>();
}

inline std::string need_string(const json& obj, const std::string& key,
                               const std::string& def, const std::string& base) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_string())
    throw ConfigError(base + "/" + key, "expected a string");
  return obj[key].get<std::string>();
}

inline void check_expr(const json& cfg, const std::string& key) {
  if (cfg.contains(key) && cfg[key].is_string()) {
    try {
      RadialExpr::parse(cfg[key].get<std::string>());
    } catch (const Error& e) {
      throw ConfigError("/" + key, e.what());
    }
  }
}

}  // namespace cfgdetail

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"modulus",
       {"subcommand", "domain", "n", "p", "curves", "jitter", "grid", "seed", "tol",
        "max_iter", "metric", "output", "format"}},
      {"dilatation",
       {"subcommand", "map", "n", "p", "h", "samples", "seed", "output", "format"}},
      {"criteria",
       {"subcommand", "kind", "q", "Q", "n", "p", "s", "eps0", "decades", "k_min",
        "k_max", "r_outer", "resolution", "output", "format"}},
      {"catalog", {"subcommand", "list", "entry", "params", "output", "format"}},
      {"verify-ring",
       {"subcommand", "map", "n", "p", "r1", "r2", "Q", "eta", "samples", "grid",
        "output", "format"}},
      {"probe-limit",
       {"subcommand", "map", "directions", "radii", "output", "format"}},
  };
  return schema;
}

inline RunConfig parse_config(json doc, const std::string& subcommand) {
  auto schema_it = config_schema().find(subcommand);
  if (schema_it == config_schema().end())
    throw ConfigError("/subcommand", "unknown subcommand '" + subcommand + "'");
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  cfgdetail::reject_unknown(doc, schema_it->second, "");
  if (doc.contains("subcommand") && doc["subcommand"] != subcommand)
    throw ConfigError("/subcommand", "config subcommand does not match CLI subcommand");
  doc["subcommand"] = subcommand;

  // Shared numeric validation and defaults.
  double n = cfgdetail::need_number(doc, "n", 2.0, "");
  if (n != 2.0 && n != 3.0) throw ConfigError("/n", "n must be 2 or 3");
  doc["n"] = static_cast<int>(n);

  if (subcommand == "modulus" || subcommand == "verify-ring" || subcommand == "dilatation" ||
      subcommand == "criteria") {
    double p = cfgdetail::need_number(doc, "p", 2.0, "");
    bool needs_strict = subcommand == "modulus" || subcommand == "verify-ring";
    if (needs_strict && !(p > 1.0)) throw ConfigError("/p", "p > 1 required");
    if (!needs_strict && !(p >= 1.0)) throw ConfigError("/p", "p >= 1 required");
    doc["p"] = p;
  }

  std::string format = cfgdetail::need_string(doc, "format", "csv", "");
  if (format != "csv" && format != "json")
    throw ConfigError("/format", "format must be 'csv' or 'json'");
  doc["format"] = format;
  doc["output"] = cfgdetail::need_string(doc, "output", subcommand + "." + format, "");

  if (subcommand == "modulus") {
    if (!doc.contains("domain")) doc["domain"] = json::object();
    if (!doc["domain"].is_object()) throw ConfigError("/domain", "expected an object");
    cfgdetail::reject_unknown(doc["domain"], {"kind", "center", "r1", "r2"}, "/domain");
    std::string kind = cfgdetail::need_string(doc["domain"], "kind", "annulus", "/domain");
    if (kind != "annulus" && kind != "ball" && kind != "punctured_ball")
      throw ConfigError("/domain/kind", "unknown domain kind");
    doc["domain"]["kind"] = kind;
    double r1 = cfgdetail::need_number(doc["domain"], "r1", 1.0, "/domain");
    double r2 = cfgdetail::need_number(doc["domain"], "r2", std::exp(1.0), "/domain");
    if (!(r1 >= 0.0 && r1 < r2)) throw ConfigError("/domain/r1", "need 0 <= r1 < r2");
    doc["domain"]["r1"] = r1;
    doc["domain"]["r2"] = r2;
    if (!doc["domain"].contains("center"))
      doc["domain"]["center"] = std::vector<double>(static_cast<std::size_t>(doc["n"].get<int>()), 0.0);
    doc["curves"] = static_cast<int>(cfgdetail::need_number(doc, "curves", 400, ""));
    doc["jitter"] = cfgdetail::need_number(doc, "jitter", 0.0, "");
    if (!(doc["jitter"].get<double>() >= 0.0 && doc["jitter"].get<double>() < 0.5))
      throw ConfigError("/jitter", "need 0 <= jitter < 0.5");
    doc["grid"] = static_cast<int>(cfgdetail::need_number(doc, "grid", 256, ""));
    doc["seed"] = static_cast<std::uint64_t>(cfgdetail::need_number(doc, "seed", 0, ""));
    doc["tol"] = cfgdetail::need_number(doc, "tol", 1e-3, "");
    doc["max_iter"] = static_cast<int>(cfgdetail::need_number(doc, "max_iter", 2000, ""));
    std::string metric = cfgdetail::need_string(doc, "metric", "flat", "");
    if (metric != "flat") cfgdetail::check_expr(doc, "metric");
    doc["metric"] = metric;
  } else if (subcommand == "dilatation") {
    doc["h"] = cfgdetail::need_number(doc, "h", 1e-5, "");
    doc["samples"] = static_cast<int>(cfgdetail::need_number(doc, "samples", 50, ""));
    doc["seed"] = static_cast<std::uint64_t>(cfgdetail::need_number(doc, "seed", 0, ""));
    if (!doc.contains("map")) throw ConfigError("/map", "map specification required");
  } else if (subcommand == "criteria") {
    std::string kind = cfgdetail::need_string(doc, "kind", "divergence", "");
    if (kind != "divergence" && kind != "fmo" && kind != "oi" && kind != "ls")
      throw ConfigError("/kind", "kind must be one of divergence|fmo|oi|ls");
    doc["kind"] = kind;
    cfgdetail::check_expr(doc, "q");
    cfgdetail::check_expr(doc, "Q");
    doc["eps0"] = cfgdetail::need_number(doc, "eps0", 0.5, "");
    doc["decades"] = static_cast<int>(cfgdetail::need_number(doc, "decades", 100, ""));
    doc["k_min"] = static_cast<int>(cfgdetail::need_number(doc, "k_min", 3, ""));
    doc["k_max"] = static_cast<int>(cfgdetail::need_number(doc, "k_max", 12, ""));
    doc["s"] = cfgdetail::need_number(doc, "s", 1.0, "");
    doc["r_outer"] = cfgdetail::need_number(doc, "r_outer", 1.0, "");
    doc["resolution"] = static_cast<int>(cfgdetail::need_number(doc, "resolution", 256, ""));
  } else if (subcommand == "catalog") {
    if (!doc.contains("list") && !doc.contains("entry")) doc["list"] = true;
  } else if (subcommand == "verify-ring") {
    doc["r1"] = cfgdetail::need_number(doc, "r1", 1.0, "");
    doc["r2"] = cfgdetail::need_number(doc, "r2", std::exp(1.0), "");
    if (!(doc["r1"].get<double>() > 0.0 && doc["r1"].get<double>() < doc["r2"].get<double>()))
      throw ConfigError("/r1", "need 0 < r1 < r2");
    doc["samples"] = static_cast<int>(cfgdetail::need_number(doc, "samples", 400, ""));
    doc["grid"] = static_cast<int>(cfgdetail::need_number(doc, "grid", 256, ""));
    if (!doc.contains("map")) doc["map"] = "identity";
    if (!doc.contains("Q")) doc["Q"] = "1";
    cfgdetail::check_expr(doc, "Q");
    if (!doc.contains("eta")) doc["eta"] = "extremal";
    if (doc["eta"].is_string() && doc["eta"].get<std::string>() != "extremal")
      cfgdetail::check_expr(doc, "eta");
  } else if (subcommand == "probe-limit") {
    if (!doc.contains("map")) throw ConfigError("/map", "map specification required");
    doc["directions"] = static_cast<int>(cfgdetail::need_number(doc, "directions", 32, ""));
    if (!doc.contains("radii")) doc["radii"] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  }

  RunConfig cfg;
  cfg.subcommand = subcommand;
  cfg.resolved = std::move(doc);
  return cfg;
}

inline RunConfig load_config(const std::string& path, const std::string& subcommand) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(std::move(doc), subcommand);
}

// --- builders from resolved config fragments ---

inline Vec config_center(const json& domain, int n) {
  Vec c = zero_vec(n);
  if (domain.contains("center")) {
    const auto& arr = domain["center"];
    if (!arr.is_array() || static_cast<int>(arr.size()) != n)
      throw ConfigError("/domain/center", "center must be an array of length n");
    for (int i = 0; i < n; ++i) c[i] = arr[static_cast<std::size_t>(i)].get<double>();
  }
  return c;
}

inline Domain build_domain(const json& cfg) {
  int n = cfg["n"].get<int>();
  const json& d = cfg["domain"];
  std::string kind = d["kind"].get<std::string>();
  DomainKind k = kind == "annulus"
                     ? DomainKind::annulus
                     : (kind == "ball" ? DomainKind::ball : DomainKind::punctured_ball);
  try {
    return make_domain(k, config_center(d, n), d["r1"].get<double>(), d["r2"].get<double>());
  } catch (const InvalidRadii& e) {
    throw ConfigError("/domain", e.what());
  }
}

inline MetricField build_metric(const json& cfg) {
  int n = cfg["n"].get<int>();
  std::string m = cfg.value("metric", "flat");
  if (m == "flat") return MetricField::flat(n);
  RadialExpr lam = RadialExpr::parse(m);
  return MetricField::conformal(n, [lam](const Vec& x) { return lam(x.norm()); });
}

// Map fragments: "identity", {"catalog": name, "params": {...}}, or
// {"radial": {"rho": expr, "drho": expr}}. Returns the spec plus the catalog
// entry when one was used (for exact-dilatation columns).
inline std::pair<MappingSpec, std::optional<CatalogEntry>> build_map(const json& cfg) {
  int n = cfg["n"].get<int>();
  const json& m = cfg["map"];
  if (m.is_string() && m.get<std::string>() == "identity") {
    MappingSpec spec;
    spec.n = n;
    spec.kind = MapKind::generic;
    spec.domain = make_domain(DomainKind::ball, zero_vec(n), 0.0, 100.0);
    spec.evaluator = [](const Vec& x) { return x; };
    spec.exact_jacobian = [n](const Vec&) -> Eigen::MatrixXd {
      return Eigen::MatrixXd::Identity(n, n);
    };
    spec.multiplicity = 1;
    return {spec, std::nullopt};
  }
  if (m.is_object() && m.contains("catalog")) {
    cfgdetail::reject_unknown(m, {"catalog", "params", "q0"}, "/map");
    std::map<std::string, double> params;
    if (m.contains("params")) {
      for (auto it = m["params"].begin(); it != m["params"].end(); ++it)
        params[it.key()] = it.value().get<double>();
    }
    std::function<double(double)> q0;
    if (m.contains("q0")) {
      RadialExpr q = RadialExpr::parse(m["q0"].get<std::string>());
      q0 = q.fn();
    }
    try {
      CatalogEntry entry = make_catalog_map(m["catalog"].get<std::string>(), params, q0);
      return {entry.map, entry};
    } catch (const ParameterRange& e) {
      throw ConfigError("/map/catalog", e.what());
    }
  }
  if (m.is_object() && m.contains("radial")) {
    cfgdetail::reject_unknown(m, {"radial"}, "/map");
    cfgdetail::reject_unknown(m["radial"], {"rho", "drho"}, "/map/radial");
    if (!m["radial"].contains("rho") || !m["radial"].contains("drho"))
      throw ConfigError("/map/radial", "rho and drho expressions required");
    RadialExpr rho = RadialExpr::parse(m["radial"]["rho"].get<std::string>());
    RadialExpr drho = RadialExpr::parse(m["radial"]["drho"].get<std::string>());
    Domain dom = make_domain(DomainKind::punctured_ball, zero_vec(n), 0.0, 1.0);
    return {make_radial_map(dom, rho.fn(), drho.fn()), std::nullopt};
  }
  throw ConfigError("/map", "unrecognized map specification");
}

}  // namespace modlab
