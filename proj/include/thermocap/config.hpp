#pragma once

// Run configuration: a sectioned key = value text format.
//
//   # comment
//   [grid]
//   nx = 32
//   ny = 32
//   [physics]
//   mobility = bounded_rational lo=0.5 hi=1 a_phi=0 a_theta=1
//
// Sections: grid, physics, scheme, initial, boundary, output. Only grid.nx
// and grid.ny are required. Unknown sections, unknown keys, duplicate keys
// and malformed values are errors carrying the line number.

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "thermocap/error.hpp"
#include "thermocap/grid.hpp"
#include "thermocap/initial_data.hpp"
#include "thermocap/physics.hpp"
#include "thermocap/scheme.hpp"

namespace thermocap {

struct OutputConfig {
  std::string directory = "out";
  int snapshot_every = 0;  // 0 disables snapshots
  int ledger_every = 1;
  bool snapshot_csv = true;
  bool snapshot_vtk = false;
};

struct RunConfig {
  Grid grid{2, 2};
  PhysParams phys;
  Coefficients coeffs;
  SchemeConfig scheme;
  int regularization_n = 0;  // 0: N = round(1/h)
  Preset phi0{"uniform", {}};
  Preset theta0{"uniform", {}};
  Preset u0{"zero", {}};
  Preset theta_b{"constant", {}};
  OutputConfig output;

  int effective_n() const {
    return regularization_n > 0 ? regularization_n : std::max(1, int(std::lround(1.0 / scheme.h)));
  }

  void validate() const {
    phys.validate();
    coeffs.viscosity.validate();
    coeffs.mobility.validate();
    coeffs.diffusivity.validate();
    scheme.validate();
    if (regularization_n < 0) throw ConfigError("invariant regularization_n >= 0 violated");
    if (output.snapshot_every < 0 || output.ledger_every < 1)
      throw ConfigError("invariant snapshot_every >= 0, ledger_every >= 1 violated");
  }
};

namespace detail {

inline std::string key_prefix(const std::string& key) { return key.empty() ? "" : "key '" + key + "': "; }

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key_prefix(key) + "expected a number, got '" + s + "'", line);
  }
}

inline int parse_int(const std::string& s, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return int(v);
  } catch (const std::exception&) {
    throw ConfigError(key_prefix(key) + "expected an integer, got '" + s + "'", line);
  }
}

inline bool parse_bool(const std::string& s, const std::string& key, int line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key_prefix(key) + "expected true or false, got '" + s + "'", line);
}

inline Preset parse_preset(const std::string& s, const std::string& key, int line) {
  std::istringstream in(s);
  Preset p;
  if (!(in >> p.name)) throw ConfigError(key_prefix(key) + "missing preset name", line);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError(key_prefix(key) + "expected name=value, got '" + tok + "'", line);
    const std::string k = tok.substr(0, eq);
    if (p.params.count(k)) throw ConfigError(key_prefix(key) + "duplicate parameter '" + k + "'", line);
    p.params[k] = parse_double(tok.substr(eq + 1), k, line);
  }
  return p;
}

inline CoefficientModel parse_coefficient(const std::string& s, const std::string& key, int line) {
  const Preset p = parse_preset(s, key, line);
  try {
    if (p.name == "constant") {
      p.allow({"value"}, key);
      return CoefficientModel::constant(p.get("value", 1.0));
    }
    if (p.name == "quadratic_phi") {
      p.allow({"c0", "c2"}, key);
      return CoefficientModel::quadratic_phi(p.get("c0", 1.0), p.get("c2", 0.0));
    }
    if (p.name == "bounded_rational") {
      p.allow({"lo", "hi", "a_phi", "a_theta"}, key);
      return CoefficientModel::bounded_rational(p.get("lo", 1.0), p.get("hi", 1.0), p.get("a_phi", 0.0),
                                                p.get("a_theta", 0.0));
    }
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), line);
  }
  throw ConfigError(key_prefix(key) + "unknown coefficient preset '" + p.name +
                        "' (constant | quadratic_phi | bounded_rational)",
                    line);
}

}  // namespace detail

inline RunConfig parse_config_stream(std::istream& in) {
  RunConfig c;
  int nx = 0, ny = 0;
  double lx = 8.0, ly = 8.0;
  std::set<std::string> seen;

  using Setter = std::function<void(const std::string&, int)>;
  std::map<std::string, std::map<std::string, Setter>> table;
  auto num = [](double& dst) { return Setter([&dst](const std::string& v, int l) { dst = detail::parse_double(v, "", l); }); };
  auto integer = [](int& dst) { return Setter([&dst](const std::string& v, int l) { dst = detail::parse_int(v, "", l); }); };
  auto flag = [](bool& dst) { return Setter([&dst](const std::string& v, int l) { dst = detail::parse_bool(v, "", l); }); };
  auto preset = [](Preset& dst) { return Setter([&dst](const std::string& v, int l) { dst = detail::parse_preset(v, "", l); }); };
  auto coeff = [](CoefficientModel& dst) {
    return Setter([&dst](const std::string& v, int l) { dst = detail::parse_coefficient(v, "", l); });
  };
  auto choice = [](auto& dst, std::map<std::string, std::decay_t<decltype(dst)>> opts) {
    return Setter([&dst, opts](const std::string& v, int l) {
      auto it = opts.find(v);
      if (it == opts.end()) {
        std::string names;
        for (const auto& [k, x] : opts) names += (names.empty() ? "" : " | ") + k;
        throw ConfigError("unknown option '" + v + "' (" + names + ")", l);
      }
      dst = it->second;
    });
  };

  table["grid"] = {{"nx", integer(nx)}, {"ny", integer(ny)}, {"lx", num(lx)}, {"ly", num(ly)}};
  PhysParams& p = c.phys;
  table["physics"] = {{"rho1", num(p.rho1)},       {"rho2", num(p.rho2)},      {"lambda0", num(p.lambda0)},
                      {"a", num(p.a)},             {"b", num(p.b)},            {"alpha", num(p.alpha)},
                      {"g", num(p.g)},             {"A", num(p.A)},            {"A_c", num(p.A_c)},
                      {"c_W", num(p.c_W)},         {"viscosity", coeff(c.coeffs.viscosity)},
                      {"mobility", coeff(c.coeffs.mobility)}, {"diffusivity", coeff(c.coeffs.diffusivity)}};
  SchemeConfig& s = c.scheme;
  table["scheme"] = {
      {"h", num(s.h)},
      {"n_steps", integer(s.n_steps)},
      {"outer_tol", num(s.outer_tol)},
      {"outer_max", integer(s.outer_max)},
      {"newton_tol", num(s.newton_tol)},
      {"newton_max", integer(s.newton_max)},
      {"damping_fraction", num(s.damping_fraction)},
      {"max_halvings", integer(s.max_halvings)},
      {"linear_rel_tol", num(s.linear.rel_tol)},
      {"linear_abs_tol", num(s.linear.abs_tol)},
      {"regularization_n", integer(c.regularization_n)},
      {"splitting", choice(s.splitting, {{"standard", Splitting::standard}, {"convex", Splitting::convex}})},
      {"heat_convection",
       choice(s.heat_convection, {{"upwind", HeatConvection::upwind}, {"centered", HeatConvection::centered}})},
      {"face_mean", choice(s.face_mean, {{"arithmetic", FaceMean::arithmetic}, {"harmonic", FaceMean::harmonic}})}};
  table["initial"] = {{"phi", preset(c.phi0)}, {"theta", preset(c.theta0)}, {"u", preset(c.u0)}};
  table["boundary"] = {{"theta_b", preset(c.theta_b)}};
  OutputConfig& o = c.output;
  table["output"] = {{"directory", Setter([&o](const std::string& v, int) { o.directory = v; })},
                     {"snapshot_every", integer(o.snapshot_every)},
                     {"ledger_every", integer(o.ledger_every)},
                     {"snapshot_csv", flag(o.snapshot_csv)},
                     {"snapshot_vtk", flag(o.snapshot_vtk)}};

  std::string section, raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("malformed section header '" + text + "'", line);
      section = detail::trim(text.substr(1, text.size() - 2));
      if (!table.count(section)) throw ConfigError("unknown section '" + section + "'", line);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + text + "'", line);
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' outside of any section", line);
    auto& keys = table[section];
    auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line);
    if (!seen.insert(section + "." + key).second)
      throw ConfigError("duplicate key '" + key + "' in section [" + section + "]", line);
    if (value.empty()) throw ConfigError("key '" + key + "' has no value", line);
    try {
      it->second(value, line);
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      const std::string prefix = "line " + std::to_string(line) + ": ";
      if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
      throw ConfigError("key '" + key + "': " + msg, line);
    }
  }
  if (!seen.count("grid.nx") || !seen.count("grid.ny")) throw ConfigError("required keys grid.nx and grid.ny missing");
  if (nx < 2 || ny < 2) throw ConfigError("invariant nx >= 2, ny >= 2 violated");
  if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigError("invariant lx > 0, ly > 0 violated");
  c.grid = Grid(nx, ny, lx, ly);
  c.validate();
  // Presets are checked eagerly so a bad name fails at parse time.
  (void)make_phi0(c.phi0, c.grid);
  (void)make_theta0(c.theta0, c.grid);
  (void)make_u0(c.u0, c.grid);
  (void)make_theta_b(c.theta_b, c.grid);
  return c;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config_stream(in);
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config_stream(in);
}

}  // namespace thermocap
