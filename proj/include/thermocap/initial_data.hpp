#pragma once

// Named presets for initial data and boundary temperature.
//
// Random fields use std::mt19937_64 seeded with the configured 64-bit seed;
// each draw is mapped to [0, 1) as (x >> 11) * 2^-53, so the values do not
// depend on the standard library's distribution implementation.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "thermocap/error.hpp"
#include "thermocap/grid.hpp"

namespace thermocap {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 gen_;
};

/// A preset name plus numeric parameters, e.g. "bubble cx=4 cy=4 radius=2 width=1".
struct Preset {
  std::string name;
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
  void allow(std::initializer_list<const char*> keys, const std::string& what) const {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) throw ConfigError(what + " preset '" + name + "': unknown parameter '" + k + "'");
    }
  }
};

inline CellField make_phi0(const Preset& pr, const Grid& g) {
  CellField phi(g, 0.0, Bc::neumann);
  if (pr.name == "uniform") {
    pr.allow({"value"}, "phi");
    const double c = pr.get("value", 0.0);
    for (double& x : phi.v) x = c;
  } else if (pr.name == "spinodal") {
    pr.allow({"seed", "amplitude", "mean"}, "phi");
    Rng rng(std::uint64_t(pr.get("seed", 1.0)));
    const double amp = pr.get("amplitude", 0.05), m = pr.get("mean", 0.0);
    for (double& x : phi.v) x = m + rng.uniform(-amp, amp);
  } else if (pr.name == "bubble") {
    pr.allow({"cx", "cy", "radius", "width"}, "phi");
    const double cx = pr.get("cx", 0.5 * g.lx), cy = pr.get("cy", 0.5 * g.ly);
    const double r0 = pr.get("radius", 0.25 * std::min(g.lx, g.ly)), w = pr.get("width", 1.0);
    if (!(w > 0.0)) throw ConfigError("phi preset 'bubble': invariant width > 0 violated");
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double r = std::hypot(g.xc(i) - cx, g.yc(j) - cy);
        phi(i, j) = std::tanh((r0 - r) / (std::sqrt(2.0) * w));
      }
  } else {
    throw ConfigError("unknown phi preset '" + pr.name + "' (uniform | spinodal | bubble)");
  }
  return phi;
}

inline CellField make_theta0(const Preset& pr, const Grid& g) {
  CellField t(g);
  if (pr.name == "uniform") {
    pr.allow({"value"}, "theta");
    const double c = pr.get("value", 0.0);
    for (double& x : t.v) x = c;
  } else if (pr.name == "gradient") {
    pr.allow({"bottom", "top"}, "theta");
    const double b = pr.get("bottom", 0.0), tp = pr.get("top", 1.0);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) t(i, j) = b + (tp - b) * g.yc(j) / g.ly;
  } else if (pr.name == "hot_spot") {
    pr.allow({"base", "peak", "cx", "cy", "radius"}, "theta");
    const double base = pr.get("base", 0.0), peak = pr.get("peak", 1.0);
    const double cx = pr.get("cx", 0.5 * g.lx), cy = pr.get("cy", 0.5 * g.ly);
    const double r0 = pr.get("radius", 0.25 * std::min(g.lx, g.ly));
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double r2 = std::pow(g.xc(i) - cx, 2) + std::pow(g.yc(j) - cy, 2);
        t(i, j) = base + (peak - base) * std::exp(-r2 / (r0 * r0));
      }
  } else if (pr.name == "random") {
    pr.allow({"seed", "low", "high"}, "theta");
    Rng rng(std::uint64_t(pr.get("seed", 1.0)));
    const double lo = pr.get("low", 0.0), hi = pr.get("high", 1.0);
    for (double& x : t.v) x = rng.uniform(lo, hi);
  } else {
    throw ConfigError("unknown theta preset '" + pr.name + "' (uniform | gradient | hot_spot | random)");
  }
  return t;
}

/// Stream-function bump psi = amplitude exp(-r^2/radius^2) on interior corners.
inline FaceField make_u0(const Preset& pr, const Grid& g) {
  if (pr.name == "zero") {
    pr.allow({}, "u");
    return FaceField(g, 0.0);
  }
  std::vector<double> psi(n_stream_unknowns(g));
  if (pr.name == "vortex") {
    pr.allow({"amplitude", "cx", "cy", "radius"}, "u");
    const double amp = pr.get("amplitude", 0.1);
    const double cx = pr.get("cx", 0.5 * g.lx), cy = pr.get("cy", 0.5 * g.ly);
    const double r0 = pr.get("radius", 0.25 * std::min(g.lx, g.ly));
    for (int j = 1; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) {
        const double r2 = std::pow(i * g.dx() - cx, 2) + std::pow(j * g.dy() - cy, 2);
        psi[std::size_t(j - 1) * (g.nx - 1) + (i - 1)] = amp * r0 * std::exp(-r2 / (r0 * r0));
      }
  } else if (pr.name == "random") {
    pr.allow({"seed", "amplitude"}, "u");
    Rng rng(std::uint64_t(pr.get("seed", 1.0)));
    const double amp = pr.get("amplitude", 0.1);
    for (double& x : psi) x = amp * g.dx() * rng.uniform(-1.0, 1.0);
  } else {
    throw ConfigError("unknown u preset '" + pr.name + "' (zero | vortex | random)");
  }
  return curl(psi, g);
}

inline BoundaryTrace make_theta_b(const Preset& pr, const Grid& g) {
  if (pr.name == "constant") {
    pr.allow({"value"}, "theta_b");
    return BoundaryTrace::constant(g, pr.get("value", 0.0));
  }
  if (pr.name == "linear") {
    pr.allow({"bottom", "top"}, "theta_b");
    const double b = pr.get("bottom", 0.0), t = pr.get("top", 1.0);
    return BoundaryTrace::sample(g, [&](double, double y) { return b + (t - b) * y / g.ly; });
  }
  if (pr.name == "sinusoidal") {
    pr.allow({"mean", "amplitude", "modes"}, "theta_b");
    const double m = pr.get("mean", 0.5), a = pr.get("amplitude", 0.5), k = pr.get("modes", 1.0);
    return BoundaryTrace::sample(g, [&](double x, double) { return m + a * std::cos(M_PI * k * x / g.lx); });
  }
  throw ConfigError("unknown theta_b preset '" + pr.name + "' (constant | linear | sinusoidal)");
}

}  // namespace thermocap
