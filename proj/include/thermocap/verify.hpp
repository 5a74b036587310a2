#pragma once

// The acceptance suite: ten property checks over the whole pipeline, each
// returning a pass/fail verdict with a one-line measurement summary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thermocap/config.hpp"
#include "thermocap/diagnostics.hpp"
#include "thermocap/elliptic.hpp"
#include "thermocap/oracle.hpp"
#include "thermocap/run.hpp"

namespace thermocap::verify {

/// Thermocapillary reference: unmatched densities, bubble, hot spot, all
/// couplings active.
inline const char* kMarangoniConfig = R"(
[grid]
nx = 16
ny = 16
lx = 8
ly = 8
[physics]
rho1 = 1
rho2 = 2
b = 0.5
alpha = 0.5
g = 0.1
viscosity = quadratic_phi c0=0.5 c2=0.5
mobility = bounded_rational lo=0.5 hi=1 a_phi=1 a_theta=1
diffusivity = bounded_rational lo=0.5 hi=1 a_phi=1 a_theta=0
[scheme]
h = 0.05
n_steps = 50
[initial]
phi = bubble cx=4 cy=4 radius=2 width=0.7
theta = hot_spot base=0 peak=1 cx=3 cy=4 radius=2
u = vortex amplitude=0.05
[boundary]
theta_b = linear bottom=0 top=1
)";

/// Smooth problem for the temporal self-convergence study.
inline const char* kSmoothConfig = R"(
[grid]
nx = 16
ny = 16
lx = 8
ly = 8
[physics]
rho1 = 1
rho2 = 1.5
b = 0.3
alpha = 0.2
g = 0.1
[scheme]
h = 0.1
n_steps = 10
outer_tol = 1e-11
regularization_n = 10
[initial]
phi = bubble cx=4 cy=4 radius=2 width=1
theta = hot_spot base=0.2 peak=0.8 cx=3 cy=4 radius=2
u = vortex amplitude=0.1
[boundary]
theta_b = sinusoidal mean=0.5 amplitude=0.3 modes=1
)";

/// Matched densities, temperature-independent mobility, phase-independent
/// diffusivity: the setting in which the trajectory distance applies.
inline const char* kTwinConfig = R"(
[grid]
nx = 16
ny = 16
lx = 8
ly = 8
[physics]
rho1 = 1
rho2 = 1
b = 0.4
alpha = 0.3
g = 0.1
mobility = quadratic_phi c0=0.5 c2=0.5
diffusivity = bounded_rational lo=0.5 hi=1 a_phi=0 a_theta=1
[scheme]
h = 0.05
n_steps = 50
[initial]
phi = bubble cx=4 cy=4 radius=2 width=0.8
theta = hot_spot base=0 peak=1 cx=4 cy=3 radius=2
u = vortex amplitude=0.05
[boundary]
theta_b = linear bottom=0 top=1
)";

struct Outcome {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::optional<RunConfig> reference;  // replaces the Marangoni reference in criteria 4 and 10
  int random_configs = 10;
  int random_steps = 500;
  int spinodal_steps = 200;
  int agg_steps = 300;
};

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

/// Randomised configuration for the mass and temperature criteria: phase,
/// flow, coefficients and forcing drawn from the seed, theta in [0, 1].
inline RunConfig random_config(std::uint64_t seed, int steps) {
  Rng rng(seed);
  RunConfig c;
  c.grid = Grid(12, 12, 6.0, 6.0);
  c.phys.rho1 = rng.uniform(0.5, 2.0);
  c.phys.rho2 = rng.uniform(0.5, 2.0);
  c.phys.b = rng.uniform(0.0, 1.0);
  c.phys.alpha = rng.uniform(0.0, 1.0);
  c.phys.g = rng.uniform(0.0, 0.3);
  c.coeffs.viscosity = CoefficientModel::quadratic_phi(rng.uniform(0.3, 1.0), rng.uniform(0.0, 1.0));
  c.coeffs.mobility = CoefficientModel::bounded_rational(0.5, 1.0, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
  c.coeffs.diffusivity = CoefficientModel::bounded_rational(0.3, 1.0, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
  c.scheme.h = 0.05;
  c.scheme.n_steps = steps;
  c.phi0 = {"spinodal", {{"seed", double(seed % 100000)}, {"amplitude", rng.uniform(0.05, 0.5)}, {"mean", rng.uniform(-0.4, 0.4)}}};
  c.theta0 = {"random", {{"seed", double(seed % 100000 + 7)}, {"low", 0.0}, {"high", 1.0}}};
  c.u0 = {"random", {{"seed", double(seed % 100000 + 13)}, {"amplitude", rng.uniform(0.05, 0.3)}}};
  const double m = rng.uniform(0.3, 0.7);
  c.theta_b = {"sinusoidal", {{"mean", m}, {"amplitude", rng.uniform(0.0, std::min(m, 1.0 - m))}, {"modes", 2.0}}};
  c.output.ledger_every = 1;
  c.validate();
  return c;
}

class Suite {
 public:
  explicit Suite(Options o = {}) : opt_(std::move(o)) {}

  std::vector<Outcome> run_all(const std::function<void(const Outcome&)>& on_result = nullptr) {
    std::vector<Outcome> out;
    for (int id = 1; id <= 10; ++id) {
      Outcome r = run_one(id);
      if (on_result) on_result(r);
      out.push_back(std::move(r));
    }
    return out;
  }

  Outcome run_one(int id) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    r.id = id;
    try {
      switch (id) {
        case 1: r = mass_conservation(); break;
        case 2: r = temperature_bounds(); break;
        case 3: r = phase_bounds(); break;
        case 4: r = energy_identity(); break;
        case 5: r = agg_dissipativity(); break;
        case 6: r = degenerations(); break;
        case 7: r = elliptic_oracles(); break;
        case 8: r = temporal_convergence(); break;
        case 9: r = twin_dependence(); break;
        case 10: r = determinism(); break;
        default: throw Error("no criterion " + std::to_string(id));
      }
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.id = id;
    if (r.name.empty()) r.name = names()[id - 1];
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

  static std::vector<std::string> names() {
    return {"mass conservation",        "temperature maximum principle", "phase-field bounds",
            "discrete energy identity", "isothermal energy decay",       "structural degenerations",
            "elliptic oracles",         "temporal self-convergence",     "twin-run continuous dependence",
            "determinism"};
  }

 private:
  Options opt_;
  std::vector<RunResult> random_runs_;

  RunConfig reference() const { return opt_.reference ? *opt_.reference : parse_config_string(kMarangoniConfig); }

  const std::vector<RunResult>& random_runs() {
    if (random_runs_.empty()) {
      std::vector<std::function<RunResult()>> jobs;
      for (int n = 0; n < opt_.random_configs; ++n)
        jobs.push_back([this, n] { return run(random_config(1000 + 17 * std::uint64_t(n), opt_.random_steps)); });
      random_runs_ = run_jobs(jobs);
    }
    return random_runs_;
  }

  Outcome mass_conservation() {
    Outcome r{1, names()[0], false, {}, 0.0};
    double worst = 0.0;
    int failures = 0;
    std::size_t rows = 0;
    for (const RunResult& res : random_runs()) {
      if (res.status == RunStatus::solver_failure) ++failures;
      const double m0 = res.ledger.rows.front().mass;
      for (const LedgerRow& row : res.ledger.rows) worst = std::max(worst, std::abs(row.mass - m0));
      rows += res.ledger.rows.size() - 1;
    }
    const std::size_t expected = std::size_t(opt_.random_configs) * opt_.random_steps;
    r.passed = worst <= 1e-12 && failures == 0 && rows == expected;
    r.detail = "max |mean phi - mean phi0| = " + sci(worst) + " over " + std::to_string(rows) + "/" +
               std::to_string(expected) + " steps, " + std::to_string(failures) + " failed runs";
    return r;
  }

  Outcome temperature_bounds() {
    Outcome r{2, names()[1], false, {}, 0.0};
    double lo = INFINITY, hi = -INFINITY;
    std::size_t rows = 0;
    for (const RunResult& res : random_runs()) {
      for (const LedgerRow& row : res.ledger.rows) {
        lo = std::min(lo, row.theta_min);
        hi = std::max(hi, row.theta_max);
      }
      rows += res.ledger.rows.size() - 1;
    }
    const std::size_t expected = std::size_t(opt_.random_configs) * opt_.random_steps;
    r.passed = lo >= -1e-10 && hi <= 1.0 + 1e-10 && rows == expected;
    r.detail = "theta in [" + sci(lo) + ", " + sci(hi) + "] over " + std::to_string(rows) + " steps";
    return r;
  }

  Outcome phase_bounds() {
    Outcome r{3, names()[2], false, {}, 0.0};
    RunConfig c;
    c.grid = Grid(32, 32, 16.0, 16.0);
    // Long enough (T = 100) for the mixture to separate fully to the
    // potential's minima near +-0.96.
    c.scheme.h = 0.5;
    c.scheme.n_steps = opt_.spinodal_steps;
    c.regularization_n = 10;
    c.phi0 = {"spinodal", {{"seed", 42}, {"amplitude", 0.05}, {"mean", 0.0}}};
    const RunResult res = run(c);
    double pmax = 0.0;
    int halvings = 0;
    for (const LedgerRow& row : res.ledger.rows) pmax = std::max(pmax, row.phi_max_abs);
    for (const StepReport& rep : res.reports) halvings += rep.halvings;
    const bool complete = res.status == RunStatus::ok && int(res.reports.size()) == opt_.spinodal_steps;
    r.passed = complete && halvings == 0 && pmax <= 1.0 - 1e-12;
    r.detail = "max|phi| over the run = " + std::to_string(pmax) + ", at the end " +
               std::to_string(res.ledger.rows.back().phi_max_abs) + ", step retries " + std::to_string(halvings) +
               (complete ? "" : ", run failed: " + res.message);
    return r;
  }

  Outcome energy_identity() {
    Outcome r{4, names()[3], false, {}, 0.0};
    auto max_residual = [&](double scale) {
      RunConfig c = reference();
      c.scheme.outer_tol *= scale;
      c.scheme.newton_tol *= scale;
      c.scheme.linear.rel_tol *= scale;
      const RunResult res = run(c);
      if (res.status != RunStatus::ok) throw Error("reference run failed: " + res.message);
      double m = 0.0;
      for (const StepReport& rep : res.reports) m = std::max(m, rep.energy_identity_residual);
      return m;
    };
    const double base = max_residual(1.0);
    // At default tolerances the residual sits at rounding level; the
    // tightening test starts from tolerances where the solvers dominate.
    const double loose = max_residual(1e3), tight = max_residual(1e2);
    r.passed = base <= 1e-7 && loose / tight >= 5.0;
    r.detail = "max residual " + sci(base) + "; solver-limited " + sci(loose) + " -> " + sci(tight) +
               " after 10x tightening (ratio " + std::to_string(loose / tight) + ")";
    return r;
  }

  Outcome agg_dissipativity() {
    Outcome r{5, names()[4], false, {}, 0.0};
    RunConfig c = parse_config_string(kMarangoniConfig);
    c.phys.b = 0.0;
    c.phys.g = 0.0;
    c.theta0 = {"uniform", {{"value", 0.0}}};
    c.theta_b = {"constant", {{"value", 0.0}}};
    c.phi0 = {"spinodal", {{"seed", 3}, {"amplitude", 0.3}, {"mean", 0.0}}};
    c.scheme.n_steps = opt_.agg_steps;
    const RunResult res = run(c);
    int increases = 0;
    double worst = -INFINITY;
    for (std::size_t k = 1; k < res.ledger.rows.size(); ++k) {
      const double e0 = res.ledger.rows[k - 1].energy.total, e1 = res.ledger.rows[k].energy.total;
      const double rel = (e1 - e0) / std::max(1.0, std::abs(e0));
      worst = std::max(worst, rel);
      if (rel > 1e-11) ++increases;
    }
    const bool complete = res.status == RunStatus::ok && int(res.ledger.rows.size()) == opt_.agg_steps + 1;
    r.passed = complete && increases == 0;
    r.detail = std::to_string(increases) + " increases in " + std::to_string(res.ledger.rows.size() - 1) +
               " steps, largest relative change " + sci(worst) + (complete ? "" : ", run failed: " + res.message);
    return r;
  }

  Outcome degenerations() {
    Outcome r{6, names()[5], false, {}, 0.0};
    const Grid g(8, 8, 4.0, 4.0);
    Rng rng(99);
    auto random_cells = [&](double lo, double hi) {
      CellField f(g, 0.0, Bc::neumann);
      for (double& x : f.v) x = rng.uniform(lo, hi);
      return f;
    };
    int nonzero_j = 0, nonzero_m = 0;
    for (int trial = 0; trial < 20; ++trial) {
      PhysParams p;
      p.rho1 = p.rho2 = rng.uniform(0.5, 3.0);
      p.b = 0.0;
      const CellField phi = random_cells(-0.9, 0.9), mu = random_cells(-2.0, 2.0), th = random_cells(0.0, 1.0);
      const FaceField m = to_faces(random_cells(0.5, 1.5), g);
      const FaceField J = flux_J(p, m, gradient(mu, g));
      for (double x : J.x) nonzero_j += x != 0.0;
      for (double x : J.y) nonzero_j += x != 0.0;
      const FaceField M = marangoni_force(p, th, phi, g);
      for (double x : M.x) nonzero_m += x != 0.0;
      for (double x : M.y) nonzero_m += x != 0.0;
      // The assembled momentum transport carries no J contribution either.
      Model model = Model::make(g, p, Coefficients{}, BoundaryTrace::constant(g, 0.5));
      State sk;
      sk.u = FaceField(g, 0.0);
      sk.phi = phi;
      sk.mu = mu;
      sk.vartheta = CellField(g, BoundaryTrace::constant(g, 0.0));
      sk.p = CellField(g);
      const FrozenCoefficients fc = freeze(sk, model, FaceMean::arithmetic);
      const MomentumAssembly a = assemble_momentum(sk, phi, mu, FaceField(g, 0.0), fc, model, 0.1);
      if (a.op.flux) ++nonzero_j;
    }
    r.passed = nonzero_j == 0 && nonzero_m == 0;
    r.detail = std::to_string(nonzero_j) + " nonzero flux entries with rho1 = rho2, " + std::to_string(nonzero_m) +
               " nonzero Marangoni entries with b = 0 (20 random trials)";
    return r;
  }

  Outcome elliptic_oracles() {
    Outcome r{7, names()[6], false, {}, 0.0};
    const SolverConfig tight{1e-13, 1e-300, 0};
    double dense = 0.0, trip = 0.0;
    {
      const Grid g(4, 4, 2.0, 2.0);
      Rng rng(7);
      auto rnd = [&](const Grid& gg, double lo, double hi) {
        CellField f(gg);
        for (double& x : f.v) x = rng.uniform(lo, hi);
        return f;
      };
      auto rel = [](const oracle::Col& a, const std::vector<double>& b) {
        return (a - oracle::col(b)).norm() / std::max(1.0, a.norm());
      };
      CellField f = rnd(g, -1.0, 1.0);
      krylov::project_zero_mean(f.v);
      dense = std::max(dense, rel(oracle::neumann_solve(FaceField(g, 1.0), oracle::col(f.v), g),
                                  neumann_inverse(f, g, tight).v));
      const CellField q = rnd(g, -0.9, 0.9);
      const CoefficientModel m = CoefficientModel::quadratic_phi(0.5, 1.0);
      const FaceField mf = to_faces(m.evaluate(q, CellField(g), g), g);
      dense = std::max(dense, rel(oracle::neumann_solve(mf, oracle::col(f.v), g),
                                  weighted_neumann_inverse(q, m, f, g, tight).v));
      BoundaryTrace t = BoundaryTrace::constant(g, 0.0);
      for (auto* v : {&t.left, &t.right, &t.bottom, &t.top})
        for (double& x : *v) x = rng.uniform(-1.0, 1.0);
      dense = std::max(dense, rel(oracle::dirichlet_solve(FaceField(g, 1.0), 0.0, oracle::Col::Zero(16), t, g),
                                  harmonic_extension(t, g, tight).v));
      MomentumOperator op{scaled(10.0, to_faces(rnd(g, 1.0, 2.0), g)), rnd(g, 0.5, 1.5), std::nullopt, false};
      FaceField rhs(g);
      for (double& x : rhs.x) x = rng.uniform(-1.0, 1.0);
      for (double& x : rhs.y) x = rng.uniform(-1.0, 1.0);
      rhs.zero_boundary_normal();
      const StokesResult it = stokes_solve(op, rhs, g, tight);
      const oracle::StokesSolution ds = oracle::stokes_solve(op, rhs, g);
      const FaceField du = difference(it.u, ds.u);
      dense = std::max(dense, du.max_abs() / std::max(1.0, ds.u.max_abs()));
      dense = std::max(dense, rel(ds.p, it.p.v));
    }
    {
      const Grid g(16, 16, 8.0, 8.0);
      Rng rng(8);
      CellField w(g, 0.0, Bc::neumann);
      for (double& x : w.v) x = rng.uniform(-1.0, 1.0);
      krylov::project_zero_mean(w.v);
      auto trip_cells = [&](const CellField& back) {
        return norm(difference(back, w), g) / norm(w, g);
      };
      CellField lw = laplacian(w, g);
      for (double& x : lw.v) x = -x;
      trip = std::max(trip, trip_cells(neumann_inverse(lw, g, tight)));
      const CellField q = [&] {
        CellField c(g);
        for (double& x : c.v) x = rng.uniform(-0.9, 0.9);
        return c;
      }();
      const CoefficientModel m = CoefficientModel::quadratic_phi(0.5, 1.0);
      const FaceField mf = to_faces(m.evaluate(q, CellField(g), g), g);
      CellField mw = divergence(hadamard(mf, gradient(w, g)), g);
      for (double& x : mw.v) x = -x;
      trip = std::max(trip, trip_cells(weighted_neumann_inverse(q, m, mw, g, tight)));
      // Harmonic extension: Laplacian of the extension vanishes and the
      // Dirichlet solve inverts the Dirichlet Laplacian.
      const BoundaryTrace t = BoundaryTrace::sample(g, [](double x, double y) { return std::sin(x) * std::cosh(0.3 * y); });
      CellField ext = harmonic_extension(t, g, tight);
      trip = std::max(trip, laplacian(ext, g).max_abs() * g.dx() * g.dx() / std::max(1.0, ext.max_abs()));
      CellField wd(g, t);
      wd.v = w.v;
      CellField ld = laplacian(wd, g);
      for (double& x : ld.v) x = -x;
      trip = std::max(trip, trip_cells(dirichlet_solve(FaceField(g, 1.0), 0.0, ld, t, g, tight)));
      std::vector<double> psi(n_stream_unknowns(g));
      for (double& x : psi) x = rng.uniform(-1.0, 1.0);
      const FaceField u = curl(psi, g);
      MomentumOperator op{FaceField(g, 0.0), CellField(g, 1.0), std::nullopt, true};
      const FaceField back = stokes_inverse(op.apply(u, g), g, tight);
      trip = std::max(trip, norm(difference(back, u), g) / norm(u, g));
    }
    r.passed = dense <= 1e-8 && trip <= 1e-8;
    r.detail = "dense 4x4 mismatch " + sci(dense) + ", 16x16 round trip " + sci(trip);
    return r;
  }

  Outcome temporal_convergence() {
    Outcome r{8, names()[7], false, {}, 0.0};
    const ConvergenceReport rep = convergence_study(parse_config_string(kSmoothConfig));
    r.passed = rep.observed_order >= 0.9;
    r.detail = "errors " + sci(rep.errors[0]) + ", " + sci(rep.errors[1]) + ", " + sci(rep.errors[2]) +
               "; observed order " + std::to_string(rep.observed_order);
    return r;
  }

  Outcome twin_dependence() {
    Outcome r{9, names()[8], false, {}, 0.0};
    const RunConfig c = parse_config_string(kTwinConfig);
    const TwinReport zero = twin_study(c, 0.0);
    double zmax = 0.0;
    for (double y : zero.distance_eps) zmax = std::max(zmax, y);
    const TwinReport rep = twin_study(c, 1e-3);
    r.passed = zmax <= 1e-12 && rep.ratio() >= 2.0;
    r.detail = "Y(T) eps=1e-3: " + sci(rep.distance_eps.back()) + ", eps/2: " + sci(rep.distance_half.back()) +
               ", ratio " + std::to_string(rep.ratio()) + "; eps=0 max " + sci(zmax);
    return r;
  }

  Outcome determinism() {
    Outcome r{10, names()[9], false, {}, 0.0};
    const RunConfig c = reference();
    std::ostringstream a, b;
    run(c).ledger.write_csv(a);
    run(c).ledger.write_csv(b);
    r.passed = a.str() == b.str() && !a.str().empty();
    r.detail = r.passed ? "ledgers identical (" + std::to_string(a.str().size()) + " bytes)" : "ledgers differ";
    return r;
  }
};

}  // namespace thermocap::verify
