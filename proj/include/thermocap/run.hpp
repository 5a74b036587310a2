#pragma once

// Stepping with the h-halving retry policy, invariant monitoring, whole runs,
// the temporal self-convergence study and twin runs.

#include <cmath>
#include <cstdlib>
#include <functional>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "thermocap/config.hpp"
#include "thermocap/diagnostics.hpp"
#include "thermocap/initial_data.hpp"
#include "thermocap/scheme.hpp"

namespace thermocap {

/// Advances sk by cfg.h. On failure the interval is retried with 2, 4, ...
/// substeps, up to cfg.max_halvings halvings.
inline State step(const State& sk, const Model& model, const SchemeConfig& cfg, StepReport& rep) {
  for (int j = 0;; ++j) {
    const int sub = 1 << j;
    const double h = cfg.h / sub;
    StepReport acc;
    acc.halvings = j;
    try {
      State s = sk;
      for (int n = 0; n < sub; ++n) {
        StepReport r;
        State next = step_once(s, model, cfg, h, r);
        acc.outer_iters += r.outer_iters;
        acc.newton_iters += r.newton_iters;
        acc.last_increment = r.last_increment;
        acc.newton_residual = std::max(acc.newton_residual, r.newton_residual);
        acc.momentum_residual = std::max(acc.momentum_residual, r.momentum_residual);
        acc.heat = r.heat;
        acc.momentum = r.momentum;
        acc.energy_identity_residual =
            std::max(acc.energy_identity_residual, energy_identity_residual(s, next, model, cfg));
        s = std::move(next);
      }
      s.k = sk.k + 1;
      s.time = sk.time + cfg.h;
      rep = acc;
      return s;
    } catch (const StepFailure& e) {
      if (j >= cfg.max_halvings) {
        StepReport r = e.report();
        r.halvings = j;
        rep = r;
        throw StepFailure(std::string(e.what()) + " after " + std::to_string(j) + " halvings", r);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Invariants

struct InvariantBounds {
  double mass0 = 0.0;
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  double mass_tol = 1e-12;
  double theta_tol = 1e-10;
  double barrier = 1.0 - 1e-12;
  double identity_tol = 1e-7;

  static InvariantBounds from_initial(const State& s0, const Model& model) {
    InvariantBounds b;
    b.mass0 = mean(s0.phi);
    const CellField t = s0.theta(model);
    b.theta_lo = std::min(t.min(), model.theta_b.min());
    b.theta_hi = std::max(t.max(), model.theta_b.max());
    return b;
  }
};

/// Sets the report flags and throws InvariantViolation for the first breach.
inline void check_invariants(const State& s, const Model& model, const InvariantBounds& b, StepReport& rep) {
  const double drift = std::abs(mean(s.phi) - b.mass0);
  const double pmax = s.phi.max_abs();
  const auto [tmin, tmax] = theta_extrema(s, model);
  rep.mass_ok = drift <= b.mass_tol;
  rep.barrier_ok = pmax <= b.barrier;
  rep.theta_bounds_ok = tmin >= b.theta_lo - b.theta_tol && tmax <= b.theta_hi + b.theta_tol;
  auto num = [](double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6e", x);
    return std::string(buf);
  };
  if (!s.u.all_finite() || !s.phi.all_finite() || !s.mu.all_finite() || !s.vartheta.all_finite())
    throw InvariantViolation("finite state", "non-finite value at step " + std::to_string(s.k));
  if (!rep.mass_ok) throw InvariantViolation("mass conservation", "mean(phi) drift " + num(drift));
  if (!rep.barrier_ok) throw InvariantViolation("phase-field barrier |phi| < 1", "max|phi| = " + num(pmax));
  if (!rep.theta_bounds_ok)
    throw InvariantViolation("temperature maximum principle", "theta in [" + num(tmin) + ", " + num(tmax) +
                                                                  "], allowed [" + num(b.theta_lo) + ", " +
                                                                  num(b.theta_hi) + "]");
  if (!(rep.energy_identity_residual <= b.identity_tol))
    throw InvariantViolation("discrete energy identity", "residual " + num(rep.energy_identity_residual));
}

// ---------------------------------------------------------------------------
// Runs

struct Problem {
  Model model;
  State initial;
};

inline Problem make_problem(const RunConfig& cfg, int regularization_n = 0) {
  const Grid& g = cfg.grid;
  Model model = Model::make(g, cfg.phys, cfg.coeffs, make_theta_b(cfg.theta_b, g));
  const int n = regularization_n > 0 ? regularization_n : cfg.effective_n();
  State s0 = initial_state(model, make_u0(cfg.u0, g), make_phi0(cfg.phi0, g), make_theta0(cfg.theta0, g), n);
  s0.h = cfg.scheme.h;
  return {std::move(model), std::move(s0)};
}

enum class RunStatus { ok = 0, invariant_violation = 2, solver_failure = 3 };

struct RunResult {
  RunLedger ledger;
  State final_state;
  RunStatus status = RunStatus::ok;
  std::string message;
  std::vector<StepReport> reports;
};

using StepObserver = std::function<void(const State&, const StepReport&)>;

/// Runs cfg.scheme.n_steps steps from the problem's initial state. Failures
/// end the run early; the ledger always contains every row recorded so far.
inline RunResult run(const Problem& pb, const RunConfig& cfg, const StepObserver& observe = nullptr) {
  const Model& model = pb.model;
  const SchemeConfig& sc = cfg.scheme;
  RunResult out;
  const InvariantBounds bounds = InvariantBounds::from_initial(pb.initial, model);
  State s = pb.initial;
  out.ledger.rows.push_back(ledger_row(s, model));
  if (observe) observe(s, StepReport{});
  for (int k = 0; k < sc.n_steps; ++k) {
    StepReport rep;
    try {
      State next = step(s, model, sc, rep);
      s = std::move(next);
      check_invariants(s, model, bounds, rep);
    } catch (const StepFailure& e) {
      out.reports.push_back(e.report());
      out.status = RunStatus::solver_failure;
      out.message = e.what();
      break;
    } catch (const InvariantViolation& e) {
      out.reports.push_back(rep);
      LedgerRow row = ledger_row(s, model);
      row.identity_residual = rep.energy_identity_residual;
      row.outer_iters = rep.outer_iters;
      row.newton_iters = rep.newton_iters;
      out.ledger.rows.push_back(row);
      out.status = RunStatus::invariant_violation;
      out.message = e.what();
      break;
    }
    out.reports.push_back(rep);
    if ((k + 1) % cfg.output.ledger_every == 0 || k + 1 == sc.n_steps) {
      LedgerRow row = ledger_row(s, model);
      row.identity_residual = rep.energy_identity_residual;
      row.outer_iters = rep.outer_iters;
      row.newton_iters = rep.newton_iters;
      out.ledger.rows.push_back(row);
    }
    if (observe) observe(s, rep);
  }
  out.final_state = std::move(s);
  return out;
}

inline RunResult run(const RunConfig& cfg, const StepObserver& observe = nullptr) {
  return run(make_problem(cfg), cfg, observe);
}

// ---------------------------------------------------------------------------
// Concurrency for independent trajectories

inline unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("THERMOCAP_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) cap = unsigned(v);
  }
  return cap;
}

/// Evaluates jobs[i]() for every i, at most thread_cap() at a time. Results
/// keep the job order.
template <class T>
std::vector<T> run_jobs(const std::vector<std::function<T()>>& jobs) {
  std::vector<T> out(jobs.size());
  const std::size_t cap = thread_cap();
  for (std::size_t start = 0; start < jobs.size(); start += cap) {
    const std::size_t end = std::min(jobs.size(), start + cap);
    if (cap == 1) {
      out[start] = jobs[start]();
      continue;
    }
    std::vector<std::future<T>> fut;
    for (std::size_t i = start; i < end; ++i) fut.push_back(std::async(std::launch::async, jobs[i]));
    for (std::size_t i = start; i < end; ++i) out[i] = fut[i - start].get();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Temporal self-convergence

struct ConvergenceReport {
  std::vector<double> h;       // h, h/2, h/4, h/8
  std::vector<double> errors;  // end-state distance to the h/8 run (first three)
  std::vector<double> orders;  // log2 of consecutive error ratios
  double observed_order = 0.0; // smallest of `orders`
  double end_time = 0.0;
};

inline double state_distance(const State& a, const State& b, const Grid& g) {
  const FaceField du = difference(a.u, b.u);
  const CellField dp = difference(a.phi, b.phi);
  const CellField dt = difference(a.vartheta, b.vartheta);
  return std::sqrt(inner(du, du, g) + inner(dp, dp, g) + inner(dt, dt, g));
}

/// Runs to T = n_steps h with h, h/2, h/4, h/8. The initial-data
/// regularisation parameter stays at the base value so all runs share data.
inline ConvergenceReport convergence_study(const RunConfig& base) {
  const int n_reg = base.effective_n();
  std::vector<std::function<State()>> jobs;
  for (int level = 0; level < 4; ++level) {
    jobs.push_back([&base, n_reg, level] {
      RunConfig c = base;
      c.scheme.h = base.scheme.h / (1 << level);
      c.scheme.n_steps = base.scheme.n_steps << level;
      c.output.ledger_every = c.scheme.n_steps;
      RunResult r = run(make_problem(c, n_reg), c);
      if (r.status != RunStatus::ok) throw StepFailure("convergence run failed: " + r.message, {});
      return r.final_state;
    });
  }
  const std::vector<State> ends = run_jobs(jobs);
  ConvergenceReport rep;
  rep.end_time = base.scheme.h * base.scheme.n_steps;
  for (int level = 0; level < 4; ++level) rep.h.push_back(base.scheme.h / (1 << level));
  for (int level = 0; level < 3; ++level) rep.errors.push_back(state_distance(ends[level], ends[3], base.grid));
  rep.observed_order = INFINITY;
  for (int level = 0; level + 1 < 3; ++level) {
    const double o = std::log2(rep.errors[level] / rep.errors[level + 1]);
    rep.orders.push_back(o);
    rep.observed_order = std::min(rep.observed_order, o);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Twin runs

/// Rejects configurations outside the structural setting of the distance.
inline void check_twin_compatible(const RunConfig& c) {
  if (c.phys.rho1 != c.phys.rho2) throw CompatibilityError("twin mode requires matched densities rho1 = rho2");
  if (c.coeffs.mobility.depends_on_theta())
    throw CompatibilityError("twin mode requires a mobility independent of temperature");
  if (c.coeffs.diffusivity.depends_on_phi())
    throw CompatibilityError("twin mode requires a thermal diffusivity independent of phi");
}

/// Fixed perturbation direction: zero-mean phase component, divergence-free
/// velocity, temperature vanishing on the walls.
struct Perturbation {
  FaceField u;
  CellField phi;
  CellField vartheta;

  static Perturbation make(const Grid& g, std::uint64_t seed) {
    Rng rng(seed);
    Perturbation d;
    std::vector<double> psi(n_stream_unknowns(g));
    for (double& x : psi) x = g.dx() * rng.uniform(-1.0, 1.0);
    d.u = curl(psi, g);
    d.phi = CellField(g, 0.0, Bc::neumann);
    for (double& x : d.phi.v) x = rng.uniform(-1.0, 1.0);
    krylov::project_zero_mean(d.phi.v);
    d.vartheta = CellField(g, BoundaryTrace::constant(g, 0.0));
    for (double& x : d.vartheta.v) x = rng.uniform(-1.0, 1.0);
    return d;
  }
};

inline State perturbed(const State& s, const Perturbation& d, double eps, const Model& model) {
  State p = s;
  axpy(eps, d.u, p.u);
  axpy(eps, d.phi, p.phi);
  axpy(eps, d.vartheta, p.vartheta);
  if (p.phi.max_abs() >= 1.0) throw DomainError("twin perturbation pushes phi out of (-1, 1)");
  p.mu = chemical_potential(p.phi, model.phys, model.grid);
  return p;
}

struct TwinReport {
  double eps = 0.0;
  std::vector<double> time;
  std::vector<double> distance_eps;   // Y between base and eps-perturbed runs
  std::vector<double> distance_half;  // Y between base and eps/2-perturbed runs
  double ratio() const { return distance_eps.back() / distance_half.back(); }
};

inline TwinReport twin_study(const RunConfig& cfg, double eps, std::uint64_t seed = 20240917) {
  check_twin_compatible(cfg);
  const Problem pb = make_problem(cfg);
  const Perturbation d = Perturbation::make(cfg.grid, seed);
  std::vector<std::function<std::vector<State>()>> jobs;
  for (double e : {0.0, eps, 0.5 * eps}) {
    jobs.push_back([&pb, &cfg, &d, e] {
      std::vector<State> traj;
      traj.push_back(perturbed(pb.initial, d, e, pb.model));
      for (int k = 0; k < cfg.scheme.n_steps; ++k) {
        StepReport rep;
        traj.push_back(step(traj.back(), pb.model, cfg.scheme, rep));
      }
      return traj;
    });
  }
  const auto trajs = run_jobs(jobs);
  TwinReport rep;
  rep.eps = eps;
  for (std::size_t k = 0; k < trajs[0].size(); ++k) {
    rep.time.push_back(trajs[0][k].time);
    rep.distance_eps.push_back(uniqueness_distance(trajs[0][k], trajs[1][k], pb.model));
    rep.distance_half.push_back(uniqueness_distance(trajs[0][k], trajs[2][k], pb.model));
  }
  return rep;
}

}  // namespace thermocap
