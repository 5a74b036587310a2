#pragma once

// Partially implicit time step for the Navier-Stokes / Cahn-Hilliard / heat
// system. Coefficients (nu, m, kappa, buoyancy, Marangoni temperature) are
// frozen at level k; phi, mu, u, vartheta are implicit. The coupled step is
// resolved by a block Gauss-Seidel fixed point
//     Cahn-Hilliard (barrier Newton)  ->  momentum (Stokes-type)  ->  heat
// repeated until the combined relative increment drops below outer_tol.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thermocap/elliptic.hpp"
#include "thermocap/grid.hpp"
#include "thermocap/krylov.hpp"
#include "thermocap/physics.hpp"

namespace thermocap {

/// mu + c_W (phi + phi^k) = -Delta phi + F'(phi)   (standard), or
/// mu + 2 c_W phi^k      = -Delta phi + F'(phi)   (convex).
enum class Splitting { standard, convex };
enum class HeatConvection { upwind, centered };

struct SchemeConfig {
  double h = 0.01;
  int n_steps = 100;
  double outer_tol = 1e-9;
  int outer_max = 50;
  double newton_tol = 1e-11;
  int newton_max = 40;
  double damping_fraction = 0.9;
  int max_halvings = 3;
  Splitting splitting = Splitting::standard;
  HeatConvection heat_convection = HeatConvection::upwind;
  FaceMean face_mean = FaceMean::arithmetic;
  SolverConfig linear{1e-12, 1e-15, 0};

  void validate() const {
    if (!(h > 0.0)) throw ConfigError("invariant h > 0 violated");
    if (n_steps < 0) throw ConfigError("invariant n_steps >= 0 violated");
    if (!(outer_tol > 0.0) || !(newton_tol > 0.0)) throw ConfigError("invariant tolerances > 0 violated");
    if (outer_max < 1 || newton_max < 1) throw ConfigError("invariant outer_max >= 1, newton_max >= 1 violated");
    if (!(damping_fraction > 0.0 && damping_fraction < 1.0))
      throw ConfigError("invariant 0 < damping_fraction < 1 violated");
    if (max_halvings < 0) throw ConfigError("invariant max_halvings >= 0 violated");
  }
};

/// Everything time-independent: grid, constants, coefficient models, the
/// boundary temperature and its (cached) harmonic extension.
struct Model {
  Grid grid;
  PhysParams phys;
  Coefficients coeffs;
  BoundaryTrace theta_b;
  CellField Theta_b;  // harmonic extension of theta_b

  static Model make(const Grid& g, const PhysParams& p, const Coefficients& c, const BoundaryTrace& tb,
                    const SolverConfig& cfg = {1e-13, 1e-15, 0}) {
    p.validate();
    c.viscosity.validate();
    c.mobility.validate();
    c.diffusivity.validate();
    return Model{g, p, c, tb, harmonic_extension(tb, g, cfg)};
  }
};

struct State {
  FaceField u;
  CellField p;
  CellField phi;
  CellField mu;
  CellField vartheta;  // theta - Theta_b, homogeneous Dirichlet
  int k = 0;
  double time = 0.0;
  double h = 0.0;

  /// theta = vartheta + Theta_b, tagged with the boundary temperature.
  CellField theta(const Model& m) const {
    CellField t(m.grid, m.theta_b);
    for (std::size_t i = 0; i < t.v.size(); ++i) t.v[i] = vartheta.v[i] + m.Theta_b.v[i];
    return t;
  }
};

struct StepReport {
  int outer_iters = 0;
  int newton_iters = 0;
  int halvings = 0;
  double last_increment = 0.0;
  double newton_residual = 0.0;
  double momentum_residual = 0.0;
  SolveReport heat;
  SolveReport momentum;
  double energy_identity_residual = 0.0;
  bool barrier_ok = true;
  bool mass_ok = true;
  bool theta_bounds_ok = true;
};

class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, StepReport r) : Error(what), report_(r) {}
  const StepReport& report() const { return report_; }

 private:
  StepReport report_;
};

// ---------------------------------------------------------------------------
// Frozen level-k data

struct FrozenCoefficients {
  CellField theta_k;
  CellField nu;    // cells
  FaceField m;     // faces
  FaceField kappa; // faces
  FaceField rho_k; // faces
};

inline FrozenCoefficients freeze(const State& s, const Model& model, FaceMean mode) {
  const Grid& g = model.grid;
  FrozenCoefficients f;
  f.theta_k = s.theta(model);
  f.nu = model.coeffs.viscosity.evaluate(s.phi, f.theta_k, g);
  f.m = to_faces(model.coeffs.mobility.evaluate(s.phi, f.theta_k, g), g, mode);
  f.kappa = to_faces(model.coeffs.diffusivity.evaluate(s.phi, f.theta_k, g), g, mode);
  f.rho_k = face_density(model.phys, s.phi, g);
  return f;
}

// ---------------------------------------------------------------------------
// Initial data regularisation

/// One implicit heat step of length 1/N with zero-flux walls, then a clamp to
/// [-1 + 1e-9, 1 - 1e-9] with the mean restored.
inline CellField regularize_phi0(const CellField& phi0, int N, const Grid& g, const SolverConfig& cfg = {1e-13, 1e-15, 0}) {
  if (N < 1) throw ConfigError("regularize_phi0: N must be positive");
  const double m0 = mean(phi0);
  if (!(std::abs(m0) < 1.0)) throw DomainError("regularize_phi0: mean of phi0 must lie in (-1, 1)");
  if (phi0.max_abs() > 1.0) throw DomainError("regularize_phi0: |phi0| must not exceed 1");
  const double tau = 1.0 / N;
  const FaceField one(g, 1.0);
  auto op = [&](const Vec& x) {
    CellField r = detail::neg_weighted_neumann(one, detail::from_vec(g, x), g);
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] = x[k] + tau * r.v[k];
    return r.v;
  };
  SolveResult res = cg_solve(op, phi0.v, cfg, phi0.v, nullptr, "phi0 regularisation");
  CellField phi = detail::from_vec(g, std::move(res.x), Bc::neumann);

  constexpr double eps_b = 1e-9;
  for (int pass = 0; pass < 50; ++pass) {
    const double shift = m0 - mean(phi);
    for (double& x : phi.v) x += shift;
    bool clamped = false;
    for (double& x : phi.v) {
      if (x > 1.0 - eps_b) x = 1.0 - eps_b, clamped = true;
      if (x < -1.0 + eps_b) x = -1.0 + eps_b, clamped = true;
    }
    if (!clamped) break;
  }
  const double shift = m0 - mean(phi);
  for (double& x : phi.v) x += shift;
  return phi;
}

/// Solves -(1/N) Delta w + w = theta0 with w = theta_b on the walls and
/// returns vartheta0 = w - Theta_b.
inline CellField regularize_theta0(const CellField& theta0, const BoundaryTrace& theta_b, const CellField& Theta_b,
                                   int N, const Grid& g, const SolverConfig& cfg = {1e-13, 1e-15, 0}) {
  if (N < 1) throw ConfigError("regularize_theta0: N must be positive");
  if (!theta0.all_finite()) throw DomainError("regularize_theta0: non-finite theta0");
  const CellField w = dirichlet_solve(FaceField(g, 1.0 / N), 1.0, theta0, theta_b, g, cfg);
  CellField vt(g, BoundaryTrace::constant(g, 0.0));
  for (std::size_t k = 0; k < vt.v.size(); ++k) vt.v[k] = w.v[k] - Theta_b.v[k];
  return vt;
}

/// mu = -Delta phi + W'(phi), the chemical potential of a phase field.
inline CellField chemical_potential(const CellField& phi, const PhysParams& p, const Grid& g) {
  CellField ph = phi;
  ph.bc = Bc::neumann;
  CellField mu = laplacian(ph, g);
  const Potential pot(p);
  for (std::size_t k = 0; k < mu.v.size(); ++k) mu.v[k] = -mu.v[k] + pot.W_prime(phi.v[k]);
  mu.bc = Bc::neumann;
  return mu;
}

/// Level-0 state from raw initial data: regularises phi0 and theta0 with N.
inline State initial_state(const Model& model, const FaceField& u0, const CellField& phi0, const CellField& theta0,
                           int N) {
  const Grid& g = model.grid;
  State s;
  s.u = u0;
  s.u.zero_boundary_normal();
  s.p = CellField(g, 0.0, Bc::neumann);
  s.phi = regularize_phi0(phi0, N, g);
  s.mu = chemical_potential(s.phi, model.phys, g);
  s.vartheta = regularize_theta0(theta0, model.theta_b, model.Theta_b, N, g);
  return s;
}

// ---------------------------------------------------------------------------
// Cahn-Hilliard subproblem

struct CHResult {
  CellField phi;
  CellField mu;
  int newton_iters = 0;
  double residual = 0.0;
};

struct CHResiduals {
  CellField r1;  // (phi - phi^k)/h + u.grad phi^k - div(m grad mu)
  CellField r2;  // mu + explicit - (-Delta phi) - F'(phi)
};

inline CHResiduals ch_residuals(const CellField& phi, const CellField& mu, const State& sk, const FaceField& u,
                                const FaceField& m_face, const Model& model, const SchemeConfig& cfg, double h) {
  const Grid& g = model.grid;
  const Potential pot(model.phys);
  CHResiduals r;
  r.r1 = convective_term(u, sk.phi, g);
  CellField mun = mu;
  mun.bc = Bc::neumann;
  const CellField dmu = divergence(hadamard(m_face, gradient(mun, g)), g);
  CellField phn = phi;
  phn.bc = Bc::neumann;
  const CellField lap = laplacian(phn, g);
  r.r2 = CellField(g);
  const double cw = model.phys.c_W;
  for (std::size_t k = 0; k < r.r1.v.size(); ++k) {
    r.r1.v[k] += (phi.v[k] - sk.phi.v[k]) / h - dmu.v[k];
    const double expl = cfg.splitting == Splitting::standard ? cw * (phi.v[k] + sk.phi.v[k]) : 2.0 * cw * sk.phi.v[k];
    r.r2.v[k] = mu.v[k] + expl + lap.v[k] - pot.F_prime(phi.v[k]);
  }
  return r;
}

inline double ch_residual_norm(const CHResiduals& r, double h) {
  return std::max(detail::rms(r.r1.v) * h, detail::rms(r.r2.v));
}

/// Barrier Newton for the implicit Cahn-Hilliard pair. Each step solves
///   (I + h A B) dphi = -h r1 + h A r2,   dmu = -r2 + B dphi
/// with A = -div(m grad), B = -Delta + diag(F'' - c_W) (or F'' for the convex
/// variant). I + h A B is self-adjoint and positive in the B-metric, so CG
/// in that metric applies. Steps are damped to cover at most
/// damping_fraction of the distance to +-1 in every cell.
inline CHResult ch_subproblem(const State& sk, const FaceField& u_iter, const FaceField& m_face, const Model& model,
                              const SchemeConfig& cfg, double h, const CellField* phi_guess = nullptr,
                              const CellField* mu_guess = nullptr) {
  const Grid& g = model.grid;
  const Potential pot(model.phys);
  const double target_mean = mean(sk.phi);

  CHResult out;
  out.phi = phi_guess ? *phi_guess : sk.phi;
  out.phi.bc = Bc::neumann;
  if (mu_guess) {
    out.mu = *mu_guess;
  } else {
    CellField lap = laplacian(out.phi, g);
    out.mu = CellField(g, 0.0, Bc::neumann);
    const double cw = model.phys.c_W;
    for (std::size_t k = 0; k < lap.v.size(); ++k) {
      const double expl =
          cfg.splitting == Splitting::standard ? cw * (out.phi.v[k] + sk.phi.v[k]) : 2.0 * cw * sk.phi.v[k];
      out.mu.v[k] = -lap.v[k] + pot.F_prime(out.phi.v[k]) - expl;
    }
  }
  out.mu.bc = Bc::neumann;

  const double d_shift = cfg.splitting == Splitting::standard ? model.phys.c_W : 0.0;
  for (int it = 0; it <= cfg.newton_max; ++it) {
    const CHResiduals r = ch_residuals(out.phi, out.mu, sk, u_iter, m_face, model, cfg, h);
    out.residual = ch_residual_norm(r, h);
    if (out.residual <= cfg.newton_tol) return out;
    if (it == cfg.newton_max) break;

    std::vector<double> D(g.n_cells());
    for (std::size_t k = 0; k < D.size(); ++k) D[k] = pot.F_second(out.phi.v[k]) - d_shift;
    const FaceField one(g, 1.0);
    auto applyA = [&](const Vec& x) { return detail::neg_weighted_neumann(m_face, detail::from_vec(g, x), g).v; };
    auto applyB = [&](const Vec& x) {
      Vec y = detail::neg_weighted_neumann(one, detail::from_vec(g, x), g).v;
      for (std::size_t k = 0; k < y.size(); ++k) y[k] += D[k] * x[k];
      return y;
    };
    auto applyT = [&](const Vec& x) {
      Vec y = applyA(applyB(x));
      for (std::size_t k = 0; k < y.size(); ++k) y[k] = x[k] + h * y[k];
      return y;
    };
    Vec rhs = applyA(r.r2.v);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = h * (rhs[k] - r.r1.v[k]);
    SolverConfig lin = cfg.linear;
    lin.rel_tol = std::min(lin.rel_tol, 1e-3);
    Vec dphi = cg_solve_metric(applyT, applyB, rhs, lin, {}, "cahn-hilliard newton solve").x;
    // The exact increment restores the level-k mass.
    const double shift = (target_mean - mean(out.phi)) - [&] {
      double s = 0.0;
      for (double x : dphi) s += x;
      return s / double(dphi.size());
    }();
    for (double& x : dphi) x += shift;
    Vec dmu = applyB(dphi);
    for (std::size_t k = 0; k < dmu.size(); ++k) dmu[k] -= r.r2.v[k];

    double alpha = 1.0;
    for (std::size_t k = 0; k < dphi.size(); ++k) {
      const double p = out.phi.v[k], d = dphi[k];
      if (d > 0.0) alpha = std::min(alpha, cfg.damping_fraction * (1.0 - p) / d);
      if (d < 0.0) alpha = std::min(alpha, cfg.damping_fraction * (1.0 + p) / -d);
    }
    for (std::size_t k = 0; k < dphi.size(); ++k) {
      out.phi.v[k] += alpha * dphi[k];
      out.mu.v[k] += alpha * dmu[k];
    }
    ++out.newton_iters;
  }
  throw StepFailure("cahn-hilliard newton did not converge (residual " + std::to_string(out.residual) + ")", {});
}

// ---------------------------------------------------------------------------
// Heat subproblem in shifted form

inline CellField heat_convection(HeatConvection kind, const FaceField& u, const CellField& s, const Grid& g) {
  return kind == HeatConvection::upwind ? upwind_convective_term(u, s, g) : convective_term(u, s, g);
}

/// (vt - vt^k)/h + u.grad vt - div(kappa grad vt) = -u.grad Theta_b + div(kappa grad Theta_b),
/// vt = 0 on the walls.
inline CellField heat_subproblem(const State& sk, const FaceField& u, const FaceField& kappa_face, const Model& model,
                                 const SchemeConfig& cfg, double h, SolveReport* report = nullptr) {
  const Grid& g = model.grid;
  for (double x : kappa_face.x)
    if (!(x >= model.coeffs.diffusivity.lower_bound()))
      throw CoefficientBoundError("thermal diffusivity below its declared lower bound");
  CellField rhs = divergence(hadamard(kappa_face, gradient(model.Theta_b, g)), g);
  const CellField cb = heat_convection(cfg.heat_convection, u, model.Theta_b, g);
  for (std::size_t k = 0; k < rhs.v.size(); ++k) rhs.v[k] += sk.vartheta.v[k] / h - cb.v[k];

  auto op = [&](const Vec& x) {
    const CellField xf = detail::from_vec(g, x);
    CellField r = detail::neg_weighted_dirichlet0(kappa_face, xf, g);
    const CellField c = heat_convection(cfg.heat_convection, u, xf, g);
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] += x[k] / h + c.v[k];
    return r.v;
  };
  SolveResult res = bicgstab_solve(op, rhs.v, cfg.linear, sk.vartheta.v, nullptr, "heat solve");
  if (report) *report = res.report;
  CellField vt(g, BoundaryTrace::constant(g, 0.0));
  vt.v = std::move(res.x);
  return vt;
}

// ---------------------------------------------------------------------------
// Momentum subproblem

struct MomentumAssembly {
  MomentumOperator op;
  FaceField rhs;
};

/// Assembles the linearised momentum system about u_lin:
///   rho(phi) u/h + div(u (x) (rho^k u_lin + J)) - div(2 nu D u) + grad p
///     = rho^k u^k/h + Korteweg(phi^k, mu) + Marangoni(theta^k, phi) + f_b(phi^k, theta^k)
inline MomentumAssembly assemble_momentum(const State& sk, const CellField& phi_it, const CellField& mu_it,
                                          const FaceField& u_lin, const FrozenCoefficients& fc, const Model& model,
                                          double h) {
  const Grid& g = model.grid;
  const PhysParams& p = model.phys;
  MomentumAssembly a;
  a.op.mass = scaled(1.0 / h, face_density(p, phi_it, g));
  a.op.nu = fc.nu;
  CellField mun = mu_it;
  mun.bc = Bc::neumann;
  FaceField flux = hadamard(fc.rho_k, u_lin);
  axpy(1.0, flux_J(p, fc.m, gradient(mun, g)), flux);
  flux.zero_boundary_normal();
  if (flux.max_abs() > 0.0) a.op.flux = std::move(flux);

  a.rhs = scaled(1.0 / h, hadamard(fc.rho_k, sk.u));
  axpy(1.0, korteweg_force(p, sk.phi, mu_it, g), a.rhs);
  axpy(1.0, marangoni_force(p, fc.theta_k, phi_it, g), a.rhs);
  axpy(1.0, buoyancy_force(p, sk.phi, fc.theta_k, g), a.rhs);
  a.rhs.zero_boundary_normal();
  return a;
}

inline StokesResult momentum_subproblem(const State& sk, const CellField& phi_it, const CellField& mu_it,
                                        const FaceField& u_lin, const FrozenCoefficients& fc, const Model& model,
                                        const SchemeConfig& cfg, double h, const Vec* psi_guess = nullptr) {
  const MomentumAssembly a = assemble_momentum(sk, phi_it, mu_it, u_lin, fc, model, h);
  return stokes_solve(a.op, a.rhs, model.grid, cfg.linear, psi_guess);
}

// ---------------------------------------------------------------------------
// The coupled step

namespace detail {
inline double sq_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}
inline double sq(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}
}  // namespace detail

/// One step of size h from sk. Throws StepFailure when the fixed point or an
/// inner solve fails.
inline State step_once(const State& sk, const Model& model, const SchemeConfig& cfg, double h, StepReport& rep) {
  const Grid& g = model.grid;
  const FrozenCoefficients fc = freeze(sk, model, cfg.face_mean);

  FaceField u_it = sk.u;
  CellField phi_it = sk.phi, mu_it = sk.mu, vt_it = sk.vartheta;
  bool have_mu = false;
  Vec psi;
  State next;
  try {
    for (int it = 1; it <= cfg.outer_max; ++it) {
      CHResult ch = ch_subproblem(sk, u_it, fc.m, model, cfg, h, &phi_it, have_mu ? &mu_it : nullptr);
      have_mu = true;
      rep.newton_iters += ch.newton_iters;
      rep.newton_residual = ch.residual;

      StokesResult mom = momentum_subproblem(sk, ch.phi, ch.mu, u_it, fc, model, cfg, h, psi.empty() ? nullptr : &psi);
      psi = mom.psi;
      rep.momentum = mom.report;
      rep.momentum_residual = mom.momentum_residual;

      CellField vt = heat_subproblem(sk, mom.u, fc.kappa, model, cfg, h, &rep.heat);

      const double num = detail::sq_diff(mom.u.x, u_it.x) + detail::sq_diff(mom.u.y, u_it.y) +
                         detail::sq_diff(ch.phi.v, phi_it.v) + detail::sq_diff(ch.mu.v, mu_it.v) +
                         detail::sq_diff(vt.v, vt_it.v);
      const double den = detail::sq(mom.u.x) + detail::sq(mom.u.y) + detail::sq(ch.phi.v) + detail::sq(ch.mu.v) +
                         detail::sq(vt.v);
      const double inc = num == 0.0 ? 0.0 : std::sqrt(num / den);
      rep.outer_iters = it;
      rep.last_increment = inc;

      u_it = std::move(mom.u);
      phi_it = std::move(ch.phi);
      mu_it = std::move(ch.mu);
      vt_it = std::move(vt);
      if (inc <= cfg.outer_tol) {
        next.u = std::move(u_it);
        next.p = std::move(mom.p);
        next.phi = std::move(phi_it);
        next.mu = std::move(mu_it);
        next.vartheta = std::move(vt_it);
        next.k = sk.k + 1;
        next.time = sk.time + h;
        next.h = h;
        (void)g;
        return next;
      }
      if (!std::isfinite(inc)) break;
    }
  } catch (const StepFailure& e) {
    throw StepFailure(e.what(), rep);
  } catch (const ConvergenceError& e) {
    throw StepFailure(e.what(), rep);
  } catch (const DomainError& e) {
    throw StepFailure(e.what(), rep);
  }
  throw StepFailure("outer fixed-point iteration did not converge (increment " + std::to_string(rep.last_increment) +
                        ")",
                    rep);
}

}  // namespace thermocap
