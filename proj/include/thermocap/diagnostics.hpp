#pragma once

// Energies, dissipation, the per-step discrete energy identity, conservation
// monitors, and the weighted dual-norm distance between two trajectories.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "thermocap/elliptic.hpp"
#include "thermocap/grid.hpp"
#include "thermocap/physics.hpp"
#include "thermocap/scheme.hpp"

namespace thermocap {

struct EnergyBreakdown {
  double kinetic = 0.0;
  double gradient = 0.0;
  double potential = 0.0;
  double thermal = 0.0;
  double total = 0.0;
};

/// Kinetic energy with face-interpolated density: sum_f w rho(phi_f) |u_f|^2 / 2.
inline double kinetic_energy(const PhysParams& p, const CellField& phi, const FaceField& u, const Grid& g) {
  const FaceField rho = face_density(p, phi, g);
  return 0.5 * inner(hadamard(rho, u), u, g);
}

inline double gradient_norm_sq(const CellField& s, const Grid& g) {
  const FaceField gr = gradient(s, g);
  return inner(gr, gr, g);
}

inline EnergyBreakdown total_energy(const State& s, const Model& model) {
  const Grid& g = model.grid;
  const PhysParams& p = model.phys;
  const Potential pot(p);
  CellField phn = s.phi;
  phn.bc = Bc::neumann;
  EnergyBreakdown e;
  e.kinetic = kinetic_energy(p, s.phi, s.u, g);
  e.gradient = p.lambda0 * p.a * 0.5 * gradient_norm_sq(phn, g);
  double w = 0.0;
  for (double x : s.phi.v) w += pot.W(x);
  e.potential = p.lambda0 * p.a * w * g.cell_area();
  e.thermal = 0.5 * inner(s.vartheta, s.vartheta, g);
  e.total = e.kinetic + e.gradient + e.potential + e.thermal;
  return e;
}

/// (1/4)(nu_lo ||grad u||^2 + lambda0 a m_lo ||grad mu||^2 + kappa_lo ||grad vartheta||^2).
inline double dissipation(const State& s, const Model& model) {
  const Grid& g = model.grid;
  const PhysParams& p = model.phys;
  CellField mun = s.mu;
  mun.bc = Bc::neumann;
  CellField vt(g, BoundaryTrace::constant(g, 0.0));
  vt.v = s.vartheta.v;
  return 0.25 * (model.coeffs.viscosity.lower_bound() * velocity_gradient_norm_sq(s.u, g) +
                 p.lambda0 * p.a * model.coeffs.mobility.lower_bound() * gradient_norm_sq(mun, g) +
                 model.coeffs.diffusivity.lower_bound() * gradient_norm_sq(vt, g));
}

/// Terms of the summed discrete energy identity, each multiplied by h.
struct EnergyIdentityTerms {
  double kinetic = 0.0;      // rho|u|^2/2 - rho^k|u^k|^2/2 + rho^k|u - u^k|^2/2
  double viscous = 0.0;      // h (2 nu Du, Du)
  double interface = 0.0;    // lambda0 a (|grad phi|^2 - |grad phi^k|^2 + |grad(phi - phi^k)|^2)/2
  double mobility = 0.0;     // h lambda0 a (m grad mu, grad mu)
  double potential = 0.0;    // lambda0 a (F'(phi) - explicit part, phi - phi^k)
  double thermal = 0.0;      // |vt|^2/2 - |vt^k|^2/2 + |vt - vt^k|^2/2 + h (kappa grad vt, grad vt) + h (u.grad vt, vt)
  double marangoni = 0.0;    // -h lambda0 b (theta^k grad phi (x) grad phi, grad u)
  double buoyancy = 0.0;     // h (f_b, u)
  double boundary_heat = 0.0;// -h (u.grad Theta_b, vt) - h (kappa grad Theta_b, grad vt)

  double lhs() const { return kinetic + viscous + interface + mobility + potential + thermal; }
  double rhs() const { return marangoni + buoyancy + boundary_heat; }
};

inline EnergyIdentityTerms energy_identity_terms(const State& sk, const State& s, const Model& model,
                                                 const SchemeConfig& cfg) {
  const Grid& g = model.grid;
  const PhysParams& p = model.phys;
  const Potential pot(p);
  const double h = s.h;
  const double la = p.lambda0 * p.a;
  const FrozenCoefficients fc = freeze(sk, model, cfg.face_mean);
  EnergyIdentityTerms t;

  const FaceField rho = face_density(p, s.phi, g);
  const FaceField du = difference(s.u, sk.u);
  t.kinetic = 0.5 * (inner(hadamard(rho, s.u), s.u, g) - inner(hadamard(fc.rho_k, sk.u), sk.u, g) +
                     inner(hadamard(fc.rho_k, du), du, g));
  t.viscous = h * 2.0 * strain_energy(fc.nu, s.u, g);

  CellField ph = s.phi, phk = sk.phi, mun = s.mu;
  ph.bc = phk.bc = mun.bc = Bc::neumann;
  const CellField dphi = difference(ph, phk);
  t.interface = 0.5 * la * (gradient_norm_sq(ph, g) - gradient_norm_sq(phk, g) + gradient_norm_sq(dphi, g));
  const FaceField gmu = gradient(mun, g);
  t.mobility = h * la * inner(hadamard(fc.m, gmu), gmu, g);
  double pw = 0.0;
  for (std::size_t k = 0; k < s.phi.v.size(); ++k) {
    const double expl = cfg.splitting == Splitting::standard ? p.c_W * (s.phi.v[k] + sk.phi.v[k])
                                                             : 2.0 * p.c_W * sk.phi.v[k];
    pw += (pot.F_prime(s.phi.v[k]) - expl) * (s.phi.v[k] - sk.phi.v[k]);
  }
  t.potential = la * pw * g.cell_area();

  CellField vt(g, BoundaryTrace::constant(g, 0.0)), vtk(g, BoundaryTrace::constant(g, 0.0));
  vt.v = s.vartheta.v;
  vtk.v = sk.vartheta.v;
  const CellField dvt = difference(vt, vtk);
  const FaceField gvt = gradient(vt, g);
  t.thermal = 0.5 * (inner(vt, vt, g) - inner(vtk, vtk, g) + inner(dvt, dvt, g)) +
              h * inner(hadamard(fc.kappa, gvt), gvt, g) +
              h * inner(heat_convection(cfg.heat_convection, s.u, vt, g), vt, g);

  if (p.b != 0.0) t.marangoni = -h * p.lambda0 * p.b * tensor_pairing(capillary_tensor(fc.theta_k, s.phi, g), s.u, g);
  t.buoyancy = h * inner(buoyancy_force(p, sk.phi, fc.theta_k, g), s.u, g);
  t.boundary_heat = -h * inner(heat_convection(cfg.heat_convection, s.u, model.Theta_b, g), vt, g) -
                    h * inner(hadamard(fc.kappa, gradient(model.Theta_b, g)), gvt, g);
  return t;
}

/// |LHS - RHS| of the tested identity (scaled by h, i.e. in energy units),
/// normalised by max(1, |E_tot^k|). Zero for an exact discrete solution.
inline double energy_identity_residual(const State& sk, const State& s, const Model& model, const SchemeConfig& cfg) {
  const EnergyIdentityTerms t = energy_identity_terms(sk, s, model, cfg);
  return std::abs(t.lhs() - t.rhs()) / std::max(1.0, std::abs(total_energy(sk, model).total));
}

// ---------------------------------------------------------------------------
// Monitors

inline double mass(const CellField& phi) { return mean(phi); }

inline std::pair<double, double> theta_extrema(const State& s, const Model& model) {
  const CellField t = s.theta(model);
  return {t.min(), t.max()};
}

inline double phi_range(const CellField& phi) { return phi.max_abs(); }

/// ||Du|| and ||grad u||; Korn: ||grad u|| <= sqrt(2) ||Du|| for no-slip fields.
inline std::pair<double, double> korn_norms(const FaceField& u, const Grid& g) {
  return {std::sqrt(strain_energy(CellField(g, 1.0), u, g)), std::sqrt(velocity_gradient_norm_sq(u, g))};
}

// ---------------------------------------------------------------------------
// Distance between two trajectories

struct UniquenessTerms {
  double velocity = 0.0;  // ||grad S^{-1}(u1 - u2)||^2
  double phase = 0.0;     // int m(phi1) |grad G_{phi1}(phi1 - phi2)|^2
  double thermal = 0.0;   // ||theta1 - theta2||^2
  double total() const { return velocity + phase + thermal; }
};

inline UniquenessTerms uniqueness_terms(const State& s1, const State& s2, const Model& model,
                                        const SolverConfig& cfg = {1e-12, 1e-300, 0}) {
  const Grid& g = model.grid;
  if (!s1.phi.matches(g) || !s2.phi.matches(g)) throw DimensionError("uniqueness_distance: states on different grids");
  if (model.coeffs.mobility.depends_on_theta())
    throw CompatibilityError("uniqueness_distance: mobility depends on temperature, the metric is undefined");
  if (std::abs(mean(s1.phi) - mean(s2.phi)) > 1e-10)
    throw CompatibilityError("uniqueness_distance: phase fields must have equal means");
  UniquenessTerms t;

  const FaceField du = difference(s1.u, s2.u);
  if (du.max_abs() > 0.0) {
    const FaceField w = stokes_inverse(du, g, cfg);
    t.velocity = velocity_gradient_norm_sq(w, g);
  }
  CellField dphi = difference(s1.phi, s2.phi);
  krylov::project_zero_mean(dphi.v);
  if (dphi.max_abs() > 0.0) {
    const CellField m_cells = model.coeffs.mobility.evaluate(s1.phi, CellField(g), g);
    const FaceField m_face = to_faces(m_cells, g);
    CellField psi = weighted_neumann_solve(m_face, dphi, g, cfg);
    const FaceField gp = gradient(psi, g);
    t.phase = inner(hadamard(m_face, gp), gp, g);
  }
  const CellField dvt = difference(s1.vartheta, s2.vartheta);
  t.thermal = inner(dvt, dvt, g);
  return t;
}

inline double uniqueness_distance(const State& s1, const State& s2, const Model& model,
                                  const SolverConfig& cfg = {1e-12, 1e-300, 0}) {
  return uniqueness_terms(s1, s2, model, cfg).total();
}

// ---------------------------------------------------------------------------
// Ledger

struct LedgerRow {
  int step = 0;
  double time = 0.0;
  double h = 0.0;
  EnergyBreakdown energy;
  double dissipation = 0.0;
  double mass = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double phi_max_abs = 0.0;
  double identity_residual = 0.0;
  int outer_iters = 0;
  int newton_iters = 0;
  double distance = NAN;  // twin mode only
};

inline LedgerRow ledger_row(const State& s, const Model& model) {
  LedgerRow r;
  r.step = s.k;
  r.time = s.time;
  r.h = s.h;
  r.energy = total_energy(s, model);
  r.dissipation = dissipation(s, model);
  r.mass = mass(s.phi);
  std::tie(r.theta_min, r.theta_max) = theta_extrema(s, model);
  r.phi_max_abs = phi_range(s.phi);
  return r;
}

struct RunLedger {
  std::vector<LedgerRow> rows;
  bool twin = false;

  static constexpr const char* kHeader =
      "step,time,h,kinetic,gradient,potential,thermal,total,dissipation,mass,theta_min,theta_max,phi_max_abs,"
      "identity_residual,outer_iters,newton_iters";

  void write_csv(std::ostream& os) const {
    os << kHeader << (twin ? ",distance" : "") << "\n";
    char buf[64];
    auto num = [&](double x) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << buf;
    };
    for (const LedgerRow& r : rows) {
      os << r.step << ',';
      for (double x : {r.time, r.h, r.energy.kinetic, r.energy.gradient, r.energy.potential, r.energy.thermal,
                       r.energy.total, r.dissipation, r.mass, r.theta_min, r.theta_max, r.phi_max_abs,
                       r.identity_residual}) {
        num(x);
        os << ',';
      }
      os << r.outer_iters << ',' << r.newton_iters;
      if (twin) {
        os << ',';
        num(r.distance);
      }
      os << '\n';
    }
  }
};

}  // namespace thermocap
