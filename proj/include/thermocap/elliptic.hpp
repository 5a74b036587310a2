#pragma once

// Elliptic solution operators on the MAC grid: the zero-mean Neumann inverse
// and its mobility-weighted variant, the harmonic extension of boundary
// data, and Stokes-type saddle-point solves.
//
// Saddle-point problems are solved on the discrete divergence-free subspace:
// u = curl psi with psi on interior corners, so the Krylov iteration never
// sees the pressure, and div u = 0 holds to rounding. The pressure is
// recovered afterwards from a Neumann problem for the momentum residual.

#include <cmath>
#include <optional>

#include "thermocap/grid.hpp"
#include "thermocap/krylov.hpp"
#include "thermocap/physics.hpp"

namespace thermocap {

namespace detail {

inline Vec to_vec(const CellField& c) { return c.v; }

inline CellField from_vec(const Grid& g, Vec v, Bc bc = Bc::none) {
  CellField c(g, 0.0, bc);
  c.v = std::move(v);
  return c;
}

inline double rms(const Vec& v) {
  if (v.empty()) return 0.0;
  return krylov::norm2(v) / std::sqrt(double(v.size()));
}

/// -div(c grad s) for Neumann s, no coefficient checks (hot loop).
inline CellField neg_weighted_neumann(const FaceField& c, const CellField& s, const Grid& g) {
  CellField sn = s;
  sn.bc = Bc::neumann;
  CellField r = divergence(hadamard(c, gradient(sn, g)), g);
  for (double& x : r.v) x = -x;
  return r;
}

/// -div(c grad s) with homogeneous Dirichlet data.
inline CellField neg_weighted_dirichlet0(const FaceField& c, const CellField& s, const Grid& g) {
  CellField s0(g, BoundaryTrace::constant(g, 0.0));
  s0.v = s.v;
  CellField r = divergence(hadamard(c, gradient(s0, g)), g);
  for (double& x : r.v) x = -x;
  return r;
}

inline void check_zero_mean(const CellField& f, const char* who) {
  const double m = mean(f);
  if (std::abs(m) > 1e-12 * rms(f.v) + 1e-300)
    throw CompatibilityError(std::string(who) + ": right-hand side must have zero mean (mean " +
                             std::to_string(m) + ")");
}

}  // namespace detail

/// Solves -div(c grad u) = f with zero-flux walls, returning the zero-mean u.
inline CellField weighted_neumann_solve(const FaceField& c, const CellField& f, const Grid& g,
                                        const SolverConfig& cfg, SolveReport* report = nullptr) {
  detail::check_zero_mean(f, "neumann solve");
  Vec rhs = f.v;
  krylov::project_zero_mean(rhs);
  auto op = [&](const Vec& x) { return detail::neg_weighted_neumann(c, detail::from_vec(g, x), g).v; };
  SolveResult res = cg_solve(op, rhs, cfg, {}, krylov::project_zero_mean, "neumann solve");
  if (report) *report = res.report;
  return detail::from_vec(g, std::move(res.x), Bc::neumann);
}

/// The Neumann inverse G: zero-mean u with -Delta_h u = f.
inline CellField neumann_inverse(const CellField& f, const Grid& g, const SolverConfig& cfg = {},
                                 SolveReport* report = nullptr) {
  return weighted_neumann_solve(FaceField(g, 1.0), f, g, cfg, report);
}

/// The mobility-weighted inverse G_q: zero-mean u with -div(m(q) grad u) = f.
/// theta is passed to the model's second argument (zero when omitted).
inline CellField weighted_neumann_inverse(const CellField& q, const CoefficientModel& m_model, const CellField& f,
                                          const Grid& g, const SolverConfig& cfg = {},
                                          const CellField* theta = nullptr, FaceMean face_mean = FaceMean::arithmetic,
                                          SolveReport* report = nullptr) {
  const CellField zero(g);
  const CellField m_cells = m_model.evaluate(q, theta ? *theta : zero, g);
  const double bound = m_model.lower_bound();
  for (double x : m_cells.v)
    if (!(x >= bound)) throw CoefficientBoundError("mobility below its declared lower bound");
  return weighted_neumann_solve(to_faces(m_cells, g, face_mean), f, g, cfg, report);
}

/// Solves -div(c grad u) + sigma u = f with Dirichlet data `trace`.
inline CellField dirichlet_solve(const FaceField& c, double sigma, const CellField& f, const BoundaryTrace& trace,
                                 const Grid& g, const SolverConfig& cfg, SolveReport* report = nullptr) {
  // Move the trace contribution to the right-hand side.
  CellField lift(g, trace);
  CellField rhs = divergence(hadamard(c, gradient(lift, g)), g);  // div(c grad_tr 0)
  for (std::size_t k = 0; k < rhs.v.size(); ++k) rhs.v[k] += f.v[k];
  auto op = [&](const Vec& x) {
    CellField r = detail::neg_weighted_dirichlet0(c, detail::from_vec(g, x), g);
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] += sigma * x[k];
    return r.v;
  };
  SolveResult res = cg_solve(op, rhs.v, cfg, {}, nullptr, "dirichlet solve");
  if (report) *report = res.report;
  CellField out(g, trace);
  out.v = std::move(res.x);
  return out;
}

/// Discrete harmonic function with the given boundary trace.
inline CellField harmonic_extension(const BoundaryTrace& theta_b, const Grid& g, const SolverConfig& cfg = {},
                                    SolveReport* report = nullptr) {
  for (auto* v : {&theta_b.left, &theta_b.right, &theta_b.bottom, &theta_b.top})
    for (double x : *v)
      if (!std::isfinite(x)) throw DimensionError("harmonic_extension: non-finite trace value");
  return dirichlet_solve(FaceField(g, 1.0), 0.0, CellField(g), theta_b, g, cfg, report);
}

// ---------------------------------------------------------------------------
// Saddle-point solves

/// Velocity operator  mass . u + div(u (x) flux) - div(2 nu D u), or the
/// componentwise -Delta_h when `vector_laplacian` is set.
struct MomentumOperator {
  FaceField mass;                  // per-face coefficient of u (rho/h)
  CellField nu;                    // cell viscosity
  std::optional<FaceField> flux;   // mass flux of the (linearised) transport
  bool vector_laplacian = false;

  FaceField apply(const FaceField& u, const Grid& g) const {
    FaceField r = vector_laplacian ? vector_laplacian_operator(u, g) : viscous_operator(nu, u, g);
    for (std::size_t k = 0; k < r.x.size(); ++k) r.x[k] += mass.x[k] * u.x[k];
    for (std::size_t k = 0; k < r.y.size(); ++k) r.y[k] += mass.y[k] * u.y[k];
    if (flux) axpy(1.0, momentum_transport(*flux, u, g), r);
    r.zero_boundary_normal();
    return r;
  }
  bool symmetric() const { return !flux.has_value(); }
};

struct StokesResult {
  FaceField u;
  CellField p;
  SolveReport report;
  /// ||rhs - A u - grad p|| / max(||rhs||, 1) over interior faces.
  double momentum_residual = 0.0;
  Vec psi;  // stream function, reusable as a warm start
};

inline StokesResult stokes_solve(const MomentumOperator& op, const FaceField& rhs, const Grid& g,
                                 const SolverConfig& cfg = {}, const Vec* psi_guess = nullptr) {
  if (!rhs.matches(g)) throw DimensionError("stokes_solve: rhs does not match grid");
  if (!op.vector_laplacian) {
    for (double x : op.nu.v)
      if (!(x > 0.0)) throw CoefficientBoundError("stokes_solve: viscosity must be positive");
  }
  for (double x : op.mass.x)
    if (!(x >= 0.0)) throw CoefficientBoundError("stokes_solve: mass coefficient must be nonnegative");
  for (double x : op.mass.y)
    if (!(x >= 0.0)) throw CoefficientBoundError("stokes_solve: mass coefficient must be nonnegative");

  auto K = [&](const Vec& psi) { return curl_transpose(op.apply(curl(psi, g), g), g); };
  const Vec b = curl_transpose(rhs, g);
  Vec x0 = psi_guess ? *psi_guess : Vec{};
  SolveResult res = op.symmetric() ? cg_solve(K, b, cfg, std::move(x0), nullptr, "stokes velocity solve")
                                   : bicgstab_solve(K, b, cfg, std::move(x0), nullptr, "stokes velocity solve");

  StokesResult out;
  out.u = curl(res.x, g);
  out.report = res.report;

  // Pressure: grad_h p = rhs - A u on interior faces.
  FaceField r = rhs;
  axpy(-1.0, op.apply(out.u, g), r);
  r.zero_boundary_normal();
  CellField div_r = divergence(r, g);
  for (double& x : div_r.v) x = -x;
  krylov::project_zero_mean(div_r.v);
  SolverConfig pcfg = cfg;
  out.p = neumann_inverse(div_r, g, pcfg);

  CellField pn = out.p;
  pn.bc = Bc::neumann;
  FaceField res_f = r;
  axpy(-1.0, gradient(pn, g), res_f);
  out.momentum_residual = norm(res_f, g) / std::max(norm(rhs, g), 1.0);
  out.psi = std::move(res.x);
  return out;
}

/// Stokes-type solve with a per-cell mass coefficient (rho/h) and no-slip walls.
inline StokesResult stokes_solve(const CellField& rho_over_h, const CellField& nu, const std::optional<FaceField>& adv,
                                 const FaceField& rhs, const Grid& g, const SolverConfig& cfg = {}) {
  MomentumOperator op{to_faces(rho_over_h, g), nu, std::nullopt, false};
  if (adv) op.flux = hadamard(to_faces(rho_over_h, g), *adv);
  return stokes_solve(op, rhs, g, cfg);
}

/// S^{-1}: w with -Delta_h w + grad pi = f, div w = 0, w = 0 on walls.
inline FaceField stokes_inverse(const FaceField& u_rhs, const Grid& g, const SolverConfig& cfg = {},
                                SolveReport* report = nullptr) {
  if (!u_rhs.all_finite()) throw DimensionError("stokes_inverse: non-finite input");
  MomentumOperator op{FaceField(g, 0.0), CellField(g, 1.0), std::nullopt, true};
  StokesResult r = stokes_solve(op, u_rhs, g, cfg);
  if (report) *report = r.report;
  return r.u;
}

}  // namespace thermocap
