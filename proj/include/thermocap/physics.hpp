#pragma once

// Constitutive laws of the thermocapillary two-phase model: affine density,
// Eotvos surface tension, Boussinesq buoyancy, diffusive mass flux, the
// Flory-Huggins potential with its convex splitting, and the capillary
// (Korteweg + Marangoni) forces on the MAC grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "thermocap/error.hpp"
#include "thermocap/grid.hpp"

namespace thermocap {

struct PhysParams {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double lambda0 = 1.0;
  double a = 1.0;
  double b = 0.0;
  double alpha = 0.0;
  double g = 0.0;
  double A = 1.0;
  double A_c = 2.0;
  double c_W = 2.0;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const {
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw ConfigError("invariant rho1 > 0, rho2 > 0 violated");
    if (!(lambda0 > 0.0) || !(a > 0.0)) throw ConfigError("invariant lambda0 > 0, a > 0 violated");
    if (!(b >= 0.0)) throw ConfigError("invariant b >= 0 violated");
    if (!(alpha >= 0.0)) throw ConfigError("invariant alpha >= 0 violated");
    if (!(g >= 0.0)) throw ConfigError("invariant g >= 0 violated");
    if (!(A > 0.0 && A < A_c)) throw ConfigError("invariant 0 < A < A_c violated");
    if (!(c_W >= A_c)) throw ConfigError("invariant c_W >= A_c violated");
  }

  double density(double phi) const { return 0.5 * (rho2 - rho1) * phi + 0.5 * (rho1 + rho2); }
  double surface_tension(double theta) const { return lambda0 * (a - b * theta); }
  /// Buoyancy force; the x-component is always zero.
  std::array<double, 2> buoyancy(double phi, double theta) const {
    return {0.0, -density(phi) * (1.0 - alpha * theta) * g};
  }
};

// ---------------------------------------------------------------------------
// Coefficient models for nu, m, kappa. Every preset carries an analytic lower
// bound, so positivity never depends on the state.

struct CoefficientModel {
  enum class Kind { constant, quadratic_phi, bounded_rational };

  Kind kind = Kind::constant;
  // constant:          value
  // quadratic_phi:     c0 + c2 * phi^2                          (bound c0)
  // bounded_rational:  lo + (hi - lo) / (1 + a_phi phi^2 + a_theta theta^2)  (bound lo)
  double value = 1.0;
  double c0 = 1.0, c2 = 0.0;
  double lo = 1.0, hi = 1.0, a_phi = 0.0, a_theta = 0.0;

  static CoefficientModel constant(double v) {
    CoefficientModel m;
    m.kind = Kind::constant;
    m.value = v;
    m.validate();
    return m;
  }
  static CoefficientModel quadratic_phi(double c0, double c2) {
    CoefficientModel m;
    m.kind = Kind::quadratic_phi;
    m.c0 = c0;
    m.c2 = c2;
    m.validate();
    return m;
  }
  static CoefficientModel bounded_rational(double lo, double hi, double a_phi, double a_theta) {
    CoefficientModel m;
    m.kind = Kind::bounded_rational;
    m.lo = lo;
    m.hi = hi;
    m.a_phi = a_phi;
    m.a_theta = a_theta;
    m.validate();
    return m;
  }

  void validate() const {
    switch (kind) {
      case Kind::constant:
        if (!(value > 0.0)) throw ConfigError("coefficient preset constant needs value > 0");
        break;
      case Kind::quadratic_phi:
        if (!(c0 > 0.0) || !(c2 >= 0.0)) throw ConfigError("coefficient preset quadratic_phi needs c0 > 0, c2 >= 0");
        break;
      case Kind::bounded_rational:
        if (!(lo > 0.0) || !(hi >= lo) || !(a_phi >= 0.0) || !(a_theta >= 0.0))
          throw ConfigError("coefficient preset bounded_rational needs 0 < lo <= hi, a_phi >= 0, a_theta >= 0");
        break;
    }
  }

  double lower_bound() const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::quadratic_phi: return c0;
      case Kind::bounded_rational: return lo;
    }
    return 0.0;
  }

  double operator()(double phi, double theta) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::quadratic_phi: return c0 + c2 * phi * phi;
      case Kind::bounded_rational:
        return lo + (hi - lo) / (1.0 + a_phi * phi * phi + a_theta * theta * theta);
    }
    return 0.0;
  }

  bool depends_on_phi() const {
    return (kind == Kind::quadratic_phi && c2 != 0.0) || (kind == Kind::bounded_rational && a_phi != 0.0 && hi != lo);
  }
  bool depends_on_theta() const { return kind == Kind::bounded_rational && a_theta != 0.0 && hi != lo; }

  CellField evaluate(const CellField& phi, const CellField& theta, const Grid& g) const {
    CellField r(g);
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] = (*this)(phi.v[k], theta.v[k]);
    return r;
  }
};

struct Coefficients {
  CoefficientModel viscosity = CoefficientModel::constant(1.0);
  CoefficientModel mobility = CoefficientModel::constant(1.0);
  CoefficientModel diffusivity = CoefficientModel::constant(1.0);
};

// ---------------------------------------------------------------------------
// Flory-Huggins potential W(s) = (A/2)[(1+s)ln(1+s) + (1-s)ln(1-s)] - (A_c/2)s^2
// split as W = F - c_W s^2 with F convex.

struct Potential {
  double A = 1.0;
  double A_c = 2.0;
  double c_W = 2.0;

  Potential() = default;
  Potential(double A_, double A_c_, double c_W_) : A(A_), A_c(A_c_), c_W(c_W_) {}
  explicit Potential(const PhysParams& p) : A(p.A), A_c(p.A_c), c_W(p.c_W) {}

  static void check(double s) {
    if (!(std::abs(s) < 1.0)) throw DomainError("singular potential evaluated at |s| >= 1");
  }

  /// (1+s)ln(1+s) + (1-s)ln(1-s), accurate near 0 and near +-1.
  static double entropy(double s) {
    if (std::abs(s) == 1.0) return 2.0 * std::log(2.0);
    return (1.0 + s) * std::log1p(s) + (1.0 - s) * std::log1p(-s);
  }
  /// ln((1+s)/(1-s)) = 2 atanh(s) through log1p, accurate up to 1e-12 from +-1.
  static double log_ratio(double s) { return std::log1p(s) - std::log1p(-s); }

  double W(double s) const {
    if (!(std::abs(s) <= 1.0)) throw DomainError("singular potential evaluated at |s| > 1");
    return 0.5 * A * entropy(s) - 0.5 * A_c * s * s;
  }
  double F(double s) const {
    if (!(std::abs(s) <= 1.0)) throw DomainError("singular potential evaluated at |s| > 1");
    return 0.5 * A * entropy(s) + (c_W - 0.5 * A_c) * s * s;
  }
  double W_prime(double s) const {
    check(s);
    return 0.5 * A * log_ratio(s) - A_c * s;
  }
  double F_prime(double s) const {
    check(s);
    return 0.5 * A * log_ratio(s) + (2.0 * c_W - A_c) * s;
  }
  double F_second(double s) const {
    check(s);
    return A / ((1.0 - s) * (1.0 + s)) + 2.0 * c_W - A_c;
  }
};

// ---------------------------------------------------------------------------
// Field-level assemblies

/// J = -((rho2 - rho1)/2) m grad(mu). Matched densities give the zero field
/// without touching the inputs.
inline FaceField flux_J(const PhysParams& p, const FaceField& m_face, const FaceField& grad_mu) {
  if (m_face.x.size() != grad_mu.x.size() || m_face.y.size() != grad_mu.y.size())
    throw DimensionError("flux_J: layout mismatch");
  FaceField r = m_face;
  std::fill(r.x.begin(), r.x.end(), 0.0);
  std::fill(r.y.begin(), r.y.end(), 0.0);
  if (p.rho1 == p.rho2) return r;
  const double c = -0.5 * (p.rho2 - p.rho1);
  for (std::size_t k = 0; k < r.x.size(); ++k) r.x[k] = c * m_face.x[k] * grad_mu.x[k];
  for (std::size_t k = 0; k < r.y.size(); ++k) r.y[k] = c * m_face.y[k] * grad_mu.y[k];
  return r;
}

inline CellField density_field(const PhysParams& p, const CellField& phi, const Grid& g) {
  CellField r(g);
  for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] = p.density(phi.v[k]);
  return r;
}

/// Face densities rho(phi_face), phi_face the arithmetic mean; being affine
/// this equals the mean of the two cell densities.
inline FaceField face_density(const PhysParams& p, const CellField& phi, const Grid& g) {
  FaceField r = to_faces(phi, g);
  for (double& x : r.x) x = p.density(x);
  for (double& x : r.y) x = p.density(x);
  return r;
}

/// Korteweg force in the face form -lambda0 a phi_face grad(mu). It differs
/// from lambda0 a mu grad(phi) by a discrete gradient and is the exact adjoint
/// of convective_term(., phi): <K, v> = lambda0 a <convective_term(v, phi), mu>
/// for every v with zero wall normals.
inline FaceField korteweg_force(const PhysParams& p, const CellField& phi, const CellField& mu, const Grid& g) {
  CellField mu_n = mu;
  mu_n.bc = Bc::neumann;
  FaceField r = hadamard(to_faces(phi, g), gradient(mu_n, g));
  for (double& x : r.x) x *= -p.lambda0 * p.a;
  for (double& x : r.y) x *= -p.lambda0 * p.a;
  r.zero_boundary_normal();
  return r;
}

/// theta (grad phi (x) grad phi) sampled on the grid: diagonal entries at
/// cells, off-diagonal entry at interior corners (zero on walls, where the
/// Neumann condition kills one factor).
struct CapillaryTensor {
  std::vector<double> txx, tyy;  // nx*ny
  std::vector<double> txy;       // (nx+1)*(ny+1)
};

inline CapillaryTensor capillary_tensor(const CellField& theta, const CellField& phi, const Grid& g) {
  CellField phi_n = phi;
  phi_n.bc = Bc::neumann;
  const FaceField gp = gradient(phi_n, g);
  const int nx = g.nx, ny = g.ny;
  CapillaryTensor t;
  t.txx.assign(g.n_cells(), 0.0);
  t.tyy.assign(g.n_cells(), 0.0);
  t.txy.assign(std::size_t(nx + 1) * (ny + 1), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double gx2 = 0.5 * (gp.xf(i, j) * gp.xf(i, j) + gp.xf(i + 1, j) * gp.xf(i + 1, j));
      const double gy2 = 0.5 * (gp.yf(i, j) * gp.yf(i, j) + gp.yf(i, j + 1) * gp.yf(i, j + 1));
      t.txx[j * nx + i] = theta(i, j) * gx2;
      t.tyy[j * nx + i] = theta(i, j) * gy2;
    }
  const std::vector<double> thc = cells_to_corners(theta, g);
  for (int j = 1; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const double gx = 0.5 * (gp.xf(i, j - 1) + gp.xf(i, j));
      const double gy = 0.5 * (gp.yf(i - 1, j) + gp.yf(i, j));
      const std::size_t k = std::size_t(j) * (nx + 1) + i;
      t.txy[k] = thc[k] * gx * gy;
    }
  return t;
}

/// Discrete (T, grad v) for a symmetric tensor sampled as above.
inline double tensor_pairing(const CapillaryTensor& t, const FaceField& v, const Grid& g) {
  const VelocityGradient d = velocity_gradient(v, g);
  double s = 0.0;
  for (std::size_t k = 0; k < d.ux.size(); ++k) s += (t.txx[k] * d.ux[k] + t.tyy[k] * d.vy[k]) * g.cell_area();
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const std::size_t k = std::size_t(j) * (g.nx + 1) + i;
      s += corner_weight(g, i, j) * t.txy[k] * (d.uy[k] + d.vx[k]);
    }
  return s;
}

/// Marangoni force M with <M, v> = -lambda0 b (theta (grad phi (x) grad phi), grad v).
/// b = 0 returns the zero field without assembling anything.
inline FaceField marangoni_force(const PhysParams& p, const CellField& theta, const CellField& phi, const Grid& g) {
  FaceField r(g);
  if (p.b == 0.0) return r;
  const CapillaryTensor t = capillary_tensor(theta, phi, g);
  r = stress_divergence_transpose(t.txx, t.tyy, t.txy, t.txy, g);
  const double c = -p.lambda0 * p.b;
  for (double& x : r.x) x *= c;
  for (double& x : r.y) x *= c;
  return r;
}

/// Both capillary contributions on faces.
struct CapillaryForce {
  FaceField korteweg;
  FaceField marangoni;
};

inline CapillaryForce capillary_force(const PhysParams& p, const CellField& phi, const CellField& mu,
                                      const CellField& theta_k, const Grid& g) {
  return {korteweg_force(p, phi, mu, g), marangoni_force(p, theta_k, phi, g)};
}

/// Buoyancy on interior y-faces (mean of the two adjacent cell forces).
inline FaceField buoyancy_force(const PhysParams& p, const CellField& phi, const CellField& theta, const Grid& g) {
  FaceField r(g);
  if (p.g == 0.0) return r;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      r.yf(i, j) = 0.5 * (p.buoyancy(phi(i, j - 1), theta(i, j - 1))[1] + p.buoyancy(phi(i, j), theta(i, j))[1]);
  return r;
}

}  // namespace thermocap
