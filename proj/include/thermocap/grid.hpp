#pragma once

// Rectangular MAC grid: scalars at cell centres, velocity components on the
// faces normal to them. All operators below are built so that discrete
// summation by parts holds exactly, e.g. <div f, s> = -<f, grad s> whenever
// the boundary terms vanish.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "thermocap/error.hpp"

namespace thermocap {

struct Grid {
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;

  Grid() = default;
  Grid(int nx_, int ny_, double lx_ = 1.0, double ly_ = 1.0) : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    if (nx < 2 || ny < 2) throw DimensionError("grid needs nx >= 2 and ny >= 2");
    if (!(lx > 0.0) || !(ly > 0.0)) throw DimensionError("grid edge lengths must be positive");
  }

  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  double cell_area() const { return dx() * dy(); }
  double area() const { return lx * ly; }
  std::size_t n_cells() const { return std::size_t(nx) * ny; }
  std::size_t n_xfaces() const { return std::size_t(nx + 1) * ny; }
  std::size_t n_yfaces() const { return std::size_t(nx) * (ny + 1); }

  double xc(int i) const { return (i + 0.5) * dx(); }
  double yc(int j) const { return (j + 0.5) * dy(); }

  bool operator==(const Grid&) const = default;
};

enum class Bc { none, neumann, dirichlet };

/// Dirichlet data at boundary face midpoints.
struct BoundaryTrace {
  std::vector<double> left, right;  // ny values, indexed by j
  std::vector<double> bottom, top;  // nx values, indexed by i

  static BoundaryTrace constant(const Grid& g, double c) {
    return {std::vector<double>(g.ny, c), std::vector<double>(g.ny, c), std::vector<double>(g.nx, c),
            std::vector<double>(g.nx, c)};
  }

  template <class Fn>
  static BoundaryTrace sample(const Grid& g, Fn&& fn) {
    BoundaryTrace t;
    for (int j = 0; j < g.ny; ++j) {
      t.left.push_back(fn(0.0, g.yc(j)));
      t.right.push_back(fn(g.lx, g.yc(j)));
    }
    for (int i = 0; i < g.nx; ++i) {
      t.bottom.push_back(fn(g.xc(i), 0.0));
      t.top.push_back(fn(g.xc(i), g.ly));
    }
    return t;
  }

  double min() const {
    double m = INFINITY;
    for (auto* v : {&left, &right, &bottom, &top})
      for (double x : *v) m = std::min(m, x);
    return m;
  }
  double max() const {
    double m = -INFINITY;
    for (auto* v : {&left, &right, &bottom, &top})
      for (double x : *v) m = std::max(m, x);
    return m;
  }
};

struct CellField {
  int nx = 0;
  int ny = 0;
  std::vector<double> v;
  Bc bc = Bc::none;
  BoundaryTrace trace;  // used only when bc == dirichlet

  CellField() = default;
  explicit CellField(const Grid& g, double fill = 0.0, Bc bc_ = Bc::none)
      : nx(g.nx), ny(g.ny), v(g.n_cells(), fill), bc(bc_) {
    if (bc == Bc::dirichlet) trace = BoundaryTrace::constant(g, 0.0);
  }
  CellField(const Grid& g, BoundaryTrace tr, double fill = 0.0)
      : nx(g.nx), ny(g.ny), v(g.n_cells(), fill), bc(Bc::dirichlet), trace(std::move(tr)) {}

  double& operator()(int i, int j) { return v[std::size_t(j) * nx + i]; }
  double operator()(int i, int j) const { return v[std::size_t(j) * nx + i]; }

  bool matches(const Grid& g) const { return nx == g.nx && ny == g.ny && v.size() == g.n_cells(); }

  double min() const { return *std::min_element(v.begin(), v.end()); }
  double max() const { return *std::max_element(v.begin(), v.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  bool all_finite() const {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  }
};

/// x: (nx+1) x ny values on vertical faces, y: nx x (ny+1) on horizontal faces.
struct FaceField {
  int nx = 0;
  int ny = 0;
  std::vector<double> x;
  std::vector<double> y;

  FaceField() = default;
  explicit FaceField(const Grid& g, double fill = 0.0)
      : nx(g.nx), ny(g.ny), x(g.n_xfaces(), fill), y(g.n_yfaces(), fill) {}

  double& xf(int i, int j) { return x[std::size_t(j) * (nx + 1) + i]; }
  double xf(int i, int j) const { return x[std::size_t(j) * (nx + 1) + i]; }
  double& yf(int i, int j) { return y[std::size_t(j) * nx + i]; }
  double yf(int i, int j) const { return y[std::size_t(j) * nx + i]; }

  bool matches(const Grid& g) const {
    return nx == g.nx && ny == g.ny && x.size() == g.n_xfaces() && y.size() == g.n_yfaces();
  }

  /// Zero the normal component on the four walls (no-slip / no-flux).
  void zero_boundary_normal() {
    for (int j = 0; j < ny; ++j) xf(0, j) = xf(nx, j) = 0.0;
    for (int i = 0; i < nx; ++i) yf(i, 0) = yf(i, ny) = 0.0;
  }
  double max_boundary_normal() const {
    double m = 0.0;
    for (int j = 0; j < ny; ++j) m = std::max({m, std::abs(xf(0, j)), std::abs(xf(nx, j))});
    for (int i = 0; i < nx; ++i) m = std::max({m, std::abs(yf(i, 0)), std::abs(yf(i, ny))});
    return m;
  }
  double max_abs() const {
    double m = 0.0;
    for (double a : x) m = std::max(m, std::abs(a));
    for (double a : y) m = std::max(m, std::abs(a));
    return m;
  }
  bool all_finite() const {
    auto fin = [](double a) { return std::isfinite(a); };
    return std::all_of(x.begin(), x.end(), fin) && std::all_of(y.begin(), y.end(), fin);
  }
};

// ---------------------------------------------------------------------------
// Elementwise helpers

namespace detail {
inline void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}
}  // namespace detail

inline CellField& axpy(double a, const CellField& x, CellField& y) {
  detail::require(x.v.size() == y.v.size(), "axpy: cell field size mismatch");
  for (std::size_t k = 0; k < y.v.size(); ++k) y.v[k] += a * x.v[k];
  return y;
}
inline FaceField& axpy(double a, const FaceField& x, FaceField& y) {
  detail::require(x.x.size() == y.x.size() && x.y.size() == y.y.size(), "axpy: face field size mismatch");
  for (std::size_t k = 0; k < y.x.size(); ++k) y.x[k] += a * x.x[k];
  for (std::size_t k = 0; k < y.y.size(); ++k) y.y[k] += a * x.y[k];
  return y;
}
inline CellField scaled(double a, CellField f) {
  for (double& x : f.v) x *= a;
  return f;
}
inline FaceField scaled(double a, FaceField f) {
  for (double& x : f.x) x *= a;
  for (double& x : f.y) x *= a;
  return f;
}
inline CellField difference(const CellField& a, const CellField& b) {
  CellField d = a;
  return axpy(-1.0, b, d);
}
inline FaceField difference(const FaceField& a, const FaceField& b) {
  FaceField d = a;
  return axpy(-1.0, b, d);
}

// ---------------------------------------------------------------------------
// Inner products. Cells carry weight dx*dy; faces carry dx*dy in the interior
// and dx*dy/2 on the walls, which is what makes <div f, s> = -<f, grad s>
// exact for Dirichlet-tagged scalars.

inline double xface_weight(const Grid& g, int i) {
  return (i == 0 || i == g.nx) ? 0.5 * g.cell_area() : g.cell_area();
}
inline double yface_weight(const Grid& g, int j) {
  return (j == 0 || j == g.ny) ? 0.5 * g.cell_area() : g.cell_area();
}

inline double inner(const CellField& a, const CellField& b, const Grid& g) {
  detail::require(a.matches(g) && b.matches(g), "inner: cell field layout mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
  return s * g.cell_area();
}

inline double inner(const FaceField& a, const FaceField& b, const Grid& g) {
  detail::require(a.matches(g) && b.matches(g), "inner: face field layout mismatch");
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) s += xface_weight(g, i) * a.xf(i, j) * b.xf(i, j);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) s += yface_weight(g, j) * a.yf(i, j) * b.yf(i, j);
  return s;
}

inline double norm(const CellField& a, const Grid& g) { return std::sqrt(inner(a, a, g)); }
inline double norm(const FaceField& a, const Grid& g) { return std::sqrt(inner(a, a, g)); }

inline double mean(const CellField& a) {
  double s = 0.0;
  for (double x : a.v) s += x;
  return s / double(a.v.size());
}

// ---------------------------------------------------------------------------
// gradient / divergence

/// Two-point differences on interior faces. Wall faces: zero for Neumann or
/// untagged fields, one-sided difference against the trace for Dirichlet.
inline FaceField gradient(const CellField& s, const Grid& g) {
  detail::require(s.matches(g), "gradient: cell field does not match grid");
  const double dx = g.dx(), dy = g.dy();
  FaceField f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) f.xf(i, j) = (s(i, j) - s(i - 1, j)) / dx;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) f.yf(i, j) = (s(i, j) - s(i, j - 1)) / dy;
  if (s.bc == Bc::dirichlet) {
    const auto& t = s.trace;
    detail::require(int(t.left.size()) == g.ny && int(t.right.size()) == g.ny && int(t.bottom.size()) == g.nx &&
                        int(t.top.size()) == g.nx,
                    "gradient: boundary trace does not match grid");
    for (int j = 0; j < g.ny; ++j) {
      f.xf(0, j) = (s(0, j) - t.left[j]) / (0.5 * dx);
      f.xf(g.nx, j) = (t.right[j] - s(g.nx - 1, j)) / (0.5 * dx);
    }
    for (int i = 0; i < g.nx; ++i) {
      f.yf(i, 0) = (s(i, 0) - t.bottom[i]) / (0.5 * dy);
      f.yf(i, g.ny) = (t.top[i] - s(i, g.ny - 1)) / (0.5 * dy);
    }
  }
  return f;
}

inline CellField divergence(const FaceField& f, const Grid& g) {
  detail::require(f.matches(g), "divergence: face field does not match grid");
  const double dx = g.dx(), dy = g.dy();
  CellField d(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      d(i, j) = (f.xf(i + 1, j) - f.xf(i, j)) / dx + (f.yf(i, j + 1) - f.yf(i, j)) / dy;
  return d;
}

/// Cell data carried to faces. Interior faces take the arithmetic (or
/// harmonic) mean of the two neighbours, wall faces the adjacent cell value.
enum class FaceMean { arithmetic, harmonic };

inline FaceField to_faces(const CellField& c, const Grid& g, FaceMean mode = FaceMean::arithmetic) {
  detail::require(c.matches(g), "to_faces: cell field does not match grid");
  auto avg = [mode](double a, double b) {
    if (mode == FaceMean::arithmetic) return 0.5 * (a + b);
    return (a + b) != 0.0 ? 2.0 * a * b / (a + b) : 0.0;
  };
  FaceField f(g);
  for (int j = 0; j < g.ny; ++j) {
    f.xf(0, j) = c(0, j);
    f.xf(g.nx, j) = c(g.nx - 1, j);
    for (int i = 1; i < g.nx; ++i) f.xf(i, j) = avg(c(i - 1, j), c(i, j));
  }
  for (int i = 0; i < g.nx; ++i) {
    f.yf(i, 0) = c(i, 0);
    f.yf(i, g.ny) = c(i, g.ny - 1);
    for (int j = 1; j < g.ny; ++j) f.yf(i, j) = avg(c(i, j - 1), c(i, j));
  }
  return f;
}

inline FaceField hadamard(const FaceField& a, const FaceField& b) {
  detail::require(a.x.size() == b.x.size() && a.y.size() == b.y.size(), "hadamard: layout mismatch");
  FaceField r = a;
  for (std::size_t k = 0; k < r.x.size(); ++k) r.x[k] *= b.x[k];
  for (std::size_t k = 0; k < r.y.size(); ++k) r.y[k] *= b.y[k];
  return r;
}

/// div(c grad s) with the boundary behaviour of s's tag.
inline CellField weighted_laplacian(const FaceField& c, const CellField& s, const Grid& g) {
  detail::require(c.matches(g), "weighted_laplacian: coefficient does not match grid");
  for (double a : c.x)
    if (!(a > 0.0)) throw CoefficientBoundError("weighted_laplacian: face coefficient must be positive");
  for (double a : c.y)
    if (!(a > 0.0)) throw CoefficientBoundError("weighted_laplacian: face coefficient must be positive");
  return divergence(hadamard(c, gradient(s, g)), g);
}

inline CellField laplacian(const CellField& s, const Grid& g) { return divergence(gradient(s, g), g); }

// ---------------------------------------------------------------------------
// Scalar transport

/// div(adv * s_face) with centred face values. Wall faces contribute nothing;
/// adv is expected to have zero normal component there.
inline CellField convective_term(const FaceField& adv, const CellField& s, const Grid& g) {
  detail::require(adv.matches(g) && s.matches(g), "convective_term: layout mismatch");
  const double dx = g.dx(), dy = g.dy();
  CellField r(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      const double flux = adv.xf(i, j) * 0.5 * (s(i - 1, j) + s(i, j)) / dx;
      r(i - 1, j) += flux;
      r(i, j) -= flux;
    }
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double flux = adv.yf(i, j) * 0.5 * (s(i, j - 1) + s(i, j)) / dy;
      r(i, j - 1) += flux;
      r(i, j) -= flux;
    }
  return r;
}

/// First-order upwind variant of convective_term. For a discretely
/// divergence-free adv the implicit operator I/h + upwind + diffusion is an
/// M-matrix, which is what gives the discrete maximum principle.
inline CellField upwind_convective_term(const FaceField& adv, const CellField& s, const Grid& g) {
  detail::require(adv.matches(g) && s.matches(g), "upwind_convective_term: layout mismatch");
  const double dx = g.dx(), dy = g.dy();
  CellField r(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      const double a = adv.xf(i, j);
      const double flux = (a > 0.0 ? a * s(i - 1, j) : a * s(i, j)) / dx;
      r(i - 1, j) += flux;
      r(i, j) -= flux;
    }
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double a = adv.yf(i, j);
      const double flux = (a > 0.0 ? a * s(i, j - 1) : a * s(i, j)) / dy;
      r(i, j - 1) += flux;
      r(i, j) -= flux;
    }
  return r;
}

// ---------------------------------------------------------------------------
// Momentum transport on the staggered control volumes

/// Divergence-form transport div(u (x) F) of the face velocity u by the face
/// mass flux F, centred. Testing against u gives (1/2) sum u^2 * avg(div F),
/// where avg(div F) is the mean of div F over the two cells sharing a face.
inline FaceField momentum_transport(const FaceField& flux, const FaceField& u, const Grid& g) {
  detail::require(flux.matches(g) && u.matches(g), "momentum_transport: layout mismatch");
  const double dx = g.dx(), dy = g.dy();
  const int nx = g.nx, ny = g.ny;
  FaceField r(g);
  // x-momentum, interior x-faces i = 1..nx-1
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const double ue = u.xf(i + 1, j), uw = u.xf(i - 1, j), uc = u.xf(i, j);
      const double fe = 0.5 * (flux.xf(i, j) + flux.xf(i + 1, j));
      const double fw = 0.5 * (flux.xf(i - 1, j) + flux.xf(i, j));
      const double fn = 0.5 * (flux.yf(i - 1, j + 1) + flux.yf(i, j + 1));
      const double fs = 0.5 * (flux.yf(i - 1, j) + flux.yf(i, j));
      const double un = j + 1 < ny ? u.xf(i, j + 1) : 0.0;
      const double us = j > 0 ? u.xf(i, j - 1) : 0.0;
      r.xf(i, j) = (fe * 0.5 * (uc + ue) - fw * 0.5 * (uc + uw)) / dx + (fn * 0.5 * (uc + un) - fs * 0.5 * (uc + us)) / dy;
    }
  // y-momentum, interior y-faces j = 1..ny-1
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double vn = u.yf(i, j + 1), vs = u.yf(i, j - 1), vc = u.yf(i, j);
      const double fn = 0.5 * (flux.yf(i, j) + flux.yf(i, j + 1));
      const double fs = 0.5 * (flux.yf(i, j - 1) + flux.yf(i, j));
      const double fe = 0.5 * (flux.xf(i + 1, j - 1) + flux.xf(i + 1, j));
      const double fw = 0.5 * (flux.xf(i, j - 1) + flux.xf(i, j));
      const double ve = i + 1 < nx ? u.yf(i + 1, j) : 0.0;
      const double vw = i > 0 ? u.yf(i - 1, j) : 0.0;
      r.yf(i, j) = (fn * 0.5 * (vc + vn) - fs * 0.5 * (vc + vs)) / dy + (fe * 0.5 * (vc + ve) - fw * 0.5 * (vc + vw)) / dx;
    }
  return r;
}

/// avg(div F) on interior faces, zero on walls.
inline FaceField face_mean_divergence(const FaceField& flux, const Grid& g) {
  const CellField d = divergence(flux, g);
  FaceField r(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) r.xf(i, j) = 0.5 * (d(i - 1, j) + d(i, j));
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) r.yf(i, j) = 0.5 * (d(i, j - 1) + d(i, j));
  return r;
}

/// Skew-symmetrised div(rho_k u (x) u): the transport by F = rho_k adv minus
/// (1/2) avg(div F) u. Testing against u gives exactly zero.
inline FaceField momentum_convection(const CellField& rho_k, const FaceField& adv, const FaceField& u, const Grid& g) {
  detail::require(rho_k.matches(g), "momentum_convection: density does not match grid");
  for (double r : rho_k.v)
    if (!(r > 0.0)) throw CoefficientBoundError("momentum_convection: density must be positive");
  const FaceField flux = hadamard(to_faces(rho_k, g), adv);
  FaceField r = momentum_transport(flux, u, g);
  axpy(-0.5, hadamard(face_mean_divergence(flux, g), u), r);
  return r;
}

// ---------------------------------------------------------------------------
// Velocity gradients at cells and corners

/// Corner (i, j) sits at (i dx, j dy); corners on walls carry half weight,
/// domain corners a quarter.
inline double corner_weight(const Grid& g, int i, int j) {
  double w = g.cell_area();
  if (i == 0 || i == g.nx) w *= 0.5;
  if (j == 0 || j == g.ny) w *= 0.5;
  return w;
}

/// du/dx, dv/dy at cells; du/dy, dv/dx at corners with the no-slip mirror
/// ghost on walls.
struct VelocityGradient {
  std::vector<double> ux, vy;  // nx*ny
  std::vector<double> uy, vx;  // (nx+1)*(ny+1)
};

inline VelocityGradient velocity_gradient(const FaceField& u, const Grid& g) {
  detail::require(u.matches(g), "velocity_gradient: layout mismatch");
  const int nx = g.nx, ny = g.ny;
  const double dx = g.dx(), dy = g.dy();
  VelocityGradient d;
  d.ux.assign(g.n_cells(), 0.0);
  d.vy.assign(g.n_cells(), 0.0);
  d.uy.assign(std::size_t(nx + 1) * (ny + 1), 0.0);
  d.vx.assign(std::size_t(nx + 1) * (ny + 1), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      d.ux[j * nx + i] = (u.xf(i + 1, j) - u.xf(i, j)) / dx;
      d.vy[j * nx + i] = (u.yf(i, j + 1) - u.yf(i, j)) / dy;
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const std::size_t k = std::size_t(j) * (nx + 1) + i;
      if (i > 0 && i < nx) {
        const double above = j < ny ? u.xf(i, j) : -u.xf(i, ny - 1);
        const double below = j > 0 ? u.xf(i, j - 1) : -u.xf(i, 0);
        d.uy[k] = (above - below) / dy;
      }
      if (j > 0 && j < ny) {
        const double right = i < nx ? u.yf(i, j) : -u.yf(nx - 1, j);
        const double left = i > 0 ? u.yf(i - 1, j) : -u.yf(0, j);
        d.vx[k] = (right - left) / dx;
      }
    }
  return d;
}

/// Transpose of the cell/corner difference maps: returns G with
/// <G, v>_faces = sum_cells w (sxx dv_x/dx + syy dv_y/dy) + sum_corners w sxy (dv_x/dy + dv_y/dx)
/// for every no-slip v. Wall faces of the result are zero.
inline FaceField stress_divergence_transpose(const std::vector<double>& sxx, const std::vector<double>& syy,
                                             const std::vector<double>& sxy_uy, const std::vector<double>& sxy_vx,
                                             const Grid& g) {
  const int nx = g.nx, ny = g.ny;
  const double dx = g.dx(), dy = g.dy();
  auto corner = [nx](int i, int j) { return std::size_t(j) * (nx + 1) + i; };
  FaceField r(g);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      r.xf(i, j) = (sxx[j * nx + i - 1] - sxx[j * nx + i]) / dx + (sxy_uy[corner(i, j)] - sxy_uy[corner(i, j + 1)]) / dy;
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      r.yf(i, j) = (syy[(j - 1) * nx + i] - syy[j * nx + i]) / dy + (sxy_vx[corner(i, j)] - sxy_vx[corner(i + 1, j)]) / dx;
  return r;
}

/// Corner value of a cell field: mean of the adjacent cells (4 inside, 2 on
/// a wall, 1 at a domain corner).
inline std::vector<double> cells_to_corners(const CellField& c, const Grid& g) {
  const int nx = g.nx, ny = g.ny;
  std::vector<double> r(std::size_t(nx + 1) * (ny + 1), 0.0);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      double s = 0.0;
      int n = 0;
      for (int jj = j - 1; jj <= j; ++jj)
        for (int ii = i - 1; ii <= i; ++ii)
          if (ii >= 0 && ii < nx && jj >= 0 && jj < ny) {
            s += c(ii, jj);
            ++n;
          }
      r[std::size_t(j) * (nx + 1) + i] = s / n;
    }
  return r;
}

/// -div(2 nu D u); its energy <A u, u> is the discrete integral of 2 nu |Du|^2.
inline FaceField viscous_operator(const CellField& nu, const FaceField& u, const Grid& g) {
  detail::require(nu.matches(g), "viscous_operator: viscosity does not match grid");
  const VelocityGradient d = velocity_gradient(u, g);
  const std::vector<double> nuc = cells_to_corners(nu, g);
  std::vector<double> sxx(g.n_cells()), syy(g.n_cells()), sxy(nuc.size());
  for (std::size_t k = 0; k < sxx.size(); ++k) {
    sxx[k] = 2.0 * nu.v[k] * d.ux[k];
    syy[k] = 2.0 * nu.v[k] * d.vy[k];
  }
  for (std::size_t k = 0; k < sxy.size(); ++k) sxy[k] = nuc[k] * (d.uy[k] + d.vx[k]);
  return stress_divergence_transpose(sxx, syy, sxy, sxy, g);
}

/// -Delta_h u componentwise; <A u, v> = (grad u, grad v)_h.
inline FaceField vector_laplacian_operator(const FaceField& u, const Grid& g) {
  const VelocityGradient d = velocity_gradient(u, g);
  return stress_divergence_transpose(d.ux, d.vy, d.uy, d.vx, g);
}

/// ||grad u||^2 with cell and corner quadrature.
inline double velocity_gradient_norm_sq(const FaceField& u, const Grid& g) {
  const VelocityGradient d = velocity_gradient(u, g);
  double s = 0.0;
  for (std::size_t k = 0; k < d.ux.size(); ++k) s += (d.ux[k] * d.ux[k] + d.vy[k] * d.vy[k]) * g.cell_area();
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const std::size_t k = std::size_t(j) * (g.nx + 1) + i;
      s += corner_weight(g, i, j) * (d.uy[k] * d.uy[k] + d.vx[k] * d.vx[k]);
    }
  return s;
}

/// sum of weight * nu |Du|^2 pieces, i.e. the discrete integral of nu |Du|^2.
inline double strain_energy(const CellField& nu, const FaceField& u, const Grid& g) {
  const VelocityGradient d = velocity_gradient(u, g);
  const std::vector<double> nuc = cells_to_corners(nu, g);
  double s = 0.0;
  for (std::size_t k = 0; k < d.ux.size(); ++k)
    s += nu.v[k] * (d.ux[k] * d.ux[k] + d.vy[k] * d.vy[k]) * g.cell_area();
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const std::size_t k = std::size_t(j) * (g.nx + 1) + i;
      const double e = d.uy[k] + d.vx[k];
      s += corner_weight(g, i, j) * nuc[k] * 0.5 * e * e;
    }
  return s;
}

// ---------------------------------------------------------------------------
// Discrete stream function. psi lives on interior corners; curl psi spans
// exactly the discretely divergence-free face fields with zero wall normals.

inline std::size_t n_stream_unknowns(const Grid& g) { return std::size_t(g.nx - 1) * (g.ny - 1); }

inline FaceField curl(std::span<const double> psi, const Grid& g) {
  detail::require(psi.size() == n_stream_unknowns(g), "curl: stream function size mismatch");
  const int nx = g.nx, ny = g.ny;
  const double dx = g.dx(), dy = g.dy();
  auto at = [&](int i, int j) -> double {
    if (i <= 0 || i >= nx || j <= 0 || j >= ny) return 0.0;
    return psi[std::size_t(j - 1) * (nx - 1) + (i - 1)];
  };
  FaceField u(g);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) u.xf(i, j) = (at(i, j + 1) - at(i, j)) / dy;
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) u.yf(i, j) = -(at(i + 1, j) - at(i, j)) / dx;
  return u;
}

/// Adjoint of curl under the weighted face inner product.
inline std::vector<double> curl_transpose(const FaceField& f, const Grid& g) {
  detail::require(f.matches(g), "curl_transpose: layout mismatch");
  const int nx = g.nx, ny = g.ny;
  const double dx = g.dx(), dy = g.dy(), w = g.cell_area();
  std::vector<double> r(n_stream_unknowns(g), 0.0);
  auto add = [&](int i, int j, double val) {
    if (i <= 0 || i >= nx || j <= 0 || j >= ny) return;
    r[std::size_t(j - 1) * (nx - 1) + (i - 1)] += val;
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const double c = w * f.xf(i, j) / dy;
      add(i, j + 1, c);
      add(i, j, -c);
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double c = w * f.yf(i, j) / dx;
      add(i + 1, j, -c);
      add(i, j, c);
    }
  return r;
}

}  // namespace thermocap
