#pragma once

// Small dense reference solvers for cross-checking the matrix-free ones.
// The scalar stencils are assembled entry by entry from the difference
// formulas; the saddle-point system is factorised as a whole, with the
// pressure gauge imposed by a Lagrange multiplier.

#include <Eigen/Dense>

#include "thermocap/elliptic.hpp"
#include "thermocap/grid.hpp"

namespace thermocap::oracle {

using Mat = Eigen::MatrixXd;
using Col = Eigen::VectorXd;

inline Col col(const std::vector<double>& v) { return Eigen::Map<const Col>(v.data(), Eigen::Index(v.size())); }

/// Dense matrix of -div(c grad .) on cells. Wall faces contribute nothing for
/// Neumann data and a half-cell one-sided coupling to the trace for Dirichlet.
inline Mat scalar_matrix(const FaceField& c, const Grid& g, bool dirichlet) {
  const int nx = g.nx, ny = g.ny;
  const double dx2 = g.dx() * g.dx(), dy2 = g.dy() * g.dy();
  Mat L = Mat::Zero(Eigen::Index(nx) * ny, Eigen::Index(nx) * ny);
  auto id = [nx](int i, int j) { return Eigen::Index(j) * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const auto k = id(i, j);
      auto couple = [&](int ii, int jj, double w) {
        L(k, k) += w;
        L(k, id(ii, jj)) -= w;
      };
      if (i > 0) couple(i - 1, j, c.xf(i, j) / dx2);
      else if (dirichlet) L(k, k) += 2.0 * c.xf(0, j) / dx2;
      if (i < nx - 1) couple(i + 1, j, c.xf(i + 1, j) / dx2);
      else if (dirichlet) L(k, k) += 2.0 * c.xf(nx, j) / dx2;
      if (j > 0) couple(i, j - 1, c.yf(i, j) / dy2);
      else if (dirichlet) L(k, k) += 2.0 * c.yf(i, 0) / dy2;
      if (j < ny - 1) couple(i, j + 1, c.yf(i, j + 1) / dy2);
      else if (dirichlet) L(k, k) += 2.0 * c.yf(i, ny) / dy2;
    }
  return L;
}

/// Boundary load of the Dirichlet matrix: L s = f + load(trace).
inline Col dirichlet_load(const FaceField& c, const BoundaryTrace& t, const Grid& g) {
  const int nx = g.nx, ny = g.ny;
  const double dx2 = g.dx() * g.dx(), dy2 = g.dy() * g.dy();
  Col b = Col::Zero(Eigen::Index(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    b(Eigen::Index(j) * nx) += 2.0 * c.xf(0, j) * t.left[j] / dx2;
    b(Eigen::Index(j) * nx + nx - 1) += 2.0 * c.xf(nx, j) * t.right[j] / dx2;
  }
  for (int i = 0; i < nx; ++i) {
    b(i) += 2.0 * c.yf(i, 0) * t.bottom[i] / dy2;
    b(Eigen::Index(ny - 1) * nx + i) += 2.0 * c.yf(i, ny) * t.top[i] / dy2;
  }
  return b;
}

/// Zero-mean solution of -div(c grad u) = f with zero-flux walls.
inline Col neumann_solve(const FaceField& c, const Col& f, const Grid& g) {
  const Eigen::Index n = f.size();
  Mat K = Mat::Zero(n + 1, n + 1);
  K.topLeftCorner(n, n) = scalar_matrix(c, g, false);
  K.block(0, n, n, 1).setOnes();
  K.block(n, 0, 1, n).setOnes();
  Col rhs = Col::Zero(n + 1);
  rhs.head(n) = f;
  return K.fullPivLu().solve(rhs).head(n);
}

inline Col dirichlet_solve(const FaceField& c, double sigma, const Col& f, const BoundaryTrace& t, const Grid& g) {
  Mat L = scalar_matrix(c, g, true);
  L.diagonal().array() += sigma;
  return L.fullPivLu().solve(f + dirichlet_load(c, t, g));
}

struct StokesSolution {
  FaceField u;
  Col p;
};

/// Interior face unknowns of a no-slip velocity, x faces first.
inline std::vector<std::size_t> interior_x(const Grid& g) {
  std::vector<std::size_t> k;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) k.push_back(std::size_t(j) * (g.nx + 1) + i);
  return k;
}
inline std::vector<std::size_t> interior_y(const Grid& g) {
  std::vector<std::size_t> k;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) k.push_back(std::size_t(j) * g.nx + i);
  return k;
}

/// Solves op(u) + grad p = rhs, div u = 0, mean p = 0 as one dense system.
/// The velocity block is the matrix of op.apply, probed column by column.
inline StokesSolution stokes_solve(const MomentumOperator& op, const FaceField& rhs, const Grid& g) {
  const auto ix = interior_x(g), iy = interior_y(g);
  const Eigen::Index nu = Eigen::Index(ix.size() + iy.size()), np = Eigen::Index(g.n_cells());
  const Eigen::Index n = nu + np + 1;
  Mat K = Mat::Zero(n, n);
  auto unpack = [&](const FaceField& f, Eigen::Index c) {
    for (std::size_t a = 0; a < ix.size(); ++a) K(Eigen::Index(a), c) = f.x[ix[a]];
    for (std::size_t a = 0; a < iy.size(); ++a) K(Eigen::Index(ix.size() + a), c) = f.y[iy[a]];
  };
  for (Eigen::Index c = 0; c < nu; ++c) {
    FaceField e(g);
    if (c < Eigen::Index(ix.size())) e.x[ix[c]] = 1.0;
    else e.y[iy[c - ix.size()]] = 1.0;
    unpack(op.apply(e, g), c);
  }
  const double dx = g.dx(), dy = g.dy();
  auto cell = [&](int i, int j) { return nu + Eigen::Index(j) * g.nx + i; };
  Eigen::Index r = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i, ++r) {
      K(r, cell(i, j)) += 1.0 / dx;
      K(r, cell(i - 1, j)) -= 1.0 / dx;
      K(cell(i, j), r) += 1.0 / dx;
      K(cell(i - 1, j), r) -= 1.0 / dx;
    }
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i, ++r) {
      K(r, cell(i, j)) += 1.0 / dy;
      K(r, cell(i, j - 1)) -= 1.0 / dy;
      K(cell(i, j), r) += 1.0 / dy;
      K(cell(i, j - 1), r) -= 1.0 / dy;
    }
  for (Eigen::Index c = 0; c < np; ++c) {
    K(nu + np, nu + c) = 1.0;
    K(nu + c, nu + np) = 1.0;
  }
  Col b = Col::Zero(n);
  for (std::size_t a = 0; a < ix.size(); ++a) b(Eigen::Index(a)) = rhs.x[ix[a]];
  for (std::size_t a = 0; a < iy.size(); ++a) b(Eigen::Index(ix.size() + a)) = rhs.y[iy[a]];
  const Col x = K.fullPivLu().solve(b);
  StokesSolution s{FaceField(g), x.segment(nu, np)};
  for (std::size_t a = 0; a < ix.size(); ++a) s.u.x[ix[a]] = x(Eigen::Index(a));
  for (std::size_t a = 0; a < iy.size(); ++a) s.u.y[iy[a]] = x(Eigen::Index(ix.size() + a));
  return s;
}

}  // namespace thermocap::oracle
