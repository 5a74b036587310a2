#pragma once

// Matrix-free Krylov solvers on flat std::vector<double> unknowns. Reductions
// run in a fixed order, so repeated solves are bitwise reproducible.

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "thermocap/error.hpp"

namespace thermocap {

using Vec = std::vector<double>;

struct SolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  std::size_t max_iter = 0;  // 0: ten times the number of unknowns

  std::size_t iteration_cap(std::size_t n) const { return max_iter > 0 ? max_iter : 10 * std::max<std::size_t>(n, 1); }
};

struct SolveReport {
  std::size_t iterations = 0;
  double final_residual = 0.0;
  double target = 0.0;
  bool converged = false;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, SolveReport r)
      : Error(what + " did not converge (iterations " + std::to_string(r.iterations) + ", residual " +
              std::to_string(r.final_residual) + ")"),
        report_(r) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

struct SolveResult {
  Vec x;
  SolveReport report;
};

using LinearOp = std::function<Vec(const Vec&)>;

namespace krylov {

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}
inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }
inline void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}
inline void project_zero_mean(Vec& v) {
  if (v.empty()) return;
  double s = 0.0;
  for (double x : v) s += x;
  s /= double(v.size());
  for (double& x : v) x -= s;
}

}  // namespace krylov

/// Optional hook applied to every iterate and residual; used to keep Neumann
/// solves in the zero-mean subspace.
using Projection = std::function<void(Vec&)>;

/// Conjugate gradients for a symmetric positive (semi)definite operator.
/// Convergence: ||b - A x|| <= max(rel_tol ||b||, abs_tol). Throws
/// ConvergenceError on exhausting the iteration cap.
inline SolveResult cg_solve(const LinearOp& apply, const Vec& rhs, const SolverConfig& cfg, Vec x0 = {},
                            const Projection& project = nullptr, const char* name = "cg") {
  using namespace krylov;
  const std::size_t n = rhs.size();
  SolveResult out;
  out.x = x0.empty() ? Vec(n, 0.0) : std::move(x0);
  if (project) project(out.x);
  const double target = std::max(cfg.rel_tol * norm2(rhs), cfg.abs_tol);
  out.report.target = target;

  Vec r = rhs;
  if (norm2(out.x) > 0.0) axpy(-1.0, apply(out.x), r);
  if (project) project(r);
  double rr = dot(r, r);
  out.report.final_residual = std::sqrt(rr);
  if (out.report.final_residual <= target) {
    out.report.converged = true;
    return out;
  }
  Vec p = r;
  const std::size_t cap = cfg.iteration_cap(n);
  for (std::size_t it = 1; it <= cap; ++it) {
    Vec q = apply(p);
    if (project) project(q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) break;
    const double alpha = rr / pq;
    axpy(alpha, p, out.x);
    axpy(-alpha, q, r);
    const double rr_new = dot(r, r);
    out.report.iterations = it;
    out.report.final_residual = std::sqrt(rr_new);
    if (out.report.final_residual <= target) {
      if (project) project(out.x);
      out.report.converged = true;
      return out;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
  }
  throw ConvergenceError(name, out.report);
}

/// Conjugate gradients for an operator T that is self-adjoint and positive
/// definite in the metric <x, y>_M = x . (M y), M symmetric positive definite.
/// The residual test uses the Euclidean norm.
inline SolveResult cg_solve_metric(const LinearOp& apply, const LinearOp& metric, const Vec& rhs,
                                   const SolverConfig& cfg, Vec x0 = {}, const char* name = "cg-metric") {
  using namespace krylov;
  const std::size_t n = rhs.size();
  SolveResult out;
  out.x = x0.empty() ? Vec(n, 0.0) : std::move(x0);
  const double target = std::max(cfg.rel_tol * norm2(rhs), cfg.abs_tol);
  out.report.target = target;

  Vec r = rhs;
  if (norm2(out.x) > 0.0) axpy(-1.0, apply(out.x), r);
  out.report.final_residual = norm2(r);
  if (out.report.final_residual <= target) {
    out.report.converged = true;
    return out;
  }
  Vec Mr = metric(r);
  double rMr = dot(r, Mr);
  Vec p = r;
  Vec Mp = Mr;
  const std::size_t cap = cfg.iteration_cap(n);
  for (std::size_t it = 1; it <= cap; ++it) {
    const Vec q = apply(p);
    const double qMp = dot(q, Mp);
    if (!(qMp > 0.0)) break;
    const double alpha = rMr / qMp;
    axpy(alpha, p, out.x);
    axpy(-alpha, q, r);
    out.report.iterations = it;
    out.report.final_residual = norm2(r);
    if (out.report.final_residual <= target) {
      out.report.converged = true;
      return out;
    }
    Mr = metric(r);
    const double rMr_new = dot(r, Mr);
    const double beta = rMr_new / rMr;
    rMr = rMr_new;
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = r[k] + beta * p[k];
      Mp[k] = Mr[k] + beta * Mp[k];
    }
  }
  throw ConvergenceError(name, out.report);
}

/// BiCGStab for general nonsingular operators.
inline SolveResult bicgstab_solve(const LinearOp& apply, const Vec& rhs, const SolverConfig& cfg, Vec x0 = {},
                                  const Projection& project = nullptr, const char* name = "bicgstab") {
  using namespace krylov;
  const std::size_t n = rhs.size();
  SolveResult out;
  out.x = x0.empty() ? Vec(n, 0.0) : std::move(x0);
  if (project) project(out.x);
  const double target = std::max(cfg.rel_tol * norm2(rhs), cfg.abs_tol);
  out.report.target = target;

  Vec r = rhs;
  if (norm2(out.x) > 0.0) axpy(-1.0, apply(out.x), r);
  if (project) project(r);
  out.report.final_residual = norm2(r);
  if (out.report.final_residual <= target) {
    out.report.converged = true;
    return out;
  }
  const std::size_t cap = cfg.iteration_cap(n);
  std::size_t restarts = 0;
  while (restarts < 5) {
    const Vec r_hat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    Vec v(n, 0.0), p(n, 0.0);
    bool breakdown = false;
    for (; out.report.iterations < cap;) {
      const double rho_new = dot(r_hat, r);
      if (rho_new == 0.0 || omega == 0.0) {
        breakdown = true;
        break;
      }
      const double beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - omega * v[k]);
      v = apply(p);
      if (project) project(v);
      const double rv = dot(r_hat, v);
      if (rv == 0.0) {
        breakdown = true;
        break;
      }
      alpha = rho / rv;
      Vec s = r;
      axpy(-alpha, v, s);
      ++out.report.iterations;
      if (norm2(s) <= target) {
        axpy(alpha, p, out.x);
        r = s;
        out.report.final_residual = norm2(r);
        out.report.converged = true;
        if (project) project(out.x);
        return out;
      }
      const Vec t = [&] {
        Vec tt = apply(s);
        if (project) project(tt);
        return tt;
      }();
      const double tt = dot(t, t);
      omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
      axpy(alpha, p, out.x);
      axpy(omega, s, out.x);
      r = s;
      axpy(-omega, t, r);
      out.report.final_residual = norm2(r);
      if (out.report.final_residual <= target) {
        out.report.converged = true;
        if (project) project(out.x);
        return out;
      }
    }
    if (!breakdown) break;
    // Restart from the true residual after a breakdown.
    r = rhs;
    axpy(-1.0, apply(out.x), r);
    if (project) project(r);
    out.report.final_residual = norm2(r);
    if (out.report.final_residual <= target) {
      out.report.converged = true;
      return out;
    }
    ++restarts;
  }
  throw ConvergenceError(name, out.report);
}

}  // namespace thermocap
