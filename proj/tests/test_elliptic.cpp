#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "thermocap/elliptic.hpp"
#include "thermocap/oracle.hpp"

using namespace thermocap;
using testing_util::max_diff;
using testing_util::Random;

namespace {

const SolverConfig tight{1e-13, 1e-15, 0};

CellField zero_mean_cells(Random& rnd, const Grid& g) {
  CellField f = rnd.cells(g);
  krylov::project_zero_mean(f.v);
  return f;
}

std::vector<double> to_std(const oracle::Col& c) { return std::vector<double>(c.data(), c.data() + c.size()); }

}  // namespace

TEST(NeumannInverse, MatchesDenseSolve) {
  Random rnd(11);
  for (auto [nx, ny] : {std::pair{4, 4}, {6, 5}, {3, 7}}) {
    const Grid g(nx, ny, 1.3, 0.9);
    const CellField f = zero_mean_cells(rnd, g);
    const CellField u = neumann_inverse(f, g, tight);
    const auto ref = oracle::neumann_solve(FaceField(g, 1.0), oracle::col(f.v), g);
    EXPECT_LE(max_diff(u.v, to_std(ref)), 1e-10 * (1 + ref.cwiseAbs().maxCoeff()));
    EXPECT_NEAR(mean(u), 0.0, 1e-13);
  }
}

TEST(NeumannInverse, WeightedMatchesDenseSolve) {
  Random rnd(12);
  const Grid g(5, 6, 2.0, 1.0);
  const FaceField c = rnd.faces(g, 0.2, 3.0);
  const CellField f = zero_mean_cells(rnd, g);
  const CellField u = weighted_neumann_solve(c, f, g, tight);
  const auto ref = oracle::neumann_solve(c, oracle::col(f.v), g);
  EXPECT_LE(max_diff(u.v, to_std(ref)), 1e-10 * (1 + ref.cwiseAbs().maxCoeff()));
}

TEST(NeumannInverse, InvertsLaplacian) {
  Random rnd(13);
  const Grid g(16, 16);
  const CellField f = zero_mean_cells(rnd, g);
  CellField u = neumann_inverse(f, g, tight);
  u.bc = Bc::neumann;
  const CellField lap = laplacian(u, g);
  for (std::size_t k = 0; k < f.v.size(); ++k) EXPECT_NEAR(-lap.v[k], f.v[k], 1e-9);
}

TEST(NeumannInverse, RejectsNonzeroMean) {
  const Grid g(4, 4);
  CellField f(g, 0.0);
  f(1, 1) = 1.0;
  EXPECT_THROW(neumann_inverse(f, g), CompatibilityError);
}

TEST(NeumannInverse, ConstantMobilityScales) {
  Random rnd(14);
  const Grid g(8, 6);
  const CellField f = zero_mean_cells(rnd, g), q = rnd.cells(g, -0.9, 0.9);
  const double c = 2.5;
  const CellField a = weighted_neumann_inverse(q, CoefficientModel::constant(c), f, g, tight);
  const CellField b = neumann_inverse(f, g, tight);
  for (std::size_t k = 0; k < a.v.size(); ++k) EXPECT_NEAR(a.v[k], b.v[k] / c, 1e-11);
}

TEST(NeumannInverse, PhaseDependentMobilityMatchesDense) {
  Random rnd(15);
  const Grid g(6, 6);
  const CellField f = zero_mean_cells(rnd, g), q = rnd.cells(g, -0.9, 0.9);
  const auto m = CoefficientModel::quadratic_phi(0.5, 2.0);
  const CellField u = weighted_neumann_inverse(q, m, f, g, tight);
  const auto ref = oracle::neumann_solve(to_faces(m.evaluate(q, CellField(g), g), g), oracle::col(f.v), g);
  EXPECT_LE(max_diff(u.v, to_std(ref)), 1e-10);
}

TEST(DirichletSolve, MatchesDenseSolve) {
  Random rnd(16);
  const Grid g(5, 4, 1.0, 2.0);
  const FaceField c = rnd.faces(g, 0.3, 2.0);
  const CellField f = rnd.cells(g);
  const BoundaryTrace t = rnd.trace(g);
  for (double sigma : {0.0, 3.0}) {
    const CellField u = dirichlet_solve(c, sigma, f, t, g, tight);
    const auto ref = oracle::dirichlet_solve(c, sigma, oracle::col(f.v), t, g);
    EXPECT_LE(max_diff(u.v, to_std(ref)), 1e-10);
    EXPECT_EQ(u.bc, Bc::dirichlet);
  }
}

TEST(HarmonicExtension, ConstantTraceIsReproduced) {
  const Grid g(7, 5);
  const CellField u = harmonic_extension(BoundaryTrace::constant(g, 0.7), g, tight);
  for (double x : u.v) EXPECT_NEAR(x, 0.7, 1e-12);
}

TEST(HarmonicExtension, MaximumPrinciple) {
  Random rnd(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Grid g(4 + trial % 9, 3 + trial % 7);
    const BoundaryTrace t = rnd.trace(g, -2.0, 3.0);
    const CellField u = harmonic_extension(t, g, tight);
    EXPECT_GE(u.min(), t.min() - 1e-12);
    EXPECT_LE(u.max(), t.max() + 1e-12);
  }
}

TEST(HarmonicExtension, RejectsNonFiniteTrace) {
  const Grid g(4, 4);
  BoundaryTrace t = BoundaryTrace::constant(g, 0.0);
  t.top[2] = NAN;
  EXPECT_THROW(harmonic_extension(t, g), DimensionError);
}

TEST(HarmonicExtension, SecondOrderForSmoothHarmonic) {
  auto exact = [](double x, double y) { return std::exp(x) * std::sin(y); };
  std::vector<double> err;
  for (int n : {16, 32, 64, 128}) {
    const Grid g(n, n, 1.0, 1.0);
    BoundaryTrace t = BoundaryTrace::constant(g, 0.0);
    for (int j = 0; j < n; ++j) {
      const double y = (j + 0.5) * g.dy();
      t.left[j] = exact(0.0, y);
      t.right[j] = exact(1.0, y);
    }
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) * g.dx();
      t.bottom[i] = exact(x, 0.0);
      t.top[i] = exact(x, 1.0);
    }
    const CellField u = harmonic_extension(t, g, tight);
    double e = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) e = std::max(e, std::abs(u(i, j) - exact((i + 0.5) * g.dx(), (j + 0.5) * g.dy())));
    err.push_back(e);
  }
  for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GT(std::log2(err[k - 1] / err[k]), 1.75);
}

namespace {

MomentumOperator random_operator(Random& rnd, const Grid& g, bool with_flux) {
  MomentumOperator op{rnd.faces(g, 0.5, 4.0), rnd.cells(g, 0.3, 2.0), std::nullopt, false};
  if (with_flux) op.flux = rnd.solenoidal(g, 2.0);
  return op;
}

}  // namespace

TEST(Stokes, MatchesDenseSaddlePoint) {
  Random rnd(21);
  for (bool with_flux : {false, true}) {
    const Grid g(4, 4, 1.0, 1.5);
    const MomentumOperator op = random_operator(rnd, g, with_flux);
    FaceField rhs = rnd.faces(g);
    rhs.zero_boundary_normal();
    const StokesResult s = stokes_solve(op, rhs, g, tight);
    const auto ref = oracle::stokes_solve(op, rhs, g);
    EXPECT_LE(max_diff(s.u.x, ref.u.x), 1e-9) << "flux " << with_flux;
    EXPECT_LE(max_diff(s.u.y, ref.u.y), 1e-9);
    EXPECT_LE(max_diff(s.p.v, to_std(ref.p)), 1e-8);
    EXPECT_LE(s.momentum_residual, 1e-10);
  }
}

TEST(Stokes, VelocityIsDiscretelySolenoidal) {
  Random rnd(22);
  const Grid g(16, 12, 2.0, 1.5);
  const MomentumOperator op = random_operator(rnd, g, true);
  const StokesResult s = stokes_solve(op, rnd.faces(g), g);
  EXPECT_LE(divergence(s.u, g).max_abs(), 1e-12 * (1 + s.u.max_abs()) / g.dx());
  EXPECT_EQ(s.u.max_boundary_normal(), 0.0);
  EXPECT_NEAR(mean(s.p), 0.0, 1e-12);
}

TEST(Stokes, GradientForcingGivesRestAndRecoversPressure) {
  Random rnd(23);
  const Grid g(10, 8);
  const MomentumOperator op = random_operator(rnd, g, false);
  CellField q = rnd.cells(g, 0.0, 1.0, Bc::neumann);
  const FaceField rhs = gradient(q, g);
  const StokesResult s = stokes_solve(op, rhs, g, tight);
  EXPECT_LE(s.u.max_abs(), 1e-10);
  const double mq = mean(q);
  for (std::size_t k = 0; k < q.v.size(); ++k) EXPECT_NEAR(s.p.v[k], q.v[k] - mq, 1e-9);
}

TEST(Stokes, InverseRoundTrip) {
  Random rnd(24);
  const Grid g(16, 16);
  // w solenoidal; S^{-1} applied to -Delta w must return w.
  const FaceField w = rnd.solenoidal(g);
  const FaceField f = vector_laplacian_operator(w, g);
  const FaceField back = stokes_inverse(f, g, tight);
  EXPECT_LE(max_diff(back.x, w.x), 1e-9);
  EXPECT_LE(max_diff(back.y, w.y), 1e-9);
}

TEST(Stokes, InverseMatchesDense) {
  Random rnd(25);
  const Grid g(4, 4);
  FaceField f = rnd.faces(g);
  f.zero_boundary_normal();
  const MomentumOperator op{FaceField(g, 0.0), CellField(g, 1.0), std::nullopt, true};
  const auto ref = oracle::stokes_solve(op, f, g);
  const FaceField w = stokes_inverse(f, g, tight);
  EXPECT_LE(max_diff(w.x, ref.u.x), 1e-10);
  EXPECT_LE(max_diff(w.y, ref.u.y), 1e-10);
}

TEST(Stokes, RejectsBadCoefficients) {
  const Grid g(4, 4);
  MomentumOperator op{FaceField(g, 1.0), CellField(g, 1.0), std::nullopt, false};
  op.nu(1, 1) = 0.0;
  EXPECT_THROW(stokes_solve(op, FaceField(g), g), CoefficientBoundError);
  op.nu(1, 1) = 1.0;
  op.mass.x[3] = -1.0;
  EXPECT_THROW(stokes_solve(op, FaceField(g), g), CoefficientBoundError);
}

TEST(Krylov, IterationCapRaises) {
  Random rnd(26);
  const Grid g(12, 12);
  const CellField f = zero_mean_cells(rnd, g);
  try {
    neumann_inverse(f, g, SolverConfig{1e-14, 1e-300, 2});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.report().iterations, 2u);
    EXPECT_FALSE(e.report().converged);
  }
  auto op = [](const Vec& x) {
    Vec r(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) r[k] = (k + 1.0) * x[k] + (k ? 0.3 * x[k - 1] : 0.0);
    return r;
  };
  EXPECT_THROW(bicgstab_solve(op, Vec(50, 1.0), SolverConfig{1e-15, 1e-300, 1}), ConvergenceError);
  const SolveResult ok = bicgstab_solve(op, Vec(50, 1.0), SolverConfig{1e-12, 1e-300, 0});
  const Vec r = op(ok.x);
  for (double x : r) EXPECT_NEAR(x, 1.0, 1e-9);
}
