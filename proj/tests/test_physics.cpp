#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "thermocap/physics.hpp"

using namespace thermocap;
using testing_util::Random;

TEST(Density, AffineLaw) {
  PhysParams p;
  p.rho1 = 1.0;
  p.rho2 = 3.0;
  EXPECT_DOUBLE_EQ(p.density(0.0), 2.0);
  EXPECT_DOUBLE_EQ(p.density(-1.0), 1.0);
  EXPECT_DOUBLE_EQ(p.density(1.0), 3.0);
  Random rnd(1);
  for (int k = 0; k < 1000; ++k) {
    const double a = rnd(-1, 1), b = rnd(-1, 1);
    EXPECT_LE(std::abs(p.density(a) - p.density(b)), std::abs(a - b) + 1e-15);
    EXPECT_GE(p.density(a), 1.0);
    EXPECT_LE(p.density(a), 3.0);
  }
  PhysParams q;
  for (double s : {-0.7, 0.0, 0.4}) EXPECT_DOUBLE_EQ(q.density(s), 1.0);
}

TEST(SurfaceTension, EotvosLaw) {
  PhysParams p;
  p.lambda0 = 2.0;
  p.a = 1.0;
  p.b = 0.5;
  EXPECT_DOUBLE_EQ(p.surface_tension(0.0), 2.0);
  EXPECT_DOUBLE_EQ(p.surface_tension(p.a / p.b), 0.0);
  p.b = 0.0;
  EXPECT_DOUBLE_EQ(p.surface_tension(17.0), 2.0);
}

TEST(Buoyancy, Substitution) {
  PhysParams p;
  EXPECT_EQ(p.buoyancy(0.3, 0.2)[1], 0.0);
  p.g = 9.8;
  p.alpha = 0.5;
  EXPECT_NEAR(p.buoyancy(0.3, 2.0)[1], 0.0, 1e-15);
  p.rho1 = p.rho2 = 2.0;
  p.alpha = 0.0;
  EXPECT_EQ(p.buoyancy(0.7, 3.0)[0], 0.0);
  EXPECT_NEAR(p.buoyancy(0.7, 3.0)[1], -19.6, 1e-13);
}

TEST(FluxJ, Substitution) {
  const Grid g(4, 3);
  Random rnd(2);
  PhysParams p;
  const FaceField m = rnd.faces(g, 0.5, 2), gm = rnd.faces(g);
  EXPECT_EQ(flux_J(p, m, gm).max_abs(), 0.0);
  p.rho1 = 1.0;
  p.rho2 = 3.0;
  EXPECT_EQ(flux_J(p, m, FaceField(g)).max_abs(), 0.0);
  const FaceField j = flux_J(p, FaceField(g, 2.0), FaceField(g, 1.0));
  for (double x : j.x) EXPECT_DOUBLE_EQ(x, -2.0);
  for (double x : j.y) EXPECT_DOUBLE_EQ(x, -2.0);
}

TEST(PhysParams, ValidationNamesInvariant) {
  PhysParams p;
  p.A = 2.0;
  p.A_c = 2.0;
  try {
    p.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("0 < A < A_c"), std::string::npos);
  }
  PhysParams q;
  q.c_W = 1.0;
  EXPECT_THROW(q.validate(), ConfigError);
  EXPECT_NO_THROW(PhysParams{}.validate());
}

TEST(Potential, KnownValues) {
  const Potential w(1.0, 2.0, 2.0);
  EXPECT_EQ(w.W_prime(0.0), 0.0);
  EXPECT_EQ(w.W(0.0), 0.0);
  // 0.5 ln 3 - 1 and 0.5 (1.5 ln 1.5 + 0.5 ln 0.5) - 0.25, 30-digit references.
  EXPECT_NEAR(w.W_prime(0.5), -0.450693855665945154, 1e-15);
  EXPECT_NEAR(w.W(0.5), -0.119187964058863041, 1e-15);
  Random rnd(3);
  for (int k = 0; k < 1000; ++k) {
    const double s = rnd(-0.999, 0.999);
    EXPECT_NEAR(w.W_prime(-s), -w.W_prime(s), 1e-13);
  }
}

TEST(Potential, SplittingIdentity) {
  Random rnd(4);
  for (double cw : {2.0, 3.5}) {
    const Potential w(1.0, 2.0, cw);
    for (int k = 0; k < 100000; ++k) {
      const double s = rnd(-0.999, 0.999);
      ASSERT_NEAR(w.W(s), w.F(s) - cw * s * s, 1e-14 * (1 + cw));
      ASSERT_NEAR(w.F_prime(s), w.W_prime(s) + 2 * cw * s, 1e-13 * (1 + std::abs(w.F_prime(s))));
    }
  }
}

TEST(Potential, ConvexPartIsUniformlyConvex) {
  Random rnd(5);
  const Potential w(1.0, 2.0, 2.0);
  for (int k = 0; k < 1000000; ++k) {
    const double s = rnd(-1.0, 1.0);
    if (std::abs(s) >= 1.0) continue;
    ASSERT_GE(w.F_second(s), w.c_W);
  }
}

TEST(Potential, DerivativesMatchDifferenceQuotients) {
  const Potential w(0.8, 2.0, 2.5);
  for (double s : {-0.9, -0.3, 0.0, 0.45, 0.95}) {
    const double h = 1e-6;
    EXPECT_NEAR(w.W_prime(s), (w.W(s + h) - w.W(s - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(w.F_second(s), (w.F_prime(s + h) - w.F_prime(s - h)) / (2 * h), 1e-5 * w.F_second(s));
  }
}

TEST(Potential, BarrierNearPureStates) {
  const Potential w(1.0, 2.0, 2.0);
  double prev = -INFINITY;
  for (int k = 3; k <= 12; ++k) {
    const double v = w.W_prime(1.0 - std::pow(10.0, -k));
    EXPECT_GT(v, prev);
    EXPECT_NEAR(w.W_prime(-1.0 + std::pow(10.0, -k)), -v, 1e-9 * std::abs(v));
    prev = v;
  }
  // 0.5 ln((2 - 1e-12) / 1e-12) - 2 (1 - 1e-12), computed independently.
  EXPECT_NEAR(w.W_prime(1.0 - 1e-12), 0.5 * std::log(2e12) - 2.0, 1e-3);
}

TEST(Potential, DomainErrors) {
  const Potential w(1.0, 2.0, 2.0);
  EXPECT_THROW(w.W_prime(1.0), DomainError);
  EXPECT_THROW(w.F_prime(-1.0), DomainError);
  EXPECT_THROW(w.F_second(1.5), DomainError);
  EXPECT_THROW(w.W(1.01), DomainError);
  EXPECT_TRUE(std::isfinite(w.W(1.0)));
}

TEST(Coefficients, LowerBoundsHold) {
  Random rnd(6);
  const CoefficientModel models[] = {CoefficientModel::constant(0.7), CoefficientModel::quadratic_phi(0.3, 2.0),
                                     CoefficientModel::bounded_rational(0.2, 1.5, 3.0, 0.5)};
  for (const auto& m : models)
    for (int k = 0; k < 100000; ++k) {
      const double a = rnd(-2, 2), b = rnd(-2, 2);
      ASSERT_GE(m(a, b), m.lower_bound());
    }
}

TEST(Coefficients, DependencyFlagsAndValidation) {
  EXPECT_FALSE(CoefficientModel::constant(1).depends_on_phi());
  EXPECT_TRUE(CoefficientModel::quadratic_phi(1, 1).depends_on_phi());
  EXPECT_FALSE(CoefficientModel::quadratic_phi(1, 1).depends_on_theta());
  EXPECT_TRUE(CoefficientModel::bounded_rational(0.5, 1, 0, 1).depends_on_theta());
  EXPECT_FALSE(CoefficientModel::bounded_rational(0.5, 1, 0, 1).depends_on_phi());
  EXPECT_THROW(CoefficientModel::constant(0.0), ConfigError);
  EXPECT_THROW(CoefficientModel::quadratic_phi(-1, 1), ConfigError);
  EXPECT_THROW(CoefficientModel::bounded_rational(1, 0.5, 0, 0), ConfigError);
}

// With constant phase the Korteweg force is the gradient -lambda0 a phi grad(mu),
// which does no work on solenoidal fields; the Marangoni force vanishes.
TEST(Capillary, ConstantPhaseGivesNoForce) {
  const Grid g(5, 4);
  Random rnd(7);
  PhysParams p;
  p.b = 0.7;
  const auto f = capillary_force(p, CellField(g, 0.3), rnd.cells(g), rnd.cells(g, 0, 1), g);
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(inner(f.korteweg, rnd.solenoidal(g), g), 0.0, 1e-13);
  EXPECT_EQ(f.marangoni.max_abs(), 0.0);
}

TEST(Capillary, MarangoniVanishesWithoutTemperatureSlope) {
  const Grid g(5, 4);
  Random rnd(8);
  PhysParams p;
  const auto f = capillary_force(p, rnd.cells(g, -0.9, 0.9), rnd.cells(g), rnd.cells(g, 0, 1), g);
  EXPECT_EQ(f.marangoni.max_abs(), 0.0);
}

// Direct quadrature of lambda0 a (v . grad phi, mu) and
// -lambda0 b (theta grad phi (x) grad phi, grad v) on a 3x3 grid.
TEST(Capillary, MatchesDirectQuadrature) {
  const Grid g(3, 3, 1.5, 1.2);
  const int n = 3;
  const double dx = g.dx(), dy = g.dy(), w = dx * dy;
  Random rnd(9);
  PhysParams p;
  p.lambda0 = 1.3;
  p.a = 0.9;
  p.b = 0.4;
  const CellField phi = rnd.cells(g, -0.9, 0.9), mu = rnd.cells(g), th = rnd.cells(g, 0, 1);
  const auto f = capillary_force(p, phi, mu, th, g);
  auto P = [&](int i, int j) { return phi(std::clamp(i, 0, n - 1), std::clamp(j, 0, n - 1)); };
  for (int trial = 0; trial < 5; ++trial) {
    const FaceField v = rnd.solenoidal(g);
    double kort = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double adv = 0.0;
        if (i + 1 < n) adv += v.xf(i + 1, j) * 0.5 * (phi(i, j) + phi(i + 1, j)) / dx;
        if (i > 0) adv -= v.xf(i, j) * 0.5 * (phi(i - 1, j) + phi(i, j)) / dx;
        if (j + 1 < n) adv += v.yf(i, j + 1) * 0.5 * (phi(i, j) + phi(i, j + 1)) / dy;
        if (j > 0) adv -= v.yf(i, j) * 0.5 * (phi(i, j - 1) + phi(i, j)) / dy;
        kort += w * mu(i, j) * adv;
      }
    kort *= p.lambda0 * p.a;
    EXPECT_NEAR(inner(f.korteweg, v, g), kort, 1e-13);

    double mar = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double gxl = (P(i, j) - P(i - 1, j)) / dx, gxr = (P(i + 1, j) - P(i, j)) / dx;
        const double gyb = (P(i, j) - P(i, j - 1)) / dy, gyt = (P(i, j + 1) - P(i, j)) / dy;
        const double vx_x = (v.xf(i + 1, j) - v.xf(i, j)) / dx, vy_y = (v.yf(i, j + 1) - v.yf(i, j)) / dy;
        mar += w * th(i, j) * (0.5 * (gxl * gxl + gxr * gxr) * vx_x + 0.5 * (gyb * gyb + gyt * gyt) * vy_y);
      }
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) {
        const double gx = 0.5 * ((P(i, j - 1) - P(i - 1, j - 1)) + (P(i, j) - P(i - 1, j))) / dx;
        const double gy = 0.5 * ((P(i - 1, j) - P(i - 1, j - 1)) + (P(i, j) - P(i, j - 1))) / dy;
        const double tc = 0.25 * (th(i - 1, j - 1) + th(i, j - 1) + th(i - 1, j) + th(i, j));
        const double shear = (v.xf(i, j) - v.xf(i, j - 1)) / dy + (v.yf(i, j) - v.yf(i - 1, j)) / dx;
        mar += w * tc * gx * gy * shear;
      }
    mar *= -p.lambda0 * p.b;
    EXPECT_NEAR(inner(f.marangoni, v, g), mar, 1e-13);
  }
}

TEST(Buoyancy, UniformStateForceIsUniform) {
  const Grid g(4, 5);
  PhysParams p;
  p.g = 2.0;
  p.alpha = 0.1;
  const FaceField f = buoyancy_force(p, CellField(g, 0.2), CellField(g, 0.5), g);
  EXPECT_EQ(f.max_boundary_normal(), 0.0);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) EXPECT_NEAR(f.yf(i, j), -p.density(0.2) * (1 - 0.05) * 2.0, 1e-14);
}
