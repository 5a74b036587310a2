#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "thermocap/diagnostics.hpp"
#include "thermocap/run.hpp"

using namespace thermocap;
using testing_util::Random;

namespace {

State make_state(const Model& m, FaceField u, CellField phi, CellField vt) {
  State s;
  s.u = std::move(u);
  s.p = CellField(m.grid, 0.0, Bc::neumann);
  s.phi = std::move(phi);
  s.phi.bc = Bc::neumann;
  s.mu = chemical_potential(s.phi, m.phys, m.grid);
  s.vartheta = CellField(m.grid, BoundaryTrace::constant(m.grid, 0.0));
  s.vartheta.v = vt.v;
  return s;
}

Model plain_model(const Grid& g, PhysParams p = {}, Coefficients c = {}, double tb = 0.0) {
  return Model::make(g, p, c, BoundaryTrace::constant(g, tb));
}

}  // namespace

TEST(Energy, RestingUniformMixture) {
  const Grid g(4, 4, 2.0, 3.0);
  const Model m = plain_model(g);
  const EnergyBreakdown e0 = total_energy(make_state(m, FaceField(g), CellField(g), CellField(g)), m);
  EXPECT_EQ(e0.total, 0.0);
  const EnergyBreakdown e = total_energy(make_state(m, FaceField(g), CellField(g, 0.5), CellField(g)), m);
  EXPECT_EQ(e.kinetic, 0.0);
  EXPECT_EQ(e.gradient, 0.0);
  EXPECT_NEAR(e.potential, -0.119187964058863041 * 6.0, 1e-13);
  EXPECT_DOUBLE_EQ(e.total, e.potential);
}

TEST(Energy, KineticAndThermalByHand) {
  Random rnd(51);
  const Grid g(3, 4, 1.5, 2.0);
  PhysParams p;
  p.rho1 = 1.0;
  p.rho2 = 3.0;
  const Model m = plain_model(g, p);
  const FaceField u = rnd.solenoidal(g);
  const CellField phi = rnd.cells(g, -0.9, 0.9), vt = rnd.cells(g);
  const EnergyBreakdown e = total_energy(make_state(m, u, phi, vt), m);
  const double w = g.cell_area();
  double kin = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) kin += w * p.density(0.5 * (phi(i - 1, j) + phi(i, j))) * u.xf(i, j) * u.xf(i, j);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) kin += w * p.density(0.5 * (phi(i, j - 1) + phi(i, j))) * u.yf(i, j) * u.yf(i, j);
  EXPECT_NEAR(e.kinetic, 0.5 * kin, 1e-13);
  double th = 0.0;
  for (double x : vt.v) th += w * x * x;
  EXPECT_NEAR(e.thermal, 0.5 * th, 1e-13);
}

TEST(Dissipation, TwoByTwoHandSum) {
  const Grid g(2, 2, 2.0, 2.0);
  PhysParams p;
  p.lambda0 = 2.0;
  Coefficients c;
  c.mobility = CoefficientModel::quadratic_phi(0.5, 1.0);
  const Model m = plain_model(g, p, c);
  State s = make_state(m, FaceField(g), CellField(g), CellField(g));
  s.mu.v = {1.0, 2.0, 4.0, 7.0};
  // Interior faces: x between (0,j),(1,j) and y between (i,0),(i,1); unit cells.
  const double grad2 = 1.0 + 9.0 + 9.0 + 25.0;
  EXPECT_NEAR(dissipation(s, m), 0.25 * 2.0 * 0.5 * grad2, 1e-13);
}

TEST(EnergyIdentity, EquilibriumResidualIsRounding) {
  const Grid g(8, 8);
  PhysParams p;
  p.rho2 = 2.0;
  p.b = 0.5;
  const Model m = plain_model(g, p, {}, 0.3);
  const State s = make_state(m, FaceField(g), CellField(g, 0.1), CellField(g));
  SchemeConfig cfg;
  cfg.h = 0.1;
  StepReport rep;
  State n = step(s, m, cfg, rep);
  EXPECT_LE(energy_identity_residual(s, n, m, cfg), 1e-13);
}

TEST(EnergyIdentity, DetectsCorruptedVelocity) {
  Random rnd(52);
  const Grid g(10, 10, 5.0, 5.0);
  PhysParams p;
  p.rho2 = 1.5;
  p.b = 0.4;
  p.g = 0.2;
  p.alpha = 0.3;
  const Model m = Model::make(g, p, {}, rnd.trace(g, 0.2, 0.8));
  State s = make_state(m, rnd.solenoidal(g, 0.3), regularize_phi0(rnd.cells(g, -0.8, 0.8), 8, g), CellField(g));
  s.vartheta = regularize_theta0(rnd.cells(g, 0, 1), m.theta_b, m.Theta_b, 8, g);
  SchemeConfig cfg;
  cfg.h = 0.05;
  StepReport rep;
  State n = step(s, m, cfg, rep);
  const double clean = energy_identity_residual(s, n, m, cfg);
  EXPECT_LE(clean, 1e-9);
  for (double& x : n.u.x) x += 1e-3 * rnd();
  n.u.zero_boundary_normal();
  const double dirty = energy_identity_residual(s, n, m, cfg);
  EXPECT_GE(dirty, 10.0 * std::max(clean, 1e-12));
}

TEST(EnergyIdentity, TermsBalanceAfterStep) {
  Random rnd(53);
  const Grid g(8, 8, 4.0, 4.0);
  PhysParams p;
  p.b = 0.3;
  const Model m = Model::make(g, p, {}, rnd.trace(g, 0.0, 1.0));
  State s = make_state(m, rnd.solenoidal(g, 0.2), regularize_phi0(rnd.cells(g, -0.7, 0.7), 8, g), CellField(g));
  SchemeConfig cfg;
  cfg.h = 0.1;
  cfg.outer_tol = 1e-12;
  StepReport rep;
  const State n = step(s, m, cfg, rep);
  const EnergyIdentityTerms t = energy_identity_terms(s, n, m, cfg);
  EXPECT_GT(t.viscous, 0.0);
  EXPECT_GT(t.mobility, 0.0);
  EXPECT_NEAR(t.lhs(), t.rhs(), 1e-10 * std::max(1.0, std::abs(total_energy(s, m).total)));
}

TEST(Uniqueness, EqualStatesHaveZeroDistance) {
  Random rnd(54);
  const Grid g(8, 8);
  const Model m = plain_model(g);
  const State s = make_state(m, rnd.solenoidal(g), rnd.cells(g, -0.5, 0.5), rnd.cells(g));
  EXPECT_EQ(uniqueness_distance(s, s, m), 0.0);
}

TEST(Uniqueness, TemperatureShiftGivesSquaredShift) {
  Random rnd(55);
  const Grid g(8, 8);
  const Model m = plain_model(g);
  const State a = make_state(m, rnd.solenoidal(g), rnd.cells(g, -0.5, 0.5), rnd.cells(g));
  State b = a;
  for (double& x : b.vartheta.v) x += 0.3;
  EXPECT_NEAR(uniqueness_distance(a, b, m), 0.09, 1e-14);
}

TEST(Uniqueness, QuadraticInTheDifference) {
  Random rnd(56);
  const Grid g(8, 8, 2.0, 2.0);
  Coefficients c;
  c.mobility = CoefficientModel::quadratic_phi(0.5, 1.0);
  const Model m = plain_model(g, {}, c);
  const State a = make_state(m, rnd.solenoidal(g), rnd.cells(g, -0.5, 0.5), rnd.cells(g));
  const FaceField du = rnd.solenoidal(g, 0.1);
  CellField dphi = rnd.cells(g, -0.1, 0.1);
  krylov::project_zero_mean(dphi.v);
  const CellField dvt = rnd.cells(g, -0.1, 0.1);
  auto shifted = [&](double t) {
    State b = a;
    axpy(t, du, b.u);
    for (std::size_t k = 0; k < b.phi.v.size(); ++k) {
      b.phi.v[k] += t * dphi.v[k];
      b.vartheta.v[k] += t * dvt.v[k];
    }
    return b;
  };
  const UniquenessTerms t1 = uniqueness_terms(a, shifted(1.0), m), t2 = uniqueness_terms(a, shifted(2.0), m);
  EXPECT_GT(t1.velocity, 0.0);
  EXPECT_GT(t1.phase, 0.0);
  EXPECT_NEAR(t2.velocity / t1.velocity, 4.0, 1e-8);
  EXPECT_NEAR(t2.phase / t1.phase, 4.0, 1e-8);
  EXPECT_NEAR(t2.thermal / t1.thermal, 4.0, 1e-12);
}

TEST(Uniqueness, RejectsMeanMismatchAndThermalMobility) {
  Random rnd(57);
  const Grid g(6, 6);
  const Model m = plain_model(g);
  const State a = make_state(m, FaceField(g), rnd.cells(g, -0.5, 0.5), CellField(g));
  State b = a;
  for (double& x : b.phi.v) x += 1e-3;
  EXPECT_THROW(uniqueness_distance(a, b, m), CompatibilityError);
  Coefficients c;
  c.mobility = CoefficientModel::bounded_rational(0.5, 1.0, 0.0, 1.0);
  const Model mt = plain_model(g, {}, c);
  EXPECT_THROW(uniqueness_distance(a, a, mt), CompatibilityError);
}

TEST(Monitors, KornInequality) {
  Random rnd(58);
  const Grid g(12, 9, 3.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    FaceField u = rnd.faces(g);
    u.zero_boundary_normal();
    const auto [du, gu] = korn_norms(u, g);
    EXPECT_LE(gu, std::sqrt(2.0) * du * (1 + 1e-12));
  }
}

TEST(Ledger, CsvLayoutAndRoundTrip) {
  Random rnd(59);
  const Grid g(5, 5);
  const Model m = plain_model(g, {}, {}, 0.2);
  const State s = make_state(m, rnd.solenoidal(g), rnd.cells(g, -0.5, 0.5), rnd.cells(g, -0.1, 0.1));
  RunLedger led;
  led.rows.push_back(ledger_row(s, m));
  led.rows.back().identity_residual = 1.0 / 3.0;
  led.rows.back().outer_iters = 4;
  std::ostringstream os;
  led.write_csv(os);
  std::istringstream in(os.str());
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header,
            "step,time,h,kinetic,gradient,potential,thermal,total,dissipation,mass,theta_min,theta_max,phi_max_abs,"
            "identity_residual,outer_iters,newton_iters");
  std::getline(in, line);
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 16u);
  EXPECT_EQ(std::stod(cells[7]), total_energy(s, m).total);
  EXPECT_EQ(std::stod(cells[9]), mean(s.phi));
  EXPECT_EQ(std::stod(cells[13]), 1.0 / 3.0);
  EXPECT_EQ(cells[14], "4");

  led.twin = true;
  led.rows.back().distance = 0.125;
  std::ostringstream tw;
  led.write_csv(tw);
  EXPECT_NE(tw.str().find(",distance\n"), std::string::npos);
  EXPECT_NE(tw.str().find(",0.125\n"), std::string::npos);
}
