#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "thermocap/config.hpp"
#include "thermocap/io.hpp"
#include "thermocap/run.hpp"
#include "thermocap/verify.hpp"

using namespace thermocap;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalFileTakesDefaults) {
  const RunConfig c = parse_config_string("[grid]\nnx = 8\nny = 6\n");
  EXPECT_EQ(c.grid.nx, 8);
  EXPECT_EQ(c.grid.ny, 6);
  EXPECT_EQ(c.grid.lx, 8.0);
  EXPECT_EQ(c.phys.A, 1.0);
  EXPECT_EQ(c.phys.A_c, 2.0);
  EXPECT_EQ(c.scheme.h, SchemeConfig{}.h);
  EXPECT_EQ(c.effective_n(), 100);
  EXPECT_EQ(c.phi0.name, "uniform");
  EXPECT_EQ(c.output.directory, "out");
}

TEST(Config, FullFileParses) {
  const RunConfig c = parse_config_string(R"(
# comment line
[grid]
nx = 12   # trailing comment
ny = 10
lx = 6
ly = 5
[physics]
rho1 = 1
rho2 = 2.5
mobility = bounded_rational lo=0.5 hi=1 a_phi=2 a_theta=1
viscosity = quadratic_phi c0=0.3 c2=0.1
[scheme]
h = 0.02
splitting = convex
heat_convection = centered
face_mean = harmonic
regularization_n = 7
linear_rel_tol = 1e-9
[initial]
phi = bubble cx=3 cy=2.5 radius=1 width=0.5
theta = random seed=4 low=0.1 high=0.9
u = vortex amplitude=0.2
[boundary]
theta_b = sinusoidal mean=0.5 amplitude=0.2 modes=2
[output]
directory = results/run1
snapshot_every = 5
snapshot_vtk = true
)");
  EXPECT_EQ(c.grid.ly, 5.0);
  EXPECT_EQ(c.phys.rho2, 2.5);
  EXPECT_TRUE(c.coeffs.mobility.depends_on_theta());
  EXPECT_EQ(c.coeffs.viscosity.lower_bound(), 0.3);
  EXPECT_EQ(c.scheme.splitting, Splitting::convex);
  EXPECT_EQ(c.scheme.heat_convection, HeatConvection::centered);
  EXPECT_EQ(c.scheme.face_mean, FaceMean::harmonic);
  EXPECT_EQ(c.effective_n(), 7);
  EXPECT_EQ(c.scheme.linear.rel_tol, 1e-9);
  EXPECT_EQ(c.phi0.get("radius", 0), 1.0);
  EXPECT_EQ(c.output.directory, "results/run1");
  EXPECT_TRUE(c.output.snapshot_vtk);
}

TEST(Config, InvariantViolationsAreReported) {
  const std::string msg = error_of("[grid]\nnx=4\nny=4\n[physics]\nA = 2\nA_c = 2\n");
  EXPECT_NE(msg.find("0 < A < A_c"), std::string::npos) << msg;
  EXPECT_NE(error_of("[grid]\nnx=4\nny=4\n[scheme]\nh = -1\n").find("h > 0"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx=1\nny=4\n").find("nx >= 2"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx=4\n").find("grid.ny"), std::string::npos);
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
  const std::string msg = error_of("[grid]\nnx=4\nny=4\n[physics]\nviscocity = constant value=1\n");
  EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
  EXPECT_NE(msg.find("viscocity"), std::string::npos) << msg;
}

TEST(Config, MalformedInputIsRejected) {
  EXPECT_NE(error_of("[grid]\nnx=4\nny=4\n[nonsense]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx=4\nnx=5\nny=4\n").find("duplicate key"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx=four\nny=4\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("nx=4\n").find("outside"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx=4\nny=4\n[scheme]\nsplitting = sideways\n").find("sideways"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx=4\nny=4\n[initial]\nphi = blob\n").find("blob"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx=4\nny=4\n[initial]\nphi = bubble radius=1 rim=2\n").find("rim"),
            std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx=4\nny=4\n[physics]\nmobility = constant value=0\n").find("line 5"),
            std::string::npos);
  EXPECT_THROW(parse_config("/nonexistent/file.cfg"), ConfigError);
}

TEST(Presets, InitialData) {
  const Grid g(16, 16, 8.0, 8.0);
  const CellField bubble = make_phi0({"bubble", {{"cx", 4}, {"cy", 4}, {"radius", 2}, {"width", 0.5}}}, g);
  EXPECT_GT(bubble(8, 8), 0.9);
  EXPECT_LT(bubble(0, 0), -0.9);
  const CellField sp = make_phi0({"spinodal", {{"seed", 5}, {"amplitude", 0.1}, {"mean", 0.2}}}, g);
  EXPECT_LE(std::abs(sp.max() - 0.2), 0.1);
  EXPECT_EQ(make_phi0({"spinodal", {{"seed", 5}}}, g).v, make_phi0({"spinodal", {{"seed", 5}}}, g).v);
  const CellField tg = make_theta0({"gradient", {{"bottom", 0}, {"top", 1}}}, g);
  EXPECT_NEAR(tg(3, 0), 1.0 / 32, 1e-15);
  const FaceField u = make_u0({"vortex", {{"amplitude", 0.1}}}, g);
  EXPECT_LE(divergence(u, g).max_abs(), 1e-14);
  EXPECT_GT(u.max_abs(), 0.0);
  const BoundaryTrace tb = make_theta_b({"linear", {{"bottom", 0.2}, {"top", 0.6}}}, g);
  EXPECT_NEAR(tb.bottom[3], 0.2, 1e-15);
  EXPECT_NEAR(tb.top[3], 0.6, 1e-15);
  EXPECT_THROW(make_theta_b({"spiral", {}}, g), ConfigError);
}

TEST(Configs, ShippedFilesParseAndStart) {
  const fs::path dir = fs::path(THERMOCAP_SOURCE_DIR) / "configs";
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".cfg") continue;
    ++n;
    SCOPED_TRACE(e.path().string());
    const RunConfig c = parse_config(e.path().string());
    const Problem pb = make_problem(c);
    EXPECT_LT(pb.initial.phi.max_abs(), 1.0);
  }
  EXPECT_GE(n, 4);
}

TEST(Configs, ReferenceStringsParse) {
  EXPECT_NO_THROW(parse_config_string(verify::kMarangoniConfig));
  EXPECT_NO_THROW(parse_config_string(verify::kSmoothConfig));
  EXPECT_NO_THROW(check_twin_compatible(parse_config_string(verify::kTwinConfig)));
  EXPECT_THROW(check_twin_compatible(parse_config_string(verify::kMarangoniConfig)), CompatibilityError);
}

TEST(Snapshots, CsvRoundTrip) {
  RunConfig c = parse_config_string(verify::kMarangoniConfig);
  c.scheme.n_steps = 1;
  const Problem pb = make_problem(c);
  const fs::path dir = fs::temp_directory_path() / "thermocap_snapshot_test";
  fs::create_directories(dir);
  io::write_csv_snapshot(dir, pb.initial, pb.model);
  io::write_vtk_snapshot(dir, pb.initial, pb.model);
  std::ifstream in(dir / "phi_0.csv");
  const io::Lattice l = io::read_lattice(in);
  EXPECT_EQ(l.nx, 16);
  EXPECT_EQ(l.lx, 8.0);
  ASSERT_EQ(l.rows.size(), 16u);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) EXPECT_EQ(l.rows[j][i], pb.initial.phi(i, j));
  std::ifstream ux(dir / "ux_0.csv");
  const io::Lattice lu = io::read_lattice(ux);
  ASSERT_EQ(lu.rows.size(), 16u);
  EXPECT_EQ(lu.rows[0].size(), 17u);
  EXPECT_TRUE(fs::exists(dir / "state_0.vtk"));
  fs::remove_all(dir);
}

TEST(Runs, DeterministicLedger) {
  RunConfig c = parse_config_string(verify::kMarangoniConfig);
  c.scheme.n_steps = 3;
  std::ostringstream a, b;
  run(c).ledger.write_csv(a);
  run(c).ledger.write_csv(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Runs, SolverFailureKeepsLedger) {
  RunConfig c = parse_config_string(verify::kMarangoniConfig);
  c.scheme.n_steps = 3;
  c.scheme.outer_max = 1;
  c.scheme.max_halvings = 0;
  const RunResult r = run(c);
  EXPECT_EQ(r.status, RunStatus::solver_failure);
  EXPECT_EQ(r.ledger.rows.size(), 1u);
  EXPECT_FALSE(r.message.empty());
}
