// thermocap command line: run, verify, convergence, twin.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 invariant
// violation, 3 solver failure.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermocap/thermocap.hpp"
#include "thermocap/verify.hpp"

namespace fs = std::filesystem;
using namespace thermocap;

namespace {

int cmd_run(const std::string& path) {
  const RunConfig cfg = parse_config(path);
  const fs::path dir = cfg.output.directory;
  fs::create_directories(dir);
  const Problem pb = make_problem(cfg);
  auto observe = [&](const State& s, const StepReport&) {
    const int every = cfg.output.snapshot_every;
    if (every <= 0 || s.k % every != 0) return;
    if (cfg.output.snapshot_csv) io::write_csv_snapshot(dir, s, pb.model);
    if (cfg.output.snapshot_vtk) io::write_vtk_snapshot(dir, s, pb.model);
  };
  const RunResult res = run(pb, cfg, observe);
  io::write_ledger(dir / "ledger.csv", res.ledger);
  const LedgerRow& last = res.ledger.rows.back();
  std::printf("steps %d  time %.6g  E_tot %.10g  mass %.17g  theta [%.6g, %.6g]  max|phi| %.12g\n", last.step,
              last.time, last.energy.total, last.mass, last.theta_min, last.theta_max, last.phi_max_abs);
  std::printf("ledger written to %s\n", (dir / "ledger.csv").string().c_str());
  if (res.status != RunStatus::ok) std::fprintf(stderr, "error: %s\n", res.message.c_str());
  return int(res.status);
}

int cmd_verify(const std::string& path, const std::vector<int>& only) {
  verify::Options opt;
  if (!path.empty()) opt.reference = parse_config(path);
  verify::Suite suite(opt);
  nlohmann::json summary = nlohmann::json::array();
  bool all = true;
  auto report = [&](const verify::Outcome& r) {
    std::printf("criterion %2d %-32s %s  %s (%.1fs)\n", r.id, r.name.c_str(), r.passed ? "PASS" : "FAIL",
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    all = all && r.passed;
    summary.push_back({{"criterion", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail},
                       {"seconds", r.seconds}});
  };
  if (only.empty()) {
    suite.run_all(report);
  } else {
    for (int id : only) report(suite.run_one(id));
  }
  std::cout << nlohmann::json{{"passed", all}, {"criteria", summary}}.dump() << "\n";
  return all ? 0 : 2;
}

int cmd_convergence(const std::string& path) {
  const RunConfig cfg = parse_config(path);
  const ConvergenceReport rep = convergence_study(cfg);
  std::printf("end time %.6g, reference h = %.6g\n", rep.end_time, rep.h[3]);
  for (std::size_t k = 0; k < rep.errors.size(); ++k)
    std::printf("h = %-12.6g error = %.6e%s\n", rep.h[k], rep.errors[k],
                k > 0 ? ("  order " + std::to_string(rep.orders[k - 1])).c_str() : "");
  std::printf("observed order %.4f\n", rep.observed_order);
  return 0;
}

int cmd_twin(const std::string& path, double eps) {
  const RunConfig cfg = parse_config(path);
  const TwinReport rep = twin_study(cfg, eps);
  const fs::path dir = cfg.output.directory;
  fs::create_directories(dir);
  io::write_file(dir / "twin.csv", [&](std::ostream& os) {
    os << "time,distance_eps,distance_half_eps\n";
    for (std::size_t k = 0; k < rep.time.size(); ++k)
      os << io::fmt(rep.time[k]) << ',' << io::fmt(rep.distance_eps[k]) << ',' << io::fmt(rep.distance_half[k])
         << '\n';
  });
  std::printf("eps %.6g: Y(T) = %.6e, eps/2: Y(T) = %.6e, ratio %.4f\n", eps, rep.distance_eps.back(),
              rep.distance_half.back(), rep.distance_half.back() > 0 ? rep.ratio() : 0.0);
  std::printf("series written to %s\n", (dir / "twin.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermocapillary two-phase flow simulator"};
  app.require_subcommand(1);

  std::string run_path, verify_path, conv_path, twin_path;
  std::vector<int> only;
  double eps = 1e-3;
  auto* run_cmd = app.add_subcommand("run", "Run a simulation and write ledger.csv and snapshots");
  run_cmd->add_option("config", run_path, "Configuration file")->required();
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
  verify_cmd->add_option("config", verify_path, "Reference configuration for the run-based checks");
  verify_cmd->add_option("--only", only, "Run only the listed criteria (1-10)")->check(CLI::Range(1, 10));
  auto* conv_cmd = app.add_subcommand("convergence", "Temporal self-convergence study");
  conv_cmd->add_option("config", conv_path, "Configuration file")->required();
  auto* twin_cmd = app.add_subcommand("twin", "Distance between perturbed trajectories");
  twin_cmd->add_option("config", twin_path, "Configuration file")->required();
  twin_cmd->add_option("--eps", eps, "Initial perturbation size")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(run_path);
    if (*verify_cmd) return cmd_verify(verify_path, only);
    if (*conv_cmd) return cmd_convergence(conv_path);
    if (*twin_cmd) return cmd_twin(twin_path, eps);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const CompatibilityError& e) {
    std::fprintf(stderr, "incompatible configuration: %s\n", e.what());
    return 1;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant violated: %s\n", e.what());
    return 2;
  } catch (const StepFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
