#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "palflow/run.hpp"

namespace {

using namespace palflow;

std::string dims_column(const RegistryEntry& e) {
  std::ostringstream os;
  if (e.nodes > 1)
    os << "N=" << e.nodes << " n=" << e.dim;
  else
    os << "n=" << e.dim;
  os << " g=" << e.ineq << " h=" << e.eq;
  return os.str();
}

std::string optimum_column(const RegistryEntry& e) {
  if (!e.optimum) return "optimum unknown";
  std::ostringstream os;
  os << "x*=(";
  for (Index i = 0; i < e.optimum->size(); ++i) {
    if (i) os << ", ";
    os << (*e.optimum)[i];
  }
  os << ")";
  return os.str();
}

int do_list() {
  for (const auto& e : problem_registry()) {
    std::printf("%-24s %-18s phi=%-15s %-40s %s\n", e.name.c_str(),
                dims_column(e).c_str(), e.phi.c_str(),
                optimum_column(e).c_str(), e.summary.c_str());
  }
  return 0;
}

int do_run(const RunConfig& cfg) {
  RunReport rep = run(cfg);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  if (rep.status == RunStatus::UserError) {
    std::cerr << "error: " << rep.message << "\n";
  } else {
    std::cout << rep.message << "\n";
    if (!rep.trajectory_path.empty())
      std::cout << "wrote " << rep.trajectory_path << "\n";
    if (!rep.summary_path.empty())
      std::cout << "wrote " << rep.summary_path << "\n";
  }
  return static_cast<int>(rep.status);
}

int do_validate(const std::string& path) {
  ValidationReport rep = validate_problem_file(path);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  if (rep.ok) {
    std::cout << rep.message << "\n";
    return 0;
  }
  std::cerr << "error: " << rep.message << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smooth primal-dual flow solver for constrained composite programs"};
  app.require_subcommand(1);

  app.add_subcommand("list", "show the built-in problems");

  RunConfig cfg;
  std::string method = "rk4", format = "both", mode = "auto";
  double t_end = 0.0;
  auto* run_cmd =
      app.add_subcommand("run", "integrate a problem and write results");
  run_cmd->add_option("--problem", cfg.problem, "registry name or JSON file")
      ->required();
  run_cmd->add_option("--mu", cfg.mu, "smoothing parameter (default 0.1)");
  run_cmd->add_option("--eta", cfg.eta,
                      "multiplier ascent weights; one value broadcasts");
  run_cmd->add_option("--dt", cfg.dt, "step size (initial step for rk45)");
  auto* t_end_opt =
      run_cmd->add_option("--t-end", t_end, "integration horizon");
  run_cmd->add_option("--kkt-tol", cfg.kkt_tol,
                      "stop once the KKT residual drops below this");
  run_cmd->add_option("--method", method, "rk4 (fixed) or rk45 (adaptive)")
      ->check(CLI::IsMember({"rk4", "rk45"}));
  run_cmd->add_option("--mu-schedule", cfg.mu_schedule,
                      "decreasing mu values; runs warm-started continuation");
  run_cmd->add_option("--mode", mode, "auto, centralized, or distributed")
      ->check(CLI::IsMember({"auto", "centralized", "distributed"}));
  run_cmd->add_option("--out", cfg.out_dir,
                      "output directory (PALFLOW_OUT env overrides)");
  run_cmd->add_option("--format", format, "csv, json, or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  run_cmd->add_option("--record-every", cfg.record_every,
                      "keep every k-th accepted step");

  std::string validate_path;
  auto* val_cmd =
      app.add_subcommand("validate", "parse and gradient-check a problem file");
  val_cmd->add_option("--problem", validate_path, "JSON problem file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (app.got_subcommand("list")) return do_list();
  if (app.got_subcommand("validate")) return do_validate(validate_path);

  if (t_end_opt->count() > 0) cfg.t_end = t_end;
  cfg.method = method == "rk45" ? Method::RK45Adaptive : Method::RK4Fixed;
  cfg.format = format == "csv"    ? OutputFormat::Csv
               : format == "json" ? OutputFormat::Json
                                  : OutputFormat::Both;
  cfg.mode = mode == "centralized"   ? RunMode::Centralized
             : mode == "distributed" ? RunMode::Distributed
                                     : RunMode::Auto;
  return do_run(cfg);
}
