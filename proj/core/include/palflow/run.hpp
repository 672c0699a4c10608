#pragma once

#include <optional>
#include <string>

#include "palflow/io.hpp"
#include "palflow/registry.hpp"

namespace palflow {

// Process exit codes: 0 converged, 2 user error, 3 numeric fault,
// 4 ran out of time without converging.
enum class RunStatus : int {
  Converged = 0,
  UserError = 2,
  NumericFault = 3,
  TimeLimit = 4,
};

enum class OutputFormat { Csv, Json, Both };
enum class RunMode { Auto, Centralized, Distributed };

struct RunConfig {
  std::string problem;              // registry name or JSON file path
  double mu = 0.1;
  std::vector<double> eta = {1.0};  // single entry broadcasts
  double dt = 1e-3;
  std::optional<double> t_end;      // problem's default horizon when unset
  double kkt_tol = 1e-6;
  Method method = Method::RK4Fixed;
  std::vector<double> mu_schedule;  // nonempty switches to continuation
  std::string out_dir = ".";        // the PALFLOW_OUT env variable wins
  OutputFormat format = OutputFormat::Both;
  RunMode mode = RunMode::Auto;
  int record_every = 100;
};

struct RunReport {
  RunStatus status = RunStatus::UserError;
  std::string message;          // human-readable outcome line
  std::string trajectory_path;  // empty when not written
  std::string summary_path;
  std::vector<std::string> warnings;
};

// Resolve, integrate, and write trajectory.csv / summary.json under the
// output directory. Never throws; failures land in the report.
RunReport run(const RunConfig& cfg);

struct ValidationReport {
  bool ok = false;
  std::string message;
  double worst_gradient_error = 0.0;
  std::vector<std::string> warnings;
};

// The validate verb: parse a problem file and finite-difference-check every
// oracle gradient at a handful of probe points.
ValidationReport validate_problem_file(const std::string& path);

}  // namespace palflow
