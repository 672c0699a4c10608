#include "palflow/run.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace palflow {

namespace {

using nlohmann::ordered_json;

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::KktTol: return "kkt_tol";
    case StopReason::TimeLimit: return "time_limit";
    case StopReason::NonFinite: return "nonfinite";
  }
  return "unknown";
}

const char* method_name(Method m) {
  return m == Method::RK4Fixed ? "rk4" : "rk45";
}

const char* format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Both: return "both";
  }
  return "both";
}

ordered_json to_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json to_json(const KktResidual& r, double total_override) {
  return ordered_json{{"stationarity", r.stationarity},
                      {"primal_ineq", r.primal_ineq},
                      {"primal_eq", r.primal_eq},
                      {"complementarity", r.complementarity},
                      {"total", total_override}};
}

ordered_json config_echo(const RunConfig& cfg, double t_end, bool distributed) {
  ordered_json c;
  c["problem"] = cfg.problem;
  c["mode"] = distributed ? "distributed" : "centralized";
  c["mu"] = cfg.mu;
  c["eta"] = cfg.eta;
  c["dt"] = cfg.dt;
  c["t_end"] = t_end;
  c["kkt_tol"] = cfg.kkt_tol;
  c["method"] = method_name(cfg.method);
  c["mu_schedule"] = cfg.mu_schedule;
  c["record_every"] = cfg.record_every;
  c["format"] = format_name(cfg.format);
  return c;
}

// Infinity is not representable in JSON; nlohmann would emit null anyway,
// make it explicit.
ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

struct OutputPaths {
  std::string trajectory, summary;
};

OutputPaths write_outputs(const RunConfig& cfg, const std::string& out_dir,
                          const std::function<void(std::ostream&)>& write_csv,
                          const ordered_json& summary) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  OutputPaths paths;
  if (cfg.format != OutputFormat::Json) {
    paths.trajectory = (fs::path(out_dir) / "trajectory.csv").string();
    std::ofstream os(paths.trajectory, std::ios::binary);
    if (!os) throw ParseError("cannot write " + paths.trajectory);
    write_csv(os);
  }
  if (cfg.format != OutputFormat::Csv) {
    paths.summary = (fs::path(out_dir) / "summary.json").string();
    std::ofstream os(paths.summary, std::ios::binary);
    if (!os) throw ParseError("cannot write " + paths.summary);
    os << summary.dump(2) << "\n";
  }
  return paths;
}

RunStatus status_from(bool converged, bool nonfinite) {
  if (nonfinite) return RunStatus::NumericFault;
  return converged ? RunStatus::Converged : RunStatus::TimeLimit;
}

std::string outcome_line(bool converged, bool nonfinite, double kkt, double t,
                         double wall) {
  std::ostringstream os;
  if (nonfinite)
    os << "flow left the finite range near t=" << t;
  else if (converged)
    os << "converged at t=" << t;
  else
    os << "time limit reached at t=" << t;
  os << " (kkt " << kkt << ", " << wall << " s)";
  return os.str();
}

}  // namespace

RunReport run(const RunConfig& cfg) {
  RunReport rep;
  try {
    // Resolve the problem: registry first, then the filesystem.
    std::optional<ProblemSpec> prob;
    std::optional<NetworkProblem> net;
    std::optional<double> registry_t_end;
    if (const RegistryEntry* entry = find_problem(cfg.problem)) {
      registry_t_end = entry->default_t_end;
      if (entry->is_network())
        net = entry->make_network();
      else
        prob = entry->make();
    } else if (std::filesystem::exists(cfg.problem)) {
      ParsedProblem parsed = parse_problem_file(cfg.problem);
      prob = std::move(parsed.problem);
      net = std::move(parsed.network);
    } else {
      rep.status = RunStatus::UserError;
      rep.message = "unknown problem '" + cfg.problem +
                    "' (not a registry name, and no such file)";
      return rep;
    }

    bool distributed = net.has_value();
    if (cfg.mode == RunMode::Distributed && !net) {
      rep.status = RunStatus::UserError;
      rep.message = "problem '" + cfg.problem + "' has no network structure";
      return rep;
    }
    if (cfg.mode == RunMode::Centralized && net) {
      prob = aggregate_problem(net->spec);
      distributed = false;
    }

    IntegratorConfig icfg;
    icfg.method = cfg.method;
    icfg.dt = cfg.dt;
    icfg.t_end = cfg.t_end ? *cfg.t_end : registry_t_end.value_or(100.0);
    icfg.record_every = cfg.record_every;
    validate(icfg);

    const Index r = distributed ? net->spec.total_ineq() : prob->ineq_count();
    std::optional<DynamicsParams> params;
    if (cfg.eta.size() == 1) {
      params.emplace(SmoothingParam(cfg.mu), cfg.eta[0], r);
    } else if (static_cast<Index>(cfg.eta.size()) == r) {
      Vector e(r);
      for (Index i = 0; i < r; ++i) e[i] = cfg.eta[i];
      params.emplace(SmoothingParam(cfg.mu), e);
    } else {
      rep.status = RunStatus::UserError;
      rep.message = "eta needs 1 entry or one per inequality constraint (" +
                    std::to_string(r) + ")";
      return rep;
    }

    std::string out_dir = cfg.out_dir;
    if (const char* env = std::getenv("PALFLOW_OUT"))
      if (*env) out_dir = env;

    if (!distributed) rep.warnings = prob->warnings();

    ordered_json summary;
    summary["problem"] = cfg.problem;
    summary["mode"] = distributed ? "distributed" : "centralized";

    if (!cfg.mu_schedule.empty()) {
      if (distributed) {
        rep.status = RunStatus::UserError;
        rep.message = "mu schedules apply to single-problem runs only";
        return rep;
      }
      Solution sol =
          continuation(*prob, cfg.mu_schedule, params->eta(), icfg, cfg.kkt_tol);
      summary["converged"] = sol.converged;
      summary["stop_reason"] = stop_reason_name(sol.stop_reason);
      summary["final_kkt"] = to_json(sol.final_kkt, sol.final_kkt.total);
      summary["x_star"] = to_json(sol.x_star);
      summary["multipliers"] =
          ordered_json{{"lambda", to_json(sol.multipliers.lambda)},
                       {"nu", to_json(sol.multipliers.nu)},
                       {"w", to_json(sol.multipliers.w)}};
      summary["rate_estimate"] =
          sol.rate_estimate
              ? ordered_json{{"slope", sol.rate_estimate->slope},
                             {"r_squared", sol.rate_estimate->r_squared}}
              : ordered_json(nullptr);
      ordered_json rounds = ordered_json::array();
      for (const auto& round : sol.rounds)
        rounds.push_back(ordered_json{{"mu", round.mu},
                                      {"converged", round.converged},
                                      {"final_kkt", round.final_kkt},
                                      {"t_integrated", round.t_integrated}});
      summary["rounds"] = rounds;
      summary["steps"] = sol.trajectory.steps;
      summary["clamp_events"] = sol.trajectory.clamp_events;
      summary["min_multiplier"] = finite_or_null(sol.trajectory.min_multiplier);
      summary["wall_seconds"] = sol.wall_seconds;
      summary["config"] = config_echo(cfg, icfg.t_end, distributed);

      const auto paths = write_outputs(
          cfg, out_dir,
          [&](std::ostream& os) { write_trajectory_csv(os, sol.trajectory); },
          summary);
      rep.trajectory_path = paths.trajectory;
      rep.summary_path = paths.summary;
      rep.status = status_from(sol.converged, sol.trajectory.nonfinite);
      rep.message = outcome_line(sol.converged, sol.trajectory.nonfinite,
                                 sol.final_kkt.total,
                                 sol.trajectory.samples.back().t,
                                 sol.wall_seconds) +
                    " after " + std::to_string(sol.rounds.size()) + " rounds";
      return rep;
    }

    if (distributed) {
      NetworkSolution sol =
          solve_network(net->spec, net->initial, *params, icfg, cfg.kkt_tol);
      const KktResidual comps =
          network_kkt_components(net->spec, sol.final_state);
      summary["converged"] = sol.converged;
      summary["stop_reason"] = stop_reason_name(sol.stop_reason);
      summary["final_kkt"] = to_json(comps, sol.final_kkt);
      summary["x_star"] = to_json(sol.x_star);
      Vector lambda_all(net->spec.total_ineq()), nu_all(net->spec.total_eq());
      Vector w_all(net->spec.node_count() * net->spec.decision_dim());
      Index la = 0, na = 0, wa = 0;
      for (Index i = 0; i < net->spec.node_count(); ++i) {
        for (Index k = 0; k < sol.final_state.lambda[i].size(); ++k)
          lambda_all[la++] = sol.final_state.lambda[i][k];
        for (Index k = 0; k < sol.final_state.nu[i].size(); ++k)
          nu_all[na++] = sol.final_state.nu[i][k];
        for (Index k = 0; k < sol.final_state.w[i].size(); ++k)
          w_all[wa++] = sol.final_state.w[i][k];
      }
      summary["multipliers"] = ordered_json{{"lambda", to_json(lambda_all)},
                                            {"nu", to_json(nu_all)},
                                            {"w", to_json(w_all)}};
      summary["rate_estimate"] = nullptr;
      summary["consensus_error"] = sol.final_consensus;
      ordered_json agents = ordered_json::array();
      for (const auto& xi : sol.final_state.x)
        agents.push_back(ordered_json{{"x", to_json(xi)}});
      summary["agents"] = agents;
      summary["steps"] = sol.trajectory.steps;
      summary["clamp_events"] = sol.trajectory.clamp_events;
      summary["min_multiplier"] = finite_or_null(sol.trajectory.min_multiplier);
      summary["wall_seconds"] = sol.wall_seconds;
      summary["config"] = config_echo(cfg, icfg.t_end, distributed);

      const auto paths = write_outputs(
          cfg, out_dir,
          [&](std::ostream& os) {
            write_network_trajectory_csv(os, sol.trajectory);
          },
          summary);
      rep.trajectory_path = paths.trajectory;
      rep.summary_path = paths.summary;
      rep.status = status_from(sol.converged, sol.trajectory.nonfinite);
      rep.message = outcome_line(sol.converged, sol.trajectory.nonfinite,
                                 sol.final_kkt,
                                 sol.trajectory.samples.back().t,
                                 sol.wall_seconds);
      return rep;
    }

    Solution sol = solve(*prob, *params, icfg, cfg.kkt_tol);
    summary["converged"] = sol.converged;
    summary["stop_reason"] = stop_reason_name(sol.stop_reason);
    summary["final_kkt"] = to_json(sol.final_kkt, sol.final_kkt.total);
    summary["x_star"] = to_json(sol.x_star);
    summary["multipliers"] =
        ordered_json{{"lambda", to_json(sol.multipliers.lambda)},
                     {"nu", to_json(sol.multipliers.nu)},
                     {"w", to_json(sol.multipliers.w)}};
    summary["rate_estimate"] =
        sol.rate_estimate
            ? ordered_json{{"slope", sol.rate_estimate->slope},
                           {"r_squared", sol.rate_estimate->r_squared}}
            : ordered_json(nullptr);
    summary["steps"] = sol.trajectory.steps;
    summary["clamp_events"] = sol.trajectory.clamp_events;
    summary["min_multiplier"] = finite_or_null(sol.trajectory.min_multiplier);
    summary["wall_seconds"] = sol.wall_seconds;
    summary["config"] = config_echo(cfg, icfg.t_end, distributed);

    const auto paths = write_outputs(
        cfg, out_dir,
        [&](std::ostream& os) { write_trajectory_csv(os, sol.trajectory); },
        summary);
    rep.trajectory_path = paths.trajectory;
    rep.summary_path = paths.summary;
    rep.status = status_from(sol.converged, sol.trajectory.nonfinite);
    rep.message = outcome_line(sol.converged, sol.trajectory.nonfinite,
                               sol.final_kkt.total,
                               sol.trajectory.samples.back().t,
                               sol.wall_seconds);
    return rep;
  } catch (const IntegrationError& e) {
    rep.status = RunStatus::NumericFault;
    rep.message = e.what();
    return rep;
  } catch (const std::exception& e) {
    rep.status = RunStatus::UserError;
    rep.message = e.what();
    return rep;
  }
}

ValidationReport validate_problem_file(const std::string& path) {
  ValidationReport rep;
  try {
    ParsedProblem parsed = parse_problem_file(path);
    const ProblemSpec spec = parsed.network
                                 ? aggregate_problem(parsed.network->spec)
                                 : *parsed.problem;
    rep.warnings = spec.warnings();

    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int probe = 0; probe < 5; ++probe) {
      Vector x(spec.n());
      for (Index i = 0; i < spec.n(); ++i) x[i] = uni(rng);
      worst = std::max(worst, verify_gradients(spec, x));
    }
    rep.worst_gradient_error = worst;
    rep.ok = worst <= 1e-6;
    std::ostringstream os;
    if (rep.ok)
      os << "ok: " << (parsed.network ? "network problem, " : "problem, ")
         << "worst gradient error " << worst;
    else
      os << "gradient check failed: worst relative error " << worst;
    rep.message = os.str();
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.message = e.what();
  }
  return rep;
}

}  // namespace palflow
