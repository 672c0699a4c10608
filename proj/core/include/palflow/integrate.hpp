#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "palflow/dynamics.hpp"

namespace palflow {

enum class Method { RK4Fixed, RK45Adaptive };

struct IntegratorConfig {
  Method method = Method::RK4Fixed;
  double dt = 1e-3;       // fixed step, or initial step for the adaptive pair
  double t_end = 100.0;
  double abs_tol = 1e-8;  // adaptive only
  double rel_tol = 1e-6;  // adaptive only
  int record_every = 100; // keep every k-th accepted step (first/last always)
};

void validate(const IntegratorConfig& cfg);

struct TrajectorySample {
  double t = 0.0;
  PrimalDualState state;
  double kkt_total = 0.0;
  double field_norm = 0.0;
  std::optional<double> lyapunov;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  long steps = 0;
  int clamp_events = 0;  // multiplier entries in [-1e-12, 0) snapped to 0
  double min_multiplier = std::numeric_limits<double>::infinity();
  bool nonfinite = false;  // flow left the finite range; trajectory truncated
};

enum class StopReason { KktTol, TimeLimit, NonFinite };

struct RateEstimate {
  double slope = 0.0;
  double r_squared = 0.0;
};

struct ContinuationRound {
  double mu = 0.0;
  bool converged = false;
  double final_kkt = 0.0;
  double t_integrated = 0.0;
};

struct Solution {
  Vector x_star;
  KktPoint multipliers;
  bool converged = false;
  StopReason stop_reason = StopReason::TimeLimit;
  KktResidual final_kkt;
  std::optional<RateEstimate> rate_estimate;
  Trajectory trajectory;
  std::vector<ContinuationRound> rounds;  // filled by continuation only
  double wall_seconds = 0.0;
};

// Integrate the primal-dual flow over [0, t_end]. Diagnostics (KKT residual,
// field norm, and the Lyapunov value when a reference is supplied) are
// attached to each recorded sample.
Trajectory integrate(const ProblemSpec& spec, const PrimalDualState& state0,
                     const DynamicsParams& params, const IntegratorConfig& cfg,
                     const PrimalDualState* lyapunov_ref = nullptr);

// Integrate until the KKT residual drops below kkt_tol (checked at recorded
// samples) or the horizon runs out. Default start: x=0, lambda=1, nu=0, w=0.
Solution solve(const ProblemSpec& spec, const DynamicsParams& params,
               const IntegratorConfig& cfg, double kkt_tol = 1e-6,
               const std::optional<PrimalDualState>& state0 = {});

// Least-squares fit of ln |z(t) - z_ref| against t over the window
// (fractions of the trajectory time span); distances <= 1e-12 are dropped.
// Throws ParameterError when fewer than 5 usable samples remain.
RateEstimate estimate_rate(const Trajectory& traj,
                           const PrimalDualState& reference,
                           double window_start = 0.3, double window_end = 0.9);

// Solve under a strictly decreasing mu schedule, warm-starting each round
// from the previous final state. cfg.t_end is the per-round budget. The
// returned Solution is the last round's, with rounds recording the schedule.
Solution continuation(const ProblemSpec& spec,
                      const std::vector<double>& mu_schedule, const Vector& eta,
                      const IntegratorConfig& cfg, double kkt_tol = 1e-6,
                      const std::optional<PrimalDualState>& state0 = {});

namespace detail {

// Integrator core shared by the centralized and network flows: a flat ODE
// y' = field(y) where some components are multipliers that must remain >= 0.
struct FlatSystem {
  std::function<void(const Vector&, Vector&)> field;
  std::vector<Index> multiplier_indices;
};

struct StepStats {
  long steps = 0;
  int clamp_events = 0;
  double min_multiplier = std::numeric_limits<double>::infinity();
  bool nonfinite = false;
};

// on_record(t, y) is called for the initial state, every record_every-th
// accepted step, and the final state; returning true stops the run early.
void integrate_flat(const FlatSystem& sys, Vector& y, double& t,
                    const IntegratorConfig& cfg,
                    const std::function<bool(double, const Vector&)>& on_record,
                    StepStats& stats);

}  // namespace detail

}  // namespace palflow
