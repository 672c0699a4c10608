#include "palflow/integrate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace palflow {

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw ParameterError("dt must be finite and > 0");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end))
    throw ParameterError("t_end must be finite and > 0");
  if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0))
    throw ParameterError("tolerances must be > 0");
  if (cfg.record_every < 1)
    throw ParameterError("record_every must be >= 1");
}

namespace detail {

namespace {

constexpr double kLambdaFloor = -1e-12;

// Clamps tiny negative multipliers introduced by roundoff; a violation
// beyond the floor means the step size cannot hold the flow's invariant.
void scan_multipliers(Vector& y, StepStats& stats,
                      const std::vector<Index>& multiplier_indices) {
  for (Index idx : multiplier_indices) {
    const double v = y[idx];
    if (v < stats.min_multiplier) stats.min_multiplier = v;
    if (v < 0.0) {
      if (v < kLambdaFloor)
        throw IntegrationError(
            "multiplier positivity breached beyond roundoff (value " +
            std::to_string(v) + "); step size too large for this flow");
      y[idx] = 0.0;
      ++stats.clamp_events;
    }
  }
}

void rk4_step(const FlatSystem& sys, const Vector& y, double h, Vector& out,
              Vector& k1, Vector& k2, Vector& k3, Vector& k4, Vector& tmp) {
  sys.field(y, k1);
  tmp = y + 0.5 * h * k1;
  sys.field(tmp, k2);
  tmp = y + 0.5 * h * k2;
  sys.field(tmp, k3);
  tmp = y + h * k3;
  sys.field(tmp, k4);
  out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

void integrate_flat(const FlatSystem& sys, Vector& y, double& t,
                    const IntegratorConfig& cfg,
                    const std::function<bool(double, const Vector&)>& on_record,
                    StepStats& stats) {
  validate(cfg);
  const double t0 = t;
  const double t_end = t0 + cfg.t_end;

  if (on_record(t, y)) return;

  long last_recorded_step = 0;

  if (cfg.method == Method::RK4Fixed) {
    const long nsteps =
        static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    Vector k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()),
        tmp(y.size()), ynew(y.size());
    for (long i = 0; i < nsteps; ++i) {
      const double remaining = t_end - (t0 + cfg.dt * static_cast<double>(i));
      const double h = std::min(cfg.dt, remaining);
      rk4_step(sys, y, h, ynew, k1, k2, k3, k4, tmp);
      if (!ynew.allFinite()) {
        // Divergence: keep the last good state and stop.
        stats.nonfinite = true;
        break;
      }
      y = ynew;
      t = (i + 1 == nsteps) ? t_end : t0 + cfg.dt * static_cast<double>(i + 1);
      ++stats.steps;
      scan_multipliers(y, stats, sys.multiplier_indices);
      const bool last = (i + 1 == nsteps);
      if (stats.steps % cfg.record_every == 0 || last) {
        last_recorded_step = stats.steps;
        if (on_record(t, y) || last) return;
      }
    }
    // Fell out via non-finite; record the last good state if it is new.
    if (last_recorded_step != stats.steps) on_record(t, y);
    return;
  }

  // Dormand-Prince 5(4) embedded pair.
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double h = std::min(cfg.dt, cfg.t_end);
  Vector k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()),
      k6(y.size()), k7(y.size()), tmp(y.size()), ynew(y.size());
  while (t < t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
    h = std::min(h, t_end - t);
    if (h < 1e-14)
      throw IntegrationError("adaptive step underflow (dt < 1e-14)");

    sys.field(y, k1);
    tmp = y + h * (a21 * k1);
    sys.field(tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    sys.field(tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    sys.field(tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    sys.field(tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    sys.field(tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    sys.field(ynew, k7);

    if (!ynew.allFinite()) {
      // A divergent trial: shrink and retry; give up once h underflows.
      h *= 0.2;
      if (h < 1e-14) {
        stats.nonfinite = true;
        break;
      }
      continue;
    }

    double err_sq = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                              e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale =
          cfg.abs_tol +
          cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err_sq += (err / scale) * (err / scale);
    }
    const double err_norm =
        std::sqrt(err_sq / static_cast<double>(std::max<Index>(1, y.size())));

    if (err_norm <= 1.0) {
      t += h;
      y = ynew;
      ++stats.steps;
      scan_multipliers(y, stats, sys.multiplier_indices);
      const bool last = !(t < t_end - 1e-14 * std::max(1.0, std::abs(t_end)));
      if (stats.steps % cfg.record_every == 0 || last) {
        last_recorded_step = stats.steps;
        if (on_record(t, y) || last) return;
      }
    }
    const double factor =
        err_norm > 0.0
            ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0)
            : 5.0;
    h *= factor;
  }
  if (last_recorded_step != stats.steps) on_record(t, y);
}

}  // namespace detail

namespace {

Vector pack(const PrimalDualState& s) {
  Vector y(s.x.size() + s.lambda.size() + s.nu.size() + s.w.size());
  y << s.x, s.lambda, s.nu, s.w;
  return y;
}

PrimalDualState unpack(const ProblemSpec& spec, const Vector& y, double t) {
  PrimalDualState s;
  const Index n = spec.n(), r = spec.ineq_count(), sc = spec.eq_count();
  s.x = y.segment(0, n);
  s.lambda = y.segment(n, r);
  s.nu = y.segment(n + r, sc);
  s.w = y.segment(n + r + sc, spec.m());
  s.t = t;
  return s;
}

detail::FlatSystem make_system(const ProblemSpec& spec,
                               const DynamicsParams& params) {
  detail::FlatSystem sys;
  sys.field = [&spec, params](const Vector& y, Vector& dy) {
    const PrimalDualState s = unpack(spec, y, 0.0);
    const StateDerivative d = vector_field(spec, s, params);
    dy.resize(y.size());
    dy << d.dx, d.dlambda, d.dnu, d.dw;
  };
  for (Index i = 0; i < spec.ineq_count(); ++i)
    sys.multiplier_indices.push_back(spec.n() + i);
  return sys;
}

TrajectorySample make_sample(const ProblemSpec& spec,
                             const DynamicsParams& params, double t,
                             const Vector& y,
                             const PrimalDualState* lyapunov_ref) {
  TrajectorySample smp;
  smp.t = t;
  smp.state = unpack(spec, y, t);
  const KktPoint pt{smp.state.x, smp.state.lambda, smp.state.nu, smp.state.w};
  smp.kkt_total = kkt_residual(spec, pt, params.mu()).total;
  smp.field_norm = vector_field(spec, smp.state, params).norm();
  if (lyapunov_ref)
    smp.lyapunov = lyapunov_value(smp.state, *lyapunov_ref, params).V;
  return smp;
}

}  // namespace

Trajectory integrate(const ProblemSpec& spec, const PrimalDualState& state0,
                     const DynamicsParams& params, const IntegratorConfig& cfg,
                     const PrimalDualState* lyapunov_ref) {
  check_initial_state(spec, state0);
  Trajectory traj;
  detail::FlatSystem sys = make_system(spec, params);
  detail::StepStats stats;
  Vector y = pack(state0);
  double t = state0.t;
  detail::integrate_flat(
      sys, y, t, cfg,
      [&](double tc, const Vector& yc) {
        traj.samples.push_back(make_sample(spec, params, tc, yc, lyapunov_ref));
        return false;
      },
      stats);
  traj.steps = stats.steps;
  traj.clamp_events = stats.clamp_events;
  traj.min_multiplier = stats.min_multiplier;
  traj.nonfinite = stats.nonfinite;
  return traj;
}

Solution solve(const ProblemSpec& spec, const DynamicsParams& params,
               const IntegratorConfig& cfg, double kkt_tol,
               const std::optional<PrimalDualState>& state0) {
  if (!(kkt_tol > 0.0)) throw ParameterError("kkt_tol must be > 0");
  const auto t_start = std::chrono::steady_clock::now();

  PrimalDualState init = state0 ? *state0 : default_initial_state(spec);
  check_initial_state(spec, init);

  Solution sol;
  detail::FlatSystem sys = make_system(spec, params);
  detail::StepStats stats;
  Vector y = pack(init);
  double t = init.t;
  bool hit_tol = false;
  detail::integrate_flat(
      sys, y, t, cfg,
      [&](double tc, const Vector& yc) {
        sol.trajectory.samples.push_back(
            make_sample(spec, params, tc, yc, nullptr));
        if (sol.trajectory.samples.back().kkt_total <= kkt_tol) {
          hit_tol = true;
          return true;
        }
        return false;
      },
      stats);
  sol.trajectory.steps = stats.steps;
  sol.trajectory.clamp_events = stats.clamp_events;
  sol.trajectory.min_multiplier = stats.min_multiplier;
  sol.trajectory.nonfinite = stats.nonfinite;

  const PrimalDualState final_state = sol.trajectory.samples.back().state;
  sol.x_star = final_state.x;
  sol.multipliers =
      KktPoint{final_state.x, final_state.lambda, final_state.nu,
               final_state.w};
  sol.final_kkt = kkt_residual(spec, sol.multipliers, params.mu());
  sol.converged = hit_tol;
  sol.stop_reason = stats.nonfinite ? StopReason::NonFinite
                    : hit_tol       ? StopReason::KktTol
                                    : StopReason::TimeLimit;

  try {
    if (spec.known_optimum()) {
      const KktPoint star = recover_multipliers(spec, *spec.known_optimum());
      const PrimalDualState ref{star.x, star.lambda, star.nu, star.w, 0.0};
      sol.rate_estimate = estimate_rate(sol.trajectory, ref);
    } else {
      sol.rate_estimate = estimate_rate(sol.trajectory, final_state);
    }
  } catch (const ParameterError&) {
    sol.rate_estimate.reset();
  }

  sol.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return sol;
}

RateEstimate estimate_rate(const Trajectory& traj,
                           const PrimalDualState& reference,
                           double window_start, double window_end) {
  if (!(window_start >= 0.0) || !(window_end <= 1.0) ||
      !(window_start < window_end))
    throw ParameterError("rate window must satisfy 0 <= start < end <= 1");
  if (traj.samples.empty()) throw ParameterError("empty trajectory");

  const double t0 = traj.samples.front().t;
  const double t1 = traj.samples.back().t;
  const double lo = t0 + window_start * (t1 - t0);
  const double hi = t0 + window_end * (t1 - t0);

  std::vector<double> ts, ys;
  for (const auto& smp : traj.samples) {
    if (smp.t < lo || smp.t > hi) continue;
    const auto& s = smp.state;
    const double d = std::sqrt((s.x - reference.x).squaredNorm() +
                               (s.lambda - reference.lambda).squaredNorm() +
                               (s.nu - reference.nu).squaredNorm() +
                               (s.w - reference.w).squaredNorm());
    if (d > 1e-12) {
      ts.push_back(smp.t);
      ys.push_back(std::log(d));
    }
  }
  if (ts.size() < 5)
    throw ParameterError("fewer than 5 usable samples in the rate window");

  const auto npts = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double denom = npts * stt - st * st;
  if (std::abs(denom) < 1e-300)
    throw ParameterError("degenerate time window for rate fit");
  RateEstimate est;
  est.slope = (npts * sty - st * sy) / denom;
  const double intercept = (sy - est.slope * st) / npts;

  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / npts;
  for (size_t i = 0; i < ts.size(); ++i) {
    const double pred = intercept + est.slope * ts[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  est.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return est;
}

Solution continuation(const ProblemSpec& spec,
                      const std::vector<double>& mu_schedule, const Vector& eta,
                      const IntegratorConfig& cfg, double kkt_tol,
                      const std::optional<PrimalDualState>& state0) {
  if (mu_schedule.empty())
    throw ParameterError("continuation schedule must not be empty");
  for (size_t i = 0; i < mu_schedule.size(); ++i) {
    if (!(mu_schedule[i] > 0.0))
      throw ParameterError("continuation schedule must be positive");
    if (i > 0 && !(mu_schedule[i] < mu_schedule[i - 1]))
      throw ParameterError("continuation schedule must be strictly decreasing");
  }

  const auto t_start = std::chrono::steady_clock::now();
  std::optional<PrimalDualState> warm = state0;
  Solution sol;
  std::vector<ContinuationRound> rounds;
  for (double mu : mu_schedule) {
    DynamicsParams params(SmoothingParam(mu), eta);
    sol = solve(spec, params, cfg, kkt_tol, warm);
    ContinuationRound round;
    round.mu = mu;
    round.converged = sol.converged;
    round.final_kkt = sol.final_kkt.total;
    round.t_integrated =
        sol.trajectory.samples.back().t - sol.trajectory.samples.front().t;
    rounds.push_back(round);

    PrimalDualState next = sol.trajectory.samples.back().state;
    next.t = 0.0;
    // An earlier round can underflow a multiplier to exact zero; nudge it
    // back to the smallest normal so the next round's positivity gate holds.
    for (Index i = 0; i < next.lambda.size(); ++i)
      next.lambda[i] =
          std::max(next.lambda[i], std::numeric_limits<double>::min());
    warm = next;
  }
  sol.rounds = std::move(rounds);
  sol.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return sol;
}

}  // namespace palflow
