#include "palflow/dynamics.hpp"

#include <cmath>

namespace palflow {

DynamicsParams::DynamicsParams(SmoothingParam mu, Vector eta)
    : mu_(mu), eta_(std::move(eta)) {
  if ((eta_.array() <= 0.0).any() || !eta_.allFinite())
    throw ParameterError("every eta component must be finite and > 0");
}

DynamicsParams::DynamicsParams(SmoothingParam mu, double eta, Index r)
    : DynamicsParams(mu, Vector::Constant(r, eta)) {}

double StateDerivative::norm() const {
  return std::sqrt(dx.squaredNorm() + dlambda.squaredNorm() +
                   dnu.squaredNorm() + dw.squaredNorm());
}

namespace {
void check_dims(const ProblemSpec& spec, const PrimalDualState& s) {
  if (s.x.size() != spec.n() || s.lambda.size() != spec.ineq_count() ||
      s.nu.size() != spec.eq_count() || s.w.size() != spec.m())
    throw DimensionError("state does not match problem dimensions");
}
}  // namespace

void check_initial_state(const ProblemSpec& spec, const PrimalDualState& s) {
  check_dims(spec, s);
  for (Index i = 0; i < s.lambda.size(); ++i)
    if (!(s.lambda[i] > 0.0))
      throw DomainError(
          "initial inequality multiplier " + std::to_string(i) +
          " must be strictly positive; a zero component never moves");
}

PrimalDualState default_initial_state(const ProblemSpec& spec,
                                      double lambda0) {
  PrimalDualState s;
  s.x = Vector::Zero(spec.n());
  s.lambda = Vector::Constant(spec.ineq_count(), lambda0);
  s.nu = Vector::Zero(spec.eq_count());
  s.w = Vector::Zero(spec.m());
  s.t = 0.0;
  return s;
}

double pal_value(const ProblemSpec& spec, const PrimalDualState& state,
                 SmoothingParam mu) {
  check_dims(spec, state);
  const double m = mu.value();
  double v = spec.f().value(state.x) +
             spec.phi().moreau_value(spec.T() * state.x + m * state.w, mu) -
             0.5 * m * state.w.squaredNorm();
  for (Index i = 0; i < spec.ineq_count(); ++i)
    v += state.lambda[i] * spec.g()[i].value(state.x);
  for (Index i = 0; i < spec.eq_count(); ++i)
    v += state.nu[i] * spec.h()[i].value(state.x);
  return v;
}

Vector pal_grad_x(const ProblemSpec& spec, const PrimalDualState& state,
                  SmoothingParam mu) {
  check_dims(spec, state);
  const Vector env_grad =
      spec.phi().moreau_grad(spec.T() * state.x + mu.value() * state.w, mu);
  Vector g = spec.f().grad(state.x) + spec.T().transpose() * env_grad;
  for (Index i = 0; i < spec.ineq_count(); ++i)
    g += state.lambda[i] * spec.g()[i].grad(state.x);
  for (Index i = 0; i < spec.eq_count(); ++i)
    g += state.nu[i] * spec.h()[i].grad(state.x);
  return g;
}

StateDerivative vector_field(const ProblemSpec& spec,
                             const PrimalDualState& state,
                             const DynamicsParams& params) {
  check_dims(spec, state);
  if (params.eta().size() != spec.ineq_count())
    throw DimensionError("eta does not match inequality count");

  const double m = params.mu().value();
  const Vector env_grad =
      spec.phi().moreau_grad(spec.T() * state.x + m * state.w, params.mu());

  StateDerivative d;
  d.dx = -(spec.f().grad(state.x) + spec.T().transpose() * env_grad);
  d.dlambda.resize(spec.ineq_count());
  for (Index i = 0; i < spec.ineq_count(); ++i) {
    d.dx -= state.lambda[i] * spec.g()[i].grad(state.x);
    d.dlambda[i] = state.lambda[i] /
                   (1.0 + params.eta()[i] * state.lambda[i]) *
                   spec.g()[i].value(state.x);
  }
  d.dnu.resize(spec.eq_count());
  for (Index i = 0; i < spec.eq_count(); ++i) {
    d.dx -= state.nu[i] * spec.h()[i].grad(state.x);
    d.dnu[i] = spec.h()[i].value(state.x);
  }
  d.dw = m * (env_grad - state.w);
  return d;
}

LyapunovReport lyapunov_value(const PrimalDualState& state,
                              const PrimalDualState& star,
                              const DynamicsParams& params,
                              double omega_tol) {
  if (state.x.size() != star.x.size() ||
      state.lambda.size() != star.lambda.size() ||
      state.nu.size() != star.nu.size() || state.w.size() != star.w.size())
    throw DimensionError("state and reference have mismatched shapes");
  if (params.eta().size() != state.lambda.size())
    throw DimensionError("eta does not match inequality count");

  LyapunovReport rep;
  rep.V1 = 0.5 * (state.x - star.x).squaredNorm();
  for (Index i = 0; i < state.lambda.size(); ++i) {
    const double dl = state.lambda[i] - star.lambda[i];
    rep.V2 += 0.5 * params.eta()[i] * dl * dl;
    if (star.lambda[i] > omega_tol) {
      rep.omega.push_back(i);
      if (!(state.lambda[i] > 0.0))
        throw DomainError("Bregman term undefined: multiplier " +
                          std::to_string(i) + " is not positive");
      // D_psi(a, b) = a ln(a/b) - a + b with psi(t) = t ln t
      rep.V3 += state.lambda[i] * std::log(state.lambda[i] / star.lambda[i]) -
                state.lambda[i] + star.lambda[i];
    } else {
      rep.V3 += dl * dl;
    }
  }
  rep.V4 = 0.5 * (state.nu - star.nu).squaredNorm() +
           0.5 * (state.w - star.w).squaredNorm();
  rep.V = rep.V1 + rep.V2 + rep.V3 + rep.V4;
  return rep;
}

double concavity_modulus(SmoothingParam mu, double ell) {
  if (std::isnan(ell) || ell <= 0.0)
    throw ParameterError("ell must be positive (or +inf)");
  const double m = mu.value();
  const double harmonic = std::isinf(ell) ? m : m * ell / (m + ell);
  return harmonic + 2.0 * m;
}

}  // namespace palflow
