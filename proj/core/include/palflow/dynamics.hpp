#pragma once

#include <vector>

#include "palflow/problem.hpp"

namespace palflow {

// The flow variable (x, lambda, nu, w) at time t. lambda must stay
// nonnegative along the flow; solvers assert this every accepted step.
struct PrimalDualState {
  Vector x;
  Vector lambda;
  Vector nu;
  Vector w;
  double t = 0.0;
};

// mu plus the mirror-ascent weights eta (one per inequality constraint).
class DynamicsParams {
 public:
  DynamicsParams(SmoothingParam mu, Vector eta);
  // Broadcast a scalar eta across r constraints.
  DynamicsParams(SmoothingParam mu, double eta, Index r);

  SmoothingParam mu() const { return mu_; }
  const Vector& eta() const { return eta_; }

 private:
  SmoothingParam mu_;
  Vector eta_;
};

struct StateDerivative {
  Vector dx;
  Vector dlambda;
  Vector dnu;
  Vector dw;

  double norm() const;
};

// Initial states must carry strictly positive inequality multipliers: a zero
// component is frozen forever by the mirror flow, silently disabling its
// constraint. Throws DomainError otherwise.
void check_initial_state(const ProblemSpec& spec, const PrimalDualState& s);

PrimalDualState default_initial_state(const ProblemSpec& spec,
                                      double lambda0 = 1.0);

// The proximal augmented Lagrangian
//   f(x) + env_mu(phi)(Tx + mu w) + lambda' g(x) + nu' h(x) - mu/2 |w|^2.
double pal_value(const ProblemSpec& spec, const PrimalDualState& state,
                 SmoothingParam mu);

// Gradient of the PAL in x (the primal descent direction is its negative).
Vector pal_grad_x(const ProblemSpec& spec, const PrimalDualState& state,
                  SmoothingParam mu);

// The projection-free primal-dual field:
//   dx = -grad_x PAL, dlambda_i = lambda_i/(1+eta_i lambda_i) g_i(x),
//   dnu = h(x), dw = mu (moreau_grad(phi, Tx+mu w) - w).
StateDerivative vector_field(const ProblemSpec& spec,
                             const PrimalDualState& state,
                             const DynamicsParams& params);

struct LyapunovReport {
  double V = 0.0;
  double V1 = 0.0, V2 = 0.0, V3 = 0.0, V4 = 0.0;
  std::vector<Index> omega;  // indices with lambda_star above threshold
};

// Distance-like certificate to a reference saddle point: quadratic terms in
// x, nu, w plus a Bregman term (psi(t) = t ln t) on the multipliers whose
// reference value is nonzero.
LyapunovReport lyapunov_value(const PrimalDualState& state,
                              const PrimalDualState& star,
                              const DynamicsParams& params,
                              double omega_tol = 1e-9);

// Strong-concavity modulus of the PAL in w: mu*ell/(mu+ell) + 2 mu, where
// 1/ell is the Lipschitz constant of the subgradient of phi. ell may be
// +infinity (constant subgradient), giving 3 mu.
double concavity_modulus(SmoothingParam mu, double ell);

}  // namespace palflow
