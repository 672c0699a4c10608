#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "palflow/prox.hpp"

namespace palflow {

// Value + gradient callbacks for one smooth function R^n -> R.
struct SmoothOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

struct ProblemOptions {
  std::optional<double> strong_convexity_alpha;
  std::optional<Vector> known_optimum;
  double rank_tol = 1e-10;  // relative, for the column-rank check of T
  // The consensus stacking builds a T whose column rank is deficient by
  // construction; it downgrades the rank failure to a warning.
  bool rank_deficient_ok = false;
};

// The composite program: min f(x) + phi(Tx)  s.t.  g(x) <= 0, h(x) = 0.
// Immutable after construction; oracles must be pure.
class ProblemSpec {
 public:
  ProblemSpec(Index n, SmoothOracle f, std::vector<SmoothOracle> g,
              std::vector<SmoothOracle> h, Matrix T, ProxFunction phi,
              ProblemOptions opts = {});

  Index n() const { return n_; }
  Index m() const { return T_.rows(); }
  Index ineq_count() const { return static_cast<Index>(g_.size()); }
  Index eq_count() const { return static_cast<Index>(h_.size()); }

  const SmoothOracle& f() const { return f_; }
  const std::vector<SmoothOracle>& g() const { return g_; }
  const std::vector<SmoothOracle>& h() const { return h_; }
  const Matrix& T() const { return T_; }
  const ProxFunction& phi() const { return phi_; }

  std::optional<double> strong_convexity_alpha() const { return alpha_; }
  const std::optional<Vector>& known_optimum() const { return known_optimum_; }

  // Construction-time diagnostics (non-affine equality constraints, rank).
  const std::vector<std::string>& warnings() const { return warnings_; }

  Vector g_values(const Vector& x) const;
  Vector h_values(const Vector& x) const;

 private:
  Index n_;
  SmoothOracle f_;
  std::vector<SmoothOracle> g_, h_;
  Matrix T_;
  ProxFunction phi_;
  std::optional<double> alpha_;
  std::optional<Vector> known_optimum_;
  std::vector<std::string> warnings_;
};

// A candidate stationary point with its multipliers: lambda for g, nu for h,
// w for the splitting constraint Tx = y.
struct KktPoint {
  Vector x;
  Vector lambda;
  Vector nu;
  Vector w;
};

struct KktResidual {
  double stationarity = 0.0;
  double primal_ineq = 0.0;
  double primal_eq = 0.0;
  double complementarity = 0.0;
  double total = 0.0;
};

// First-order optimality residuals at pt. The subgradient element of phi is
// represented by its smooth surrogate moreau_grad(phi, Tx + mu w, mu), which
// coincides with the true element at any equilibrium.
KktResidual kkt_residual(const ProblemSpec& spec, const KktPoint& pt,
                         SmoothingParam mu);

struct LicqReport {
  bool satisfied = false;
  std::vector<Index> active_set;
  Index rank = 0;
};

// Linear independence of the active-constraint gradients at x.
LicqReport check_licq(const ProblemSpec& spec, const Vector& x,
                      double active_tol = 1e-6, double rank_tol = 1e-10);

// Strict inequality feasibility (and equality feasibility) at a probe point.
bool check_slater(const ProblemSpec& spec, const Vector& candidate,
                  double tol = 1e-9);

// Worst relative error of all supplied gradients against central finite
// differences at x.
double verify_gradients(const ProblemSpec& spec, const Vector& x);

// Least-squares recovery of (lambda, nu, w) from the stationarity equation at
// a given (near-)optimal x. Inactive inequality multipliers are pinned to 0;
// the subgradient element of phi is taken from its known structure at Tx and
// only left free where the structure does not determine it.
KktPoint recover_multipliers(const ProblemSpec& spec, const Vector& x,
                             double active_tol = 1e-6);

}  // namespace palflow
