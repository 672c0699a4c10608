#include "palflow/problem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace palflow {

namespace {

// Deterministic probe points for construction-time sanity checks.
Vector probe_point(Index n, int which) {
  Vector p(n);
  for (Index i = 0; i < n; ++i)
    p[i] = 0.25 * static_cast<double>(which) +
           0.13 * static_cast<double>((i * 7 + which * 3) % 11) - 0.5;
  return p;
}

Index numerical_rank(const Matrix& A, double rank_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double cutoff = rank_tol * sv(0);
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return r;
}

}  // namespace

ProblemSpec::ProblemSpec(Index n, SmoothOracle f, std::vector<SmoothOracle> g,
                         std::vector<SmoothOracle> h, Matrix T,
                         ProxFunction phi, ProblemOptions opts)
    : n_(n),
      f_(std::move(f)),
      g_(std::move(g)),
      h_(std::move(h)),
      T_(std::move(T)),
      phi_(std::move(phi)),
      alpha_(opts.strong_convexity_alpha),
      known_optimum_(opts.known_optimum) {
  if (n_ <= 0) throw ParameterError("decision dimension must be positive");
  if (!f_.value || !f_.grad) throw ParameterError("objective oracle missing");
  if (T_.cols() != n_)
    throw DimensionError("T has " + std::to_string(T_.cols()) +
                         " columns, expected " + std::to_string(n_));
  if (phi_.dimension() != T_.rows())
    throw DimensionError("phi dimension " + std::to_string(phi_.dimension()) +
                         " does not match rows(T) = " +
                         std::to_string(T_.rows()));
  if (alpha_ && (!(*alpha_ >= 0.0) || !std::isfinite(*alpha_)))
    throw ParameterError("strong convexity modulus must be finite and >= 0");
  if (known_optimum_ && known_optimum_->size() != n_)
    throw DimensionError("known optimum has wrong dimension");

  // Full column rank of T (smallest singular value relative to largest).
  {
    Eigen::JacobiSVD<Matrix> svd(T_);
    const auto& sv = svd.singularValues();
    const bool full = T_.rows() >= n_ && sv.size() == n_ &&
                      sv(n_ - 1) > opts.rank_tol * sv(0);
    if (!full) {
      if (!opts.rank_deficient_ok)
        throw ParameterError("T must have full column rank");
      warnings_.push_back("T is column-rank deficient");
    }
  }

  // Oracle output dimensions at a cheap probe.
  const Vector x0 = Vector::Zero(n_);
  if (f_.grad(x0).size() != n_)
    throw DimensionError("objective gradient has wrong dimension");
  for (size_t i = 0; i < g_.size(); ++i) {
    if (!g_[i].value || !g_[i].grad)
      throw ParameterError("inequality oracle " + std::to_string(i) +
                           " missing callbacks");
    if (g_[i].grad(x0).size() != n_)
      throw DimensionError("inequality gradient " + std::to_string(i) +
                           " has wrong dimension");
  }
  for (size_t i = 0; i < h_.size(); ++i) {
    if (!h_[i].value || !h_[i].grad)
      throw ParameterError("equality oracle " + std::to_string(i) +
                           " missing callbacks");
    if (h_[i].grad(x0).size() != n_)
      throw DimensionError("equality gradient " + std::to_string(i) +
                           " has wrong dimension");
    // The theory wants affine h; warn when the gradient moves between probes.
    const Vector g0 = h_[i].grad(probe_point(n_, 1));
    const Vector g1 = h_[i].grad(probe_point(n_, 2));
    if ((g0 - g1).lpNorm<Eigen::Infinity>() >
        1e-8 * (1.0 + g0.lpNorm<Eigen::Infinity>()))
      warnings_.push_back("equality constraint " + std::to_string(i) +
                          " is not affine; convergence guarantees weaken");
  }
}

Vector ProblemSpec::g_values(const Vector& x) const {
  Vector out(ineq_count());
  for (Index i = 0; i < out.size(); ++i) out[i] = g_[i].value(x);
  return out;
}

Vector ProblemSpec::h_values(const Vector& x) const {
  Vector out(eq_count());
  for (Index i = 0; i < out.size(); ++i) out[i] = h_[i].value(x);
  return out;
}

KktResidual kkt_residual(const ProblemSpec& spec, const KktPoint& pt,
                         SmoothingParam mu) {
  if (pt.x.size() != spec.n() || pt.lambda.size() != spec.ineq_count() ||
      pt.nu.size() != spec.eq_count() || pt.w.size() != spec.m())
    throw DimensionError("KKT point does not match problem dimensions");
  if ((pt.lambda.array() < 0.0).any())
    throw ParameterError("inequality multipliers must be nonnegative");

  const Vector gv = spec.g_values(pt.x);
  const Vector hv = spec.h_values(pt.x);
  const Vector ws =
      spec.phi().moreau_grad(spec.T() * pt.x + mu.value() * pt.w, mu);

  Vector stat = spec.f().grad(pt.x) + spec.T().transpose() * ws;
  for (Index i = 0; i < spec.ineq_count(); ++i)
    stat += pt.lambda[i] * spec.g()[i].grad(pt.x);
  for (Index i = 0; i < spec.eq_count(); ++i)
    stat += pt.nu[i] * spec.h()[i].grad(pt.x);

  KktResidual r;
  r.stationarity = stat.norm();
  r.primal_ineq = gv.cwiseMax(0.0).norm();
  r.primal_eq = hv.norm();
  r.complementarity = pt.lambda.cwiseProduct(gv).norm();
  r.total = std::max({r.stationarity, r.primal_ineq, r.primal_eq,
                      r.complementarity});
  return r;
}

LicqReport check_licq(const ProblemSpec& spec, const Vector& x,
                      double active_tol, double rank_tol) {
  if (x.size() != spec.n()) throw DimensionError("x has wrong dimension");
  if (!(active_tol > 0.0)) throw ParameterError("active_tol must be positive");

  LicqReport rep;
  for (Index i = 0; i < spec.ineq_count(); ++i)
    if (std::abs(spec.g()[i].value(x)) <= active_tol)
      rep.active_set.push_back(i);

  const Index rows = spec.eq_count() + static_cast<Index>(rep.active_set.size());
  if (rows == 0) {
    rep.satisfied = true;
    return rep;
  }
  Matrix J(rows, spec.n());
  Index r = 0;
  for (Index i = 0; i < spec.eq_count(); ++i)
    J.row(r++) = spec.h()[i].grad(x).transpose();
  for (Index i : rep.active_set) J.row(r++) = spec.g()[i].grad(x).transpose();

  rep.rank = numerical_rank(J, rank_tol);
  rep.satisfied = rep.rank == rows;
  return rep;
}

bool check_slater(const ProblemSpec& spec, const Vector& candidate,
                  double tol) {
  if (candidate.size() != spec.n())
    throw DimensionError("candidate has wrong dimension");
  const Vector gv = spec.g_values(candidate);
  if ((gv.array() >= -tol).any()) return false;
  return spec.h_values(candidate).norm() <= tol;
}

double verify_gradients(const ProblemSpec& spec, const Vector& x) {
  if (x.size() != spec.n()) throw DimensionError("x has wrong dimension");

  auto check_one = [&](const SmoothOracle& o) {
    const Vector grad = o.grad(x);
    Vector fd(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      const double h = std::max(1e-6, 1e-6 * std::abs(x[i]));
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (o.value(xp) - o.value(xm)) / (2.0 * h);
    }
    return (grad - fd).norm() / std::max({1.0, fd.norm(), grad.norm()});
  };

  double worst = check_one(spec.f());
  for (const auto& o : spec.g()) worst = std::max(worst, check_one(o));
  for (const auto& o : spec.h()) worst = std::max(worst, check_one(o));
  return worst;
}

KktPoint recover_multipliers(const ProblemSpec& spec, const Vector& x,
                             double active_tol) {
  if (x.size() != spec.n()) throw DimensionError("x has wrong dimension");

  const Index r = spec.ineq_count(), s = spec.eq_count(), m = spec.m();
  const Vector gv = spec.g_values(x);
  const Vector y = spec.T() * x;

  // Subgradient element u of phi at Tx: fixed where the structure pins it,
  // one free least-squares column where it does not.
  Vector u_fixed = Vector::Zero(m);
  std::vector<Index> u_free;
  switch (spec.phi().kind()) {
    case ProxKind::Zero:
      break;
    case ProxKind::Quadratic:
      u_fixed = spec.phi().weight() * y;
      break;
    case ProxKind::L1Norm:
      for (Index i = 0; i < m; ++i) {
        if (std::abs(y[i]) > active_tol)
          u_fixed[i] = y[i] > 0 ? 1.0 : -1.0;
        else
          u_free.push_back(i);  // kink: u in [-1, 1]
      }
      break;
    case ProxKind::IndicatorZero:
      for (Index i = 0; i < m; ++i) u_free.push_back(i);
      break;
    case ProxKind::IndicatorBox:
      for (Index i = 0; i < m; ++i) {
        const bool at_lo = std::abs(y[i] - spec.phi().lower()[i]) <= active_tol;
        const bool at_hi = std::abs(y[i] - spec.phi().upper()[i]) <= active_tol;
        if (at_lo || at_hi) u_free.push_back(i);
      }
      break;
  }

  std::vector<Index> active;
  for (Index i = 0; i < r; ++i)
    if (std::abs(gv[i]) <= active_tol) active.push_back(i);

  const Index cols = static_cast<Index>(active.size()) + s +
                     static_cast<Index>(u_free.size());
  Vector rhs = -(spec.f().grad(x) + spec.T().transpose() * u_fixed);

  KktPoint pt{x, Vector::Zero(r), Vector::Zero(s), Vector::Zero(m)};
  pt.w = u_fixed;
  if (cols == 0) return pt;

  Matrix A(spec.n(), cols);
  Index c = 0;
  for (Index i : active) A.col(c++) = spec.g()[i].grad(x);
  for (Index i = 0; i < s; ++i) A.col(c++) = spec.h()[i].grad(x);
  for (Index i : u_free) A.col(c++) = spec.T().transpose().col(i);

  const Vector sol = A.colPivHouseholderQr().solve(rhs);
  c = 0;
  for (Index i : active) pt.lambda[i] = std::max(0.0, sol[c++]);
  for (Index i = 0; i < s; ++i) pt.nu[i] = sol[c++];
  for (Index i : u_free) pt.w[i] = sol[c++];
  return pt;
}

}  // namespace palflow
