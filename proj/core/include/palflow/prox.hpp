#pragma once

#include <Eigen/Core>

#include "palflow/errors.hpp"

namespace palflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Smoothing weight of the Moreau envelope. Strictly positive by construction,
// so downstream code never re-checks.
class SmoothingParam {
 public:
  explicit SmoothingParam(double mu) : mu_(mu) {
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw ParameterError("smoothing parameter must be finite and > 0, got " +
                           std::to_string(mu));
  }
  double value() const { return mu_; }

 private:
  double mu_;
};

enum class ProxKind { L1Norm, IndicatorZero, IndicatorBox, Quadratic, Zero };

// A nonsmooth convex function phi with closed-form prox. Only kinds with a
// closed form are registered; there is no generic inner minimization.
class ProxFunction {
 public:
  static ProxFunction l1_norm(Index dim);
  static ProxFunction indicator_zero(Index dim);
  static ProxFunction indicator_box(Vector lower, Vector upper);
  static ProxFunction quadratic(Index dim, double weight);
  static ProxFunction zero(Index dim);

  ProxKind kind() const { return kind_; }
  Index dimension() const { return dim_; }
  double weight() const { return weight_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  // phi(v). Indicator kinds return +infinity outside their set.
  double value(const Vector& v) const;

  // argmin_y { phi(y) + |y-v|^2 / (2 mu) }
  Vector prox(const Vector& v, SmoothingParam mu) const;

  // phi(p) + |p-v|^2 / (2 mu) with p = prox(v, mu); finite for every v.
  double moreau_value(const Vector& v, SmoothingParam mu) const;

  // (v - prox(v, mu)) / mu
  Vector moreau_grad(const Vector& v, SmoothingParam mu) const;

 private:
  ProxFunction(ProxKind kind, Index dim) : kind_(kind), dim_(dim) {}
  void check_dim(const Vector& v) const;

  ProxKind kind_;
  Index dim_;
  double weight_ = 0.0;  // Quadratic only
  Vector lower_, upper_;  // IndicatorBox only
};

const char* prox_kind_name(ProxKind kind);

}  // namespace palflow
