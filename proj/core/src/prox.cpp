#include "palflow/prox.hpp"

#include <cmath>
#include <limits>

namespace palflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double v, double mu) {
  if (v > mu) return v - mu;
  if (v < -mu) return v + mu;
  return 0.0;
}
}  // namespace

ProxFunction ProxFunction::l1_norm(Index dim) {
  if (dim <= 0) throw ParameterError("prox dimension must be positive");
  return ProxFunction(ProxKind::L1Norm, dim);
}

ProxFunction ProxFunction::indicator_zero(Index dim) {
  if (dim <= 0) throw ParameterError("prox dimension must be positive");
  return ProxFunction(ProxKind::IndicatorZero, dim);
}

ProxFunction ProxFunction::indicator_box(Vector lower, Vector upper) {
  if (lower.size() != upper.size())
    throw DimensionError("box bounds have mismatched sizes");
  if (lower.size() == 0) throw ParameterError("prox dimension must be positive");
  if ((lower.array() > upper.array()).any())
    throw ParameterError("box requires lower <= upper componentwise");
  ProxFunction f(ProxKind::IndicatorBox, lower.size());
  f.lower_ = std::move(lower);
  f.upper_ = std::move(upper);
  return f;
}

ProxFunction ProxFunction::quadratic(Index dim, double weight) {
  if (dim <= 0) throw ParameterError("prox dimension must be positive");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw ParameterError("quadratic weight must be finite and >= 0");
  ProxFunction f(ProxKind::Quadratic, dim);
  f.weight_ = weight;
  return f;
}

ProxFunction ProxFunction::zero(Index dim) {
  if (dim <= 0) throw ParameterError("prox dimension must be positive");
  return ProxFunction(ProxKind::Zero, dim);
}

void ProxFunction::check_dim(const Vector& v) const {
  if (v.size() != dim_)
    throw DimensionError("prox input has size " + std::to_string(v.size()) +
                         ", expected " + std::to_string(dim_));
}

double ProxFunction::value(const Vector& v) const {
  check_dim(v);
  switch (kind_) {
    case ProxKind::L1Norm:
      return v.lpNorm<1>();
    case ProxKind::IndicatorZero:
      return v.isZero(0.0) ? 0.0 : kInf;
    case ProxKind::IndicatorBox:
      if ((v.array() < lower_.array()).any() ||
          (v.array() > upper_.array()).any())
        return kInf;
      return 0.0;
    case ProxKind::Quadratic:
      return 0.5 * weight_ * v.squaredNorm();
    case ProxKind::Zero:
      return 0.0;
  }
  return 0.0;
}

Vector ProxFunction::prox(const Vector& v, SmoothingParam mu) const {
  check_dim(v);
  const double m = mu.value();
  switch (kind_) {
    case ProxKind::L1Norm: {
      Vector p(v.size());
      for (Index i = 0; i < v.size(); ++i) p[i] = soft_threshold(v[i], m);
      return p;
    }
    case ProxKind::IndicatorZero:
      return Vector::Zero(v.size());
    case ProxKind::IndicatorBox:
      return v.cwiseMax(lower_).cwiseMin(upper_);
    case ProxKind::Quadratic:
      return v / (1.0 + m * weight_);
    case ProxKind::Zero:
      return v;
  }
  return v;
}

double ProxFunction::moreau_value(const Vector& v, SmoothingParam mu) const {
  check_dim(v);
  const double m = mu.value();
  switch (kind_) {
    case ProxKind::L1Norm: {
      // Huber: |v| <= mu gives v^2/(2 mu), else |v| - mu/2.
      double s = 0.0;
      for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        s += (a <= m) ? a * a / (2.0 * m) : a - 0.5 * m;
      }
      return s;
    }
    case ProxKind::IndicatorZero:
      return v.squaredNorm() / (2.0 * m);
    case ProxKind::IndicatorBox: {
      const Vector p = v.cwiseMax(lower_).cwiseMin(upper_);
      return (v - p).squaredNorm() / (2.0 * m);
    }
    case ProxKind::Quadratic:
      return 0.5 * weight_ * v.squaredNorm() / (1.0 + m * weight_);
    case ProxKind::Zero:
      return 0.0;
  }
  return 0.0;
}

Vector ProxFunction::moreau_grad(const Vector& v, SmoothingParam mu) const {
  check_dim(v);
  return (v - prox(v, mu)) / mu.value();
}

const char* prox_kind_name(ProxKind kind) {
  switch (kind) {
    case ProxKind::L1Norm: return "l1";
    case ProxKind::IndicatorZero: return "indicator_zero";
    case ProxKind::IndicatorBox: return "indicator_box";
    case ProxKind::Quadratic: return "quadratic";
    case ProxKind::Zero: return "zero";
  }
  return "?";
}

}  // namespace palflow
