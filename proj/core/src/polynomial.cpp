#include "palflow/polynomial.hpp"

#include "palflow/errors.hpp"

namespace palflow {

namespace {

double ipow(double base, int exp) {
  double out = 1.0;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace

Polynomial::Polynomial(Index n, std::vector<PolyTerm> terms)
    : n_(n), terms_(std::move(terms)) {
  if (n <= 0) throw ParameterError("polynomial dimension must be positive");
  for (const auto& term : terms_) {
    if (static_cast<Index>(term.exponents.size()) != n_)
      throw DimensionError("polynomial term has wrong exponent count");
    for (int e : term.exponents)
      if (e < 0) throw ParameterError("polynomial exponents must be >= 0");
  }
}

double Polynomial::value(const Vector& x) const {
  if (x.size() != n_) throw DimensionError("polynomial input has wrong size");
  double out = 0.0;
  for (const auto& term : terms_) {
    double m = term.coeff;
    for (Index i = 0; i < n_; ++i) m *= ipow(x[i], term.exponents[i]);
    out += m;
  }
  return out;
}

Vector Polynomial::grad(const Vector& x) const {
  if (x.size() != n_) throw DimensionError("polynomial input has wrong size");
  Vector out = Vector::Zero(n_);
  for (const auto& term : terms_) {
    for (Index i = 0; i < n_; ++i) {
      const int e = term.exponents[i];
      if (e == 0) continue;
      double m = term.coeff * e * ipow(x[i], e - 1);
      for (Index j = 0; j < n_; ++j)
        if (j != i) m *= ipow(x[j], term.exponents[j]);
      out[i] += m;
    }
  }
  return out;
}

SmoothOracle Polynomial::oracle() const {
  Polynomial copy = *this;
  SmoothOracle o;
  o.value = [copy](const Vector& x) { return copy.value(x); };
  o.grad = [copy](const Vector& x) { return copy.grad(x); };
  return o;
}

}  // namespace palflow
