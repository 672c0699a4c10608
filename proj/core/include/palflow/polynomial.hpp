#pragma once

#include <vector>

#include "palflow/problem.hpp"

namespace palflow {

// One monomial: coeff * prod_i x_i^exponents[i].
struct PolyTerm {
  double coeff = 0.0;
  std::vector<int> exponents;
};

// Multivariate polynomial with closed-form gradient. This is the only
// oracle family the file format can express; library users may plug in
// arbitrary SmoothOracle callables instead.
class Polynomial {
 public:
  Polynomial(Index n, std::vector<PolyTerm> terms);

  Index n() const { return n_; }
  const std::vector<PolyTerm>& terms() const { return terms_; }

  double value(const Vector& x) const;
  Vector grad(const Vector& x) const;

  // Packages value/grad as a SmoothOracle (copies the polynomial).
  SmoothOracle oracle() const;

 private:
  Index n_;
  std::vector<PolyTerm> terms_;
};

}  // namespace palflow
