#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "palflow/dynamics.hpp"
#include "palflow/polynomial.hpp"
#include "palflow/registry.hpp"

using namespace palflow;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

SmoothOracle sum_of_squares() {
  return {[](const Vector& x) { return x.squaredNorm(); },
          [](const Vector& x) { return Vector(2.0 * x); }};
}

SmoothOracle constant_zero(Index n) {
  return {[](const Vector&) { return 0.0; },
          [n](const Vector&) { return Vector(Vector::Zero(n)); }};
}

PrimalDualState random_state(const ProblemSpec& spec, std::mt19937& rng,
                             double scale = 2.0) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  PrimalDualState s;
  s.x.resize(spec.n());
  for (Index i = 0; i < s.x.size(); ++i) s.x[i] = scale * unif(rng);
  s.lambda.resize(spec.ineq_count());
  for (Index i = 0; i < s.lambda.size(); ++i)
    s.lambda[i] = scale * std::abs(unif(rng)) + 1e-3;
  s.nu.resize(spec.eq_count());
  for (Index i = 0; i < s.nu.size(); ++i) s.nu[i] = scale * unif(rng);
  s.w.resize(spec.m());
  for (Index i = 0; i < s.w.size(); ++i) s.w[i] = scale * unif(rng);
  return s;
}

}  // namespace

TEST_CASE("dynamics parameters validate eta") {
  CHECK_THROWS_AS(DynamicsParams(SmoothingParam(0.1), vec({1.0, 0.0})),
                  ParameterError);
  CHECK_THROWS_AS(DynamicsParams(SmoothingParam(0.1), -1.0, 3), ParameterError);
  CHECK_THROWS_AS(DynamicsParams(SmoothingParam(0.1),
                                 vec({1.0, std::numeric_limits<double>::quiet_NaN()})),
                  ParameterError);

  const DynamicsParams broadcast(SmoothingParam(0.1), 2.5, 4);
  CHECK(broadcast.eta().size() == 4);
  CHECK(broadcast.eta()[3] == 2.5);
}

TEST_CASE("initial states need strictly positive inequality multipliers") {
  const ProblemSpec spec = find_problem("ineq-qp")->make();
  PrimalDualState s = default_initial_state(spec);
  CHECK(s.x.isZero());
  CHECK(s.lambda.size() == 1);
  CHECK(s.lambda[0] == 1.0);
  CHECK_NOTHROW(check_initial_state(spec, s));

  s.lambda[0] = 0.0;
  CHECK_THROWS_AS(check_initial_state(spec, s), DomainError);
  s.lambda[0] = -0.5;
  CHECK_THROWS_AS(check_initial_state(spec, s), DomainError);

  s = default_initial_state(spec);
  s.x = Vector::Zero(2);
  CHECK_THROWS_AS(check_initial_state(spec, s), DimensionError);
}

TEST_CASE("smoothed lagrangian value") {
  SUBCASE("collapses to the objective without constraints or regularizer") {
    const ProblemSpec spec(2, sum_of_squares(), {}, {}, Matrix::Identity(2, 2),
                           ProxFunction::zero(2));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
      PrimalDualState s;
      s.x = vec({unif(rng), unif(rng)});
      s.lambda.resize(0);
      s.nu.resize(0);
      s.w = Vector::Zero(2);
      CHECK(pal_value(spec, s, SmoothingParam(0.3)) ==
            doctest::Approx(s.x.squaredNorm()).epsilon(1e-14));
    }
  }
  SUBCASE("equality indicator contributes its smoothed penalty") {
    // f = 0, phi = indicator of {0} in one dimension, x = 1, w = 0, mu = 1:
    // the envelope evaluates to x^2 / (2 mu) = 0.5.
    const ProblemSpec spec(1, constant_zero(1), {}, {}, Matrix::Identity(1, 1),
                           ProxFunction::indicator_zero(1));
    PrimalDualState s;
    s.x = vec({1.0});
    s.lambda.resize(0);
    s.nu.resize(0);
    s.w = vec({0.0});
    CHECK(pal_value(spec, s, SmoothingParam(1.0)) == doctest::Approx(0.5));
  }
  SUBCASE("multiplier terms enter linearly") {
    // f = x^2, g = x - 1, lambda = 2 at x = 3: 9 + 2 * 2 = 13.
    const Polynomial g(1, {{1.0, {1}}, {-1.0, {0}}});
    const ProblemSpec spec(1, sum_of_squares(), {g.oracle()}, {},
                           Matrix::Identity(1, 1), ProxFunction::zero(1));
    PrimalDualState s;
    s.x = vec({3.0});
    s.lambda = vec({2.0});
    s.nu.resize(0);
    s.w = vec({0.0});
    CHECK(pal_value(spec, s, SmoothingParam(0.5)) == doctest::Approx(13.0));
  }
  SUBCASE("matches its hand-assembled pieces on a soft-threshold problem") {
    const ProblemSpec spec = find_problem("lasso-toy")->make();
    std::mt19937 rng(11);
    const SmoothingParam mu(0.2);
    for (int trial = 0; trial < 20; ++trial) {
      const PrimalDualState s = random_state(spec, rng);
      const Vector arg = spec.T() * s.x + mu.value() * s.w;
      const double expected = spec.f().value(s.x) +
                              spec.phi().moreau_value(arg, mu) -
                              0.5 * mu.value() * s.w.squaredNorm();
      CHECK(pal_value(spec, s, mu) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("gradient in x matches finite differences") {
  std::mt19937 rng(17);
  const SmoothingParam mu(0.15);
  for (const char* name : {"rosen-suzuki-central", "lasso-toy", "ineq-qp"}) {
    const ProblemSpec spec = find_problem(name)->make();
    for (int trial = 0; trial < 10; ++trial) {
      const PrimalDualState s = random_state(spec, rng);
      const Vector grad = pal_grad_x(spec, s, mu);
      for (Index i = 0; i < spec.n(); ++i) {
        const double h = 1e-6;
        PrimalDualState sp = s, sm = s;
        sp.x[i] += h;
        sm.x[i] -= h;
        const double fd =
            (pal_value(spec, sp, mu) - pal_value(spec, sm, mu)) / (2.0 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(5e-5));
      }
    }
  }
}

TEST_CASE("vector field structure") {
  SUBCASE("a zero multiplier never moves") {
    const ProblemSpec spec = find_problem("rosen-suzuki-central")->make();
    PrimalDualState s = default_initial_state(spec);
    s.x = vec({1.0, -2.0, 0.5, 3.0});
    s.lambda = vec({0.0, 0.7});
    const StateDerivative d =
        vector_field(spec, s, DynamicsParams(SmoothingParam(0.1), 1.0, 2));
    CHECK(d.dlambda[0] == 0.0);
    CHECK(d.dlambda[1] != 0.0);
  }
  SUBCASE("unconstrained quadratic flows straight down the gradient") {
    const ProblemSpec spec(1, sum_of_squares(), {}, {}, Matrix::Identity(1, 1),
                           ProxFunction::zero(1));
    PrimalDualState s;
    s.x = vec({1.0});
    s.lambda.resize(0);
    s.nu.resize(0);
    s.w = vec({0.0});
    const StateDerivative d =
        vector_field(spec, s, DynamicsParams(SmoothingParam(0.1), 1.0, 0));
    CHECK(d.dx[0] == doctest::Approx(-2.0));
    CHECK(d.dw[0] == 0.0);
  }
  SUBCASE("multiplier dynamics use the damped mirror weight") {
    // dlambda = lambda / (1 + eta lambda) * g(x); check the numbers.
    const Polynomial g(1, {{1.0, {1}}, {-1.0, {0}}});  // x - 1
    const ProblemSpec spec(1, sum_of_squares(), {g.oracle()}, {},
                           Matrix::Identity(1, 1), ProxFunction::zero(1));
    PrimalDualState s;
    s.x = vec({3.0});
    s.lambda = vec({2.0});
    s.nu.resize(0);
    s.w = vec({0.0});
    const StateDerivative d =
        vector_field(spec, s, DynamicsParams(SmoothingParam(0.1), 0.5, 1));
    CHECK(d.dlambda[0] == doctest::Approx(2.0 / (1.0 + 0.5 * 2.0) * 2.0));
    CHECK(d.dnu.size() == 0);
  }
  SUBCASE("regularizer coupling drives w toward the envelope gradient") {
    const ProblemSpec spec = find_problem("lasso-toy")->make();
    std::mt19937 rng(23);
    const SmoothingParam mu(0.2);
    const PrimalDualState s = random_state(spec, rng);
    const StateDerivative d =
        vector_field(spec, s, DynamicsParams(mu, 1.0, 0));
    const Vector env =
        spec.phi().moreau_grad(spec.T() * s.x + mu.value() * s.w, mu);
    CHECK((d.dw - mu.value() * (env - s.w)).norm() <= 1e-14);
  }
  SUBCASE("eta length must match the inequality count") {
    const ProblemSpec spec = find_problem("rosen-suzuki-central")->make();
    const PrimalDualState s = default_initial_state(spec);
    CHECK_THROWS_AS(
        vector_field(spec, s, DynamicsParams(SmoothingParam(0.1), 1.0, 1)),
        DimensionError);
  }
}

TEST_CASE("field vanishes exactly at recovered first-order points") {
  for (const char* name : {"ineq-qp", "eq-qp", "lasso-toy"}) {
    const ProblemSpec spec = find_problem(name)->make();
    const KktPoint rec = recover_multipliers(spec, *spec.known_optimum());
    PrimalDualState s{rec.x, rec.lambda, rec.nu, rec.w, 0.0};
    const DynamicsParams params(SmoothingParam(0.1), 1.0, spec.ineq_count());
    CHECK(vector_field(spec, s, params).norm() <= 1e-8);

    // Rescaling eta never moves an equilibrium.
    const DynamicsParams scaled(SmoothingParam(0.1), 10.0, spec.ineq_count());
    CHECK(vector_field(spec, s, scaled).norm() <= 1e-8);
  }
}

TEST_CASE("eta rescaling preserves the sign pattern of multiplier motion") {
  const ProblemSpec spec = find_problem("rosen-suzuki-central")->make();
  std::mt19937 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const PrimalDualState s = random_state(spec, rng);
    const StateDerivative a =
        vector_field(spec, s, DynamicsParams(SmoothingParam(0.1), 1.0, 2));
    const StateDerivative b =
        vector_field(spec, s, DynamicsParams(SmoothingParam(0.1), 10.0, 2));
    for (Index i = 0; i < 2; ++i) {
      const double sa = a.dlambda[i], sb = b.dlambda[i];
      CHECK(((sa > 0 && sb > 0) || (sa < 0 && sb < 0) ||
             (sa == 0 && sb == 0)));
    }
    // Only the multiplier block depends on eta.
    CHECK((a.dx - b.dx).norm() == 0.0);
    CHECK((a.dnu - b.dnu).norm() == 0.0);
    CHECK((a.dw - b.dw).norm() == 0.0);
  }
}

TEST_CASE("distance certificate to a saddle point") {
  const DynamicsParams params(SmoothingParam(0.1), 1.0, 1);

  PrimalDualState star;
  star.x = vec({1.0, -1.0});
  star.lambda = vec({1.0});
  star.nu = vec({0.5});
  star.w = vec({0.0, 0.0});

  SUBCASE("zero at the reference itself") {
    const LyapunovReport rep = lyapunov_value(star, star, params);
    CHECK(rep.V == 0.0);
    CHECK(rep.V1 == 0.0);
    CHECK(rep.V2 == 0.0);
    CHECK(rep.V3 == 0.0);
    CHECK(rep.V4 == 0.0);
    REQUIRE(rep.omega.size() == 1);
    CHECK(rep.omega[0] == 0);
  }
  SUBCASE("relative-entropy term for an active multiplier") {
    PrimalDualState s = star;
    s.lambda = vec({2.0});
    const LyapunovReport rep = lyapunov_value(s, star, params);
    CHECK(rep.V3 == doctest::Approx(2.0 * std::log(2.0) - 1.0));  // 0.3863
    CHECK(rep.V2 == doctest::Approx(0.5));
    CHECK(rep.V1 == 0.0);
    CHECK(rep.V4 == 0.0);
  }
  SUBCASE("plain quadratic penalty for an inactive multiplier") {
    PrimalDualState zstar = star;
    zstar.lambda = vec({0.0});
    PrimalDualState s = zstar;
    s.lambda = vec({0.3});
    const LyapunovReport rep = lyapunov_value(s, zstar, params);
    CHECK(rep.omega.empty());
    CHECK(rep.V3 == doctest::Approx(0.09));
    CHECK_NOTHROW(lyapunov_value(zstar, zstar, params));  // 0 vs 0 is fine
  }
  SUBCASE("nonpositive multiplier against an active reference is an error") {
    PrimalDualState s = star;
    s.lambda = vec({0.0});
    CHECK_THROWS_AS(lyapunov_value(s, star, params), DomainError);
    s.lambda = vec({-0.1});
    CHECK_THROWS_AS(lyapunov_value(s, star, params), DomainError);
  }
  SUBCASE("eta weights the quadratic multiplier term") {
    PrimalDualState s = star;
    s.lambda = vec({2.0});
    const DynamicsParams heavy(SmoothingParam(0.1), 2.0, 1);
    CHECK(lyapunov_value(s, star, heavy).V2 == doctest::Approx(1.0));
  }
  SUBCASE("no multipliers leaves only the quadratic distance") {
    const ProblemSpec spec = find_problem("lasso-toy")->make();
    const KktPoint rec = recover_multipliers(spec, *spec.known_optimum());
    PrimalDualState ref{rec.x, rec.lambda, rec.nu, rec.w, 0.0};
    std::mt19937 rng(3);
    PrimalDualState s = random_state(spec, rng);
    const DynamicsParams none(SmoothingParam(0.1), 1.0, 0);
    const LyapunovReport rep = lyapunov_value(s, ref, none);
    CHECK(rep.V2 == 0.0);
    CHECK(rep.V3 == 0.0);
    CHECK(rep.V ==
          doctest::Approx(0.5 * (s.x - ref.x).squaredNorm() +
                          0.5 * (s.w - ref.w).squaredNorm()));
  }
  SUBCASE("shape mismatch") {
    PrimalDualState s = star;
    s.nu = vec({0.5, 0.0});
    CHECK_THROWS_AS(lyapunov_value(s, star, params), DimensionError);
  }
}

TEST_CASE("documented concavity modulus formula") {
  CHECK(concavity_modulus(SmoothingParam(1.0), 1.0) == doctest::Approx(2.5));
  CHECK(concavity_modulus(SmoothingParam(2.0), 2.0) == doctest::Approx(5.0));
  CHECK(concavity_modulus(SmoothingParam(1e-8), 1.0) <= 1e-7);
  CHECK(concavity_modulus(SmoothingParam(0.5),
                          std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.5));
  CHECK_THROWS_AS(concavity_modulus(SmoothingParam(1.0), 0.0), ParameterError);
  CHECK_THROWS_AS(concavity_modulus(SmoothingParam(1.0), -2.0), ParameterError);
  CHECK_THROWS_AS(
      concavity_modulus(SmoothingParam(1.0),
                        std::numeric_limits<double>::quiet_NaN()),
      ParameterError);
}

TEST_CASE("strong convexity of the smoothed lagrangian in x") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const char* name : {"ineq-qp", "lasso-toy"}) {
    const ProblemSpec spec = find_problem(name)->make();
    const double alpha = *spec.strong_convexity_alpha();
    const SmoothingParam mu(0.2);
    for (int trial = 0; trial < 50; ++trial) {
      PrimalDualState a = random_state(spec, rng);
      PrimalDualState b = a;
      for (Index i = 0; i < b.x.size(); ++i) b.x[i] = 2.0 * unif(rng);
      const Vector grad_a = pal_grad_x(spec, a, mu);
      const double lhs = pal_value(spec, b, mu);
      const double rhs = pal_value(spec, a, mu) +
                         grad_a.dot(b.x - a.x) +
                         0.5 * alpha * (b.x - a.x).squaredNorm();
      CHECK(lhs >= rhs - 1e-9);
    }
  }
}

TEST_CASE("concavity of the smoothed lagrangian in the dual block") {
  // The multiplier terms are linear and the w term is a negative quadratic
  // composed with the envelope, so the dual block is always concave; the
  // midpoint value dominates the average on every fixture.
  std::mt19937 rng(43);
  for (const char* name :
       {"rosen-suzuki-central", "ineq-qp", "eq-qp", "lasso-toy"}) {
    const ProblemSpec spec = find_problem(name)->make();
    const SmoothingParam mu(0.3);
    for (int trial = 0; trial < 50; ++trial) {
      PrimalDualState a = random_state(spec, rng);
      PrimalDualState b = random_state(spec, rng);
      b.x = a.x;  // dual block only
      PrimalDualState mid = a;
      mid.lambda = 0.5 * (a.lambda + b.lambda);
      mid.nu = 0.5 * (a.nu + b.nu);
      mid.w = 0.5 * (a.w + b.w);
      const double avg =
          0.5 * (pal_value(spec, a, mu) + pal_value(spec, b, mu));
      CHECK(pal_value(spec, mid, mu) >= avg - 1e-10);
    }
  }
}

TEST_CASE("strong concavity in w with the exact block curvature") {
  // With no regularizer the w term is exactly -(mu/2)|w|^2, so the modulus
  // is mu; a quadratic regularizer with weight c relaxes it to mu/(1+mu c).
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);

  auto check_modulus = [&](const ProblemSpec& spec, SmoothingParam mu,
                           double sigma) {
    for (int trial = 0; trial < 40; ++trial) {
      PrimalDualState a = random_state(spec, rng);
      PrimalDualState b = a;
      for (Index i = 0; i < b.w.size(); ++i) b.w[i] = unif(rng);
      PrimalDualState mid = a;
      mid.w = 0.5 * (a.w + b.w);
      const double gap =
          pal_value(spec, mid, mu) -
          0.5 * (pal_value(spec, a, mu) + pal_value(spec, b, mu));
      CHECK(gap >= 0.125 * sigma * (a.w - b.w).squaredNorm() - 1e-10);
    }
  };

  const SmoothingParam mu(0.4);
  check_modulus(find_problem("ineq-qp")->make(), mu, mu.value());

  const double c = 3.0;
  const ProblemSpec quad(2, sum_of_squares(), {}, {}, Matrix::Identity(2, 2),
                         ProxFunction::quadratic(2, c));
  check_modulus(quad, mu, mu.value() / (1.0 + mu.value() * c));
}
