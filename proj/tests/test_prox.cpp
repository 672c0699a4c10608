#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "palflow/errors.hpp"
#include "palflow/prox.hpp"

using namespace palflow;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double prox_objective(const ProxFunction& phi, const Vector& z, const Vector& v,
                      double mu) {
  return phi.value(z) + (z - v).squaredNorm() / (2.0 * mu);
}

struct RandomInstance {
  ProxFunction phi;
  Vector v;
  double mu;
};

// Draw an instance for one kind. Points near a curvature jump of the
// envelope are resampled so the central-difference check below stays in its
// O(h^2) regime; the gradient itself is fine there, the probe is not.
RandomInstance draw(ProxKind kind, std::mt19937& rng) {
  std::uniform_int_distribution<int> dim_d(1, 6);
  std::uniform_real_distribution<double> val_d(-3.0, 3.0);
  std::uniform_real_distribution<double> mu_d(0.05, 2.0);
  const Index n = dim_d(rng);
  const double mu = mu_d(rng);

  auto make_phi = [&]() -> ProxFunction {
    switch (kind) {
      case ProxKind::L1Norm: return ProxFunction::l1_norm(n);
      case ProxKind::IndicatorZero: return ProxFunction::indicator_zero(n);
      case ProxKind::IndicatorBox: {
        Vector lo(n), hi(n);
        for (Index i = 0; i < n; ++i) {
          const double a = val_d(rng), b = val_d(rng);
          lo[i] = std::min(a, b) - 0.1;
          hi[i] = std::max(a, b) + 0.1;
        }
        return ProxFunction::indicator_box(lo, hi);
      }
      case ProxKind::Quadratic:
        return ProxFunction::quadratic(n, std::uniform_real_distribution<double>(
                                              0.1, 5.0)(rng));
      case ProxKind::Zero: return ProxFunction::zero(n);
    }
    return ProxFunction::zero(n);
  };
  ProxFunction phi = make_phi();

  auto near_kink = [&](const Vector& v) {
    if (kind == ProxKind::L1Norm) {
      for (Index i = 0; i < n; ++i)
        if (std::abs(std::abs(v[i]) - mu) < 1e-4) return true;
    }
    if (kind == ProxKind::IndicatorBox) {
      for (Index i = 0; i < n; ++i)
        if (std::abs(v[i] - phi.lower()[i]) < 1e-4 ||
            std::abs(v[i] - phi.upper()[i]) < 1e-4)
          return true;
    }
    return false;
  };

  Vector v(n);
  do {
    for (Index i = 0; i < n; ++i) v[i] = val_d(rng);
  } while (near_kink(v));
  return RandomInstance{std::move(phi), std::move(v), mu};
}

Vector fd_moreau_grad(const ProxFunction& phi, const Vector& v, double mu) {
  Vector g(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(v[i]));
    Vector vp = v, vm = v;
    vp[i] += h;
    vm[i] -= h;
    g[i] = (phi.moreau_value(vp, SmoothingParam(mu)) -
            phi.moreau_value(vm, SmoothingParam(mu))) /
           (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("soft threshold hand values") {
  auto phi = ProxFunction::l1_norm(1);
  CHECK(phi.prox(vec({2.0}), SmoothingParam(0.5))[0] ==
        doctest::Approx(1.5).epsilon(1e-12));
  CHECK(phi.prox(vec({-0.3}), SmoothingParam(0.5))[0] ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("projection onto the origin") {
  auto phi = ProxFunction::indicator_zero(2);
  const Vector p = phi.prox(vec({1.0, -4.0}), SmoothingParam(0.7));
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.0);
}

TEST_CASE("envelope hand values") {
  auto l1 = ProxFunction::l1_norm(1);
  CHECK(l1.moreau_value(vec({0.5}), SmoothingParam(1.0)) ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(l1.moreau_value(vec({2.0}), SmoothingParam(1.0)) ==
        doctest::Approx(1.5).epsilon(1e-12));
  auto zero_pt = ProxFunction::indicator_zero(1);
  CHECK(zero_pt.moreau_value(vec({3.0}), SmoothingParam(1.0)) ==
        doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("envelope gradient hand values") {
  auto l1 = ProxFunction::l1_norm(1);
  CHECK(l1.moreau_grad(vec({2.0}), SmoothingParam(1.0))[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l1.moreau_grad(vec({0.0}), SmoothingParam(1.0))[0] ==
        doctest::Approx(0.0).epsilon(1e-12));
  auto zero_pt = ProxFunction::indicator_zero(2);
  const Vector g = zero_pt.moreau_grad(vec({4.0, -2.0}), SmoothingParam(2.0));
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("box prox clamps componentwise") {
  auto box = ProxFunction::indicator_box(vec({-1.0, 0.0}), vec({1.0, 2.0}));
  const Vector p = box.prox(vec({3.0, -5.0}), SmoothingParam(1.0));
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
}

TEST_CASE("quadratic prox shrinks toward the origin") {
  auto q = ProxFunction::quadratic(1, 3.0);
  // argmin_z 3 z^2 / ... with c=3, mu=0.5: v / (1 + mu c) = 2 / 2.5
  CHECK(q.prox(vec({2.0}), SmoothingParam(0.5))[0] ==
        doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(SmoothingParam(0.0), ParameterError);
  CHECK_THROWS_AS(SmoothingParam(-1.0), ParameterError);
  CHECK_THROWS_AS(SmoothingParam(std::nan("")), ParameterError);
  CHECK_THROWS_AS(ProxFunction::l1_norm(0), ParameterError);
  CHECK_THROWS_AS(ProxFunction::quadratic(2, -1.0), ParameterError);
  CHECK_THROWS_AS(ProxFunction::indicator_box(vec({1.0}), vec({0.0})),
                  ParameterError);
  CHECK_THROWS_AS(ProxFunction::indicator_box(vec({0.0, 0.0}), vec({1.0})),
                  DimensionError);
  auto phi = ProxFunction::l1_norm(2);
  CHECK_THROWS_AS(phi.prox(vec({1.0}), SmoothingParam(1.0)), DimensionError);
}

TEST_CASE("randomized prox properties per kind") {
  const ProxKind kinds[] = {ProxKind::L1Norm, ProxKind::IndicatorZero,
                            ProxKind::IndicatorBox, ProxKind::Quadratic,
                            ProxKind::Zero};
  std::mt19937 rng(20260822);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (ProxKind kind : kinds) {
    CAPTURE(prox_kind_name(kind));
    for (int it = 0; it < 300; ++it) {
      RandomInstance inst = draw(kind, rng);
      const SmoothingParam mu(inst.mu);
      const Vector p = inst.phi.prox(inst.v, mu);

      // Optimality of the prox point against feasible perturbations.
      const double base = prox_objective(inst.phi, p, inst.v, inst.mu);
      for (int k = 0; k < 10; ++k) {
        Vector z = p;
        for (Index i = 0; i < z.size(); ++i)
          z[i] += 0.1 * gauss(rng) * (k % 2 ? 1.0 : 1e-3);
        if (kind == ProxKind::IndicatorZero) z.setZero();
        if (kind == ProxKind::IndicatorBox)
          z = z.cwiseMax(inst.phi.lower()).cwiseMin(inst.phi.upper());
        CHECK(prox_objective(inst.phi, z, inst.v, inst.mu) >= base - 1e-10);
      }

      // Nonexpansiveness.
      Vector u(inst.v.size());
      for (Index i = 0; i < u.size(); ++i) u[i] = inst.v[i] + gauss(rng);
      CHECK((inst.phi.prox(u, mu) - p).norm() <=
            (u - inst.v).norm() * (1.0 + 1e-12) + 1e-14);

      // The envelope lower-bounds the function and satisfies its defining
      // identity at the prox point.
      const double env = inst.phi.moreau_value(inst.v, mu);
      const double direct = inst.phi.value(inst.v);
      if (std::isfinite(direct)) CHECK(env <= direct + 1e-10);
      CHECK(env == doctest::Approx(inst.phi.value(p) +
                                   (inst.v - p).squaredNorm() / (2 * inst.mu))
                       .epsilon(1e-10));

      // Gradient against central differences.
      const Vector g = inst.phi.moreau_grad(inst.v, mu);
      const Vector fd = fd_moreau_grad(inst.phi, inst.v, inst.mu);
      const double rel =
          (g - fd).norm() / std::max(1.0, fd.norm());
      CHECK(rel <= 1e-6);

      // Gradient's closed form through the prox point.
      CHECK((g - (inst.v - p) / inst.mu).norm() <= 1e-12);
    }
  }
}
