#include "palflow/registry.hpp"

#include <algorithm>
#include <cmath>

#include "palflow/polynomial.hpp"

namespace palflow {

namespace {

PolyTerm term(double c, std::vector<int> e) { return PolyTerm{c, std::move(e)}; }

// min |x - (1,2,3)|^2  s.t.  x1 + x2 + x3 = 1.
ProblemSpec make_eq_qp() {
  const Index n = 3;
  Polynomial f(n, {term(1, {2, 0, 0}), term(1, {0, 2, 0}), term(1, {0, 0, 2}),
                   term(-2, {1, 0, 0}), term(-4, {0, 1, 0}),
                   term(-6, {0, 0, 1}), term(14, {0, 0, 0})});
  Polynomial h(n, {term(1, {1, 0, 0}), term(1, {0, 1, 0}), term(1, {0, 0, 1}),
                   term(-1, {0, 0, 0})});
  ProblemOptions opts;
  opts.strong_convexity_alpha = 2.0;
  opts.known_optimum = (Vector(3) << -2.0 / 3, 1.0 / 3, 4.0 / 3).finished();
  return ProblemSpec(n, f.oracle(), {}, {h.oracle()}, Matrix::Identity(n, n),
                     ProxFunction::zero(n), opts);
}

// min |x - (2,0,0)|^2  s.t.  |x|^2 <= 1,  x1 + x2 + x3 = 0.
ProblemSpec make_ineq_qp() {
  const Index n = 3;
  Polynomial f(n, {term(1, {2, 0, 0}), term(1, {0, 2, 0}), term(1, {0, 0, 2}),
                   term(-4, {1, 0, 0}), term(4, {0, 0, 0})});
  Polynomial g(n, {term(1, {2, 0, 0}), term(1, {0, 2, 0}), term(1, {0, 0, 2}),
                   term(-1, {0, 0, 0})});
  Polynomial h(n, {term(1, {1, 0, 0}), term(1, {0, 1, 0}), term(1, {0, 0, 1})});
  ProblemOptions opts;
  opts.strong_convexity_alpha = 2.0;
  const double s = std::sqrt(6.0);
  opts.known_optimum = (Vector(3) << 2.0 / s, -1.0 / s, -1.0 / s).finished();
  return ProblemSpec(n, f.oracle(), {g.oracle()}, {h.oracle()},
                     Matrix::Identity(n, n), ProxFunction::zero(n), opts);
}

// Same feasible set, but the objective (x1 - 1)^2 is only convex.
ProblemSpec make_convex_qp() {
  const Index n = 3;
  Polynomial f(n, {term(1, {2, 0, 0}), term(-2, {1, 0, 0}), term(1, {0, 0, 0})});
  Polynomial g(n, {term(1, {2, 0, 0}), term(1, {0, 2, 0}), term(1, {0, 0, 2}),
                   term(-1, {0, 0, 0})});
  Polynomial h(n, {term(1, {1, 0, 0}), term(1, {0, 1, 0}), term(1, {0, 0, 1})});
  ProblemOptions opts;
  const double s = std::sqrt(6.0);
  opts.known_optimum = (Vector(3) << s / 3, -s / 6, -s / 6).finished();
  return ProblemSpec(n, f.oracle(), {g.oracle()}, {h.oracle()},
                     Matrix::Identity(n, n), ProxFunction::zero(n), opts);
}

// min 1/2 sum a_i (x_i - c_i)^2 + |x|_1, separable weights chosen so every
// soft-threshold case (shrink +, shrink -, pinned at 0) shows up.
ProblemSpec make_lasso_toy() {
  const Index n = 4;
  const double a[4] = {1.0, 2.0, 4.0, 0.5};
  const double c[4] = {2.0, -1.0, 0.1, 3.0};
  std::vector<PolyTerm> terms;
  for (int i = 0; i < 4; ++i) {
    std::vector<int> sq(4, 0), lin(4, 0);
    sq[i] = 2;
    lin[i] = 1;
    terms.push_back(term(0.5 * a[i], sq));
    terms.push_back(term(-a[i] * c[i], lin));
    terms.push_back(term(0.5 * a[i] * c[i] * c[i], {0, 0, 0, 0}));
  }
  Polynomial f(n, terms);
  ProblemOptions opts;
  opts.strong_convexity_alpha = 0.5;
  opts.known_optimum = (Vector(4) << 1.0, -0.5, 0.0, 1.0).finished();
  return ProblemSpec(n, f.oracle(), {}, {}, Matrix::Identity(n, n),
                     ProxFunction::l1_norm(n), opts);
}

// The four-variable constrained benchmark the networked fixture splits up,
// solved as a single problem.
ProblemSpec make_rosen_suzuki_central() {
  const Index n = 4;
  Polynomial f(n, {term(1, {2, 0, 0, 0}), term(1, {0, 2, 0, 0}),
                   term(2, {0, 0, 2, 0}), term(1, {0, 0, 0, 2}),
                   term(-5, {1, 0, 0, 0}), term(-5, {0, 1, 0, 0}),
                   term(-21, {0, 0, 1, 0}), term(7, {0, 0, 0, 1})});
  Polynomial g1(n, {term(1, {2, 0, 0, 0}), term(1, {0, 2, 0, 0}),
                    term(1, {0, 0, 2, 0}), term(1, {0, 0, 0, 2}),
                    term(1, {1, 0, 0, 0}), term(-1, {0, 1, 0, 0}),
                    term(1, {0, 0, 1, 0}), term(-1, {0, 0, 0, 1}),
                    term(-8, {0, 0, 0, 0})});
  Polynomial g2(n, {term(1, {2, 0, 0, 0}), term(2, {0, 2, 0, 0}),
                    term(1, {0, 0, 2, 0}), term(2, {0, 0, 0, 2}),
                    term(-1, {1, 0, 0, 0}), term(-1, {0, 0, 0, 1}),
                    term(-10, {0, 0, 0, 0})});
  Polynomial h1(n, {term(2, {2, 0, 0, 0}), term(1, {0, 2, 0, 0}),
                    term(1, {0, 0, 2, 0}), term(2, {1, 0, 0, 0}),
                    term(-1, {0, 1, 0, 0}), term(-1, {0, 0, 0, 1}),
                    term(-5, {0, 0, 0, 0})});
  ProblemOptions opts;
  opts.strong_convexity_alpha = 2.0;
  opts.known_optimum = (Vector(4) << 0.0, 1.0, 2.0, -1.0).finished();
  return ProblemSpec(n, f.oracle(), {g1.oracle(), g2.oracle()}, {h1.oracle()},
                     Matrix::Identity(n, n), ProxFunction::zero(n), opts);
}

std::vector<RegistryEntry> build_registry() {
  std::vector<RegistryEntry> reg;

  {
    RegistryEntry e;
    e.name = "eq-qp";
    e.summary = "strongly convex QP, one affine equality";
    e.dim = 3;
    e.eq = 1;
    e.phi = "zero";
    e.optimum = (Vector(3) << -2.0 / 3, 1.0 / 3, 4.0 / 3).finished();
    e.make = make_eq_qp;
    reg.push_back(std::move(e));
  }
  {
    RegistryEntry e;
    e.name = "ineq-qp";
    e.summary = "strongly convex QP, ball inequality + affine equality";
    e.dim = 3;
    e.ineq = 1;
    e.eq = 1;
    e.phi = "zero";
    const double s = std::sqrt(6.0);
    e.optimum = (Vector(3) << 2.0 / s, -1.0 / s, -1.0 / s).finished();
    e.make = make_ineq_qp;
    reg.push_back(std::move(e));
  }
  {
    RegistryEntry e;
    e.name = "convex-qp";
    e.summary = "merely convex objective on the same feasible set";
    e.dim = 3;
    e.ineq = 1;
    e.eq = 1;
    e.phi = "zero";
    const double s = std::sqrt(6.0);
    e.optimum = (Vector(3) << s / 3, -s / 6, -s / 6).finished();
    e.default_t_end = 500.0;
    e.make = make_convex_qp;
    reg.push_back(std::move(e));
  }
  {
    RegistryEntry e;
    e.name = "lasso-toy";
    e.summary = "separable quadratic + l1, every shrink case active";
    e.dim = 4;
    e.phi = "l1";
    e.optimum = (Vector(4) << 1.0, -0.5, 0.0, 1.0).finished();
    // the shrunk coordinate crawls into the kink; the default horizon of
    // 100 leaves it a factor of a few short of the stopping tolerance
    e.default_t_end = 200.0;
    e.make = make_lasso_toy;
    reg.push_back(std::move(e));
  }
  {
    RegistryEntry e;
    e.name = "rosen-suzuki-central";
    e.summary = "classic 4-variable constrained benchmark, single problem";
    e.dim = 4;
    e.ineq = 2;
    e.eq = 1;
    e.phi = "zero";
    e.optimum = (Vector(4) << 0.0, 1.0, 2.0, -1.0).finished();
    e.make = make_rosen_suzuki_central;
    reg.push_back(std::move(e));
  }
  {
    RegistryEntry e;
    e.name = "rosen-suzuki-distributed";
    e.summary = "the same benchmark split across 5 agents on a cycle+chord";
    e.dim = 4;
    e.nodes = 5;
    e.ineq = 2;
    e.eq = 1;
    e.phi = "indicator_zero";
    e.optimum = (Vector(4) << 0.0, 1.0, 2.0, -1.0).finished();
    e.default_t_end = 300.0;
    e.make_network = [] { return rosen_suzuki_network(); };
    reg.push_back(std::move(e));
  }
  std::sort(reg.begin(), reg.end(),
            [](const RegistryEntry& a, const RegistryEntry& b) {
              return a.name < b.name;
            });
  return reg;
}

}  // namespace

const std::vector<RegistryEntry>& problem_registry() {
  static const std::vector<RegistryEntry> reg = build_registry();
  return reg;
}

const RegistryEntry* find_problem(const std::string& name) {
  for (const auto& e : problem_registry())
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace palflow
