#include "palflow/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "palflow/polynomial.hpp"

namespace palflow {

Graph::Graph(Index node_count, std::vector<std::pair<Index, Index>> edges)
    : nodes_(node_count), edges_(std::move(edges)) {
  if (nodes_ <= 0) throw ParameterError("graph needs at least one node");
  for (auto& [a, b] : edges_) {
    if (a < 0 || b < 0 || a >= nodes_ || b >= nodes_)
      throw ParameterError("edge endpoint out of range");
    if (a == b) throw ParameterError("self-loops are not allowed");
    if (a > b) std::swap(a, b);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw ParameterError("duplicate edge");

  adjacency_.resize(nodes_);
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());

  // The consensus argument needs a connected graph; reject anything else.
  std::vector<bool> seen(nodes_, false);
  std::vector<Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    for (Index u : adjacency_[v])
      if (!seen[u]) {
        seen[u] = true;
        stack.push_back(u);
      }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw ParameterError("graph is not connected");
}

const std::vector<Index>& Graph::neighbors(Index node) const {
  if (node < 0 || node >= nodes_)
    throw ParameterError("node index out of range");
  return adjacency_[node];
}

Matrix incidence_matrix(const Graph& graph) {
  Matrix T = Matrix::Zero(graph.edge_count(), graph.node_count());
  for (Index e = 0; e < graph.edge_count(); ++e) {
    const auto& [lo, hi] = graph.edges()[e];
    T(e, lo) = 1.0;
    T(e, hi) = -1.0;
  }
  return T;
}

SmoothOracle zero_oracle(Index n) {
  SmoothOracle o;
  o.value = [](const Vector&) { return 0.0; };
  o.grad = [n](const Vector&) { return Vector::Zero(n); };
  return o;
}

NetworkSpec::NetworkSpec(Index decision_dim, Graph graph,
                         std::vector<LocalProblem> locals)
    : dim_(decision_dim), graph_(std::move(graph)), locals_(std::move(locals)) {
  if (dim_ <= 0) throw ParameterError("decision dimension must be positive");
  if (static_cast<Index>(locals_.size()) != graph_.node_count())
    throw DimensionError("need exactly one local problem per node");
  const Vector probe = Vector::Zero(dim_);
  for (const auto& local : locals_) {
    if (!local.f.value || !local.f.grad)
      throw ParameterError("every node needs an objective oracle");
    if (local.f.grad(probe).size() != dim_)
      throw DimensionError("objective gradient has wrong size");
    for (const auto& gi : local.g) {
      if (!gi.value || !gi.grad)
        throw ParameterError("inequality oracle is missing a callable");
      if (gi.grad(probe).size() != dim_)
        throw DimensionError("inequality gradient has wrong size");
    }
    for (const auto& hi : local.h) {
      if (!hi.value || !hi.grad)
        throw ParameterError("equality oracle is missing a callable");
      if (hi.grad(probe).size() != dim_)
        throw DimensionError("equality gradient has wrong size");
    }
    total_ineq_ += static_cast<Index>(local.g.size());
    total_eq_ += static_cast<Index>(local.h.size());
  }
}

const LocalProblem& NetworkSpec::local(Index node) const {
  if (node < 0 || node >= node_count())
    throw ParameterError("node index out of range");
  return locals_[node];
}

Index NetworkSpec::ineq_count(Index node) const {
  return static_cast<Index>(local(node).g.size());
}

Index NetworkSpec::eq_count(Index node) const {
  return static_cast<Index>(local(node).h.size());
}

double NetworkField::norm() const {
  double sq = 0.0;
  for (const auto& v : dx) sq += v.squaredNorm();
  for (const auto& v : dlambda) sq += v.squaredNorm();
  for (const auto& v : dnu) sq += v.squaredNorm();
  for (const auto& v : dw) sq += v.squaredNorm();
  return std::sqrt(sq);
}

namespace {

void check_state_dims(const NetworkSpec& net, const NetworkState& state) {
  const auto nodes = static_cast<size_t>(net.node_count());
  if (state.x.size() != nodes || state.lambda.size() != nodes ||
      state.nu.size() != nodes || state.w.size() != nodes)
    throw DimensionError("network state has wrong node count");
  for (Index i = 0; i < net.node_count(); ++i) {
    if (state.x[i].size() != net.decision_dim() ||
        state.w[i].size() != net.decision_dim())
      throw DimensionError("node state has wrong decision dimension");
    if (state.lambda[i].size() != net.ineq_count(i) ||
        state.nu[i].size() != net.eq_count(i))
      throw DimensionError("node multiplier block has wrong size");
  }
}

}  // namespace

NetworkField distributed_field(const NetworkSpec& net, const NetworkState& state,
                               const DynamicsParams& params) {
  check_state_dims(net, state);
  if (params.eta().size() != net.total_ineq())
    throw DimensionError("eta length must match the total inequality count");
  const double mu = params.mu().value();

  NetworkField out;
  const Index nodes = net.node_count();
  out.dx.resize(nodes);
  out.dlambda.resize(nodes);
  out.dnu.resize(nodes);
  out.dw.resize(nodes);

  Index eta_offset = 0;
  for (Index i = 0; i < nodes; ++i) {
    Vector diffusion = Vector::Zero(net.decision_dim());
    for (Index j : net.graph().neighbors(i)) diffusion += state.x[j] - state.x[i];

    const LocalProblem& local = net.local(i);
    Vector dx = diffusion / mu - local.f.grad(state.x[i]) - state.w[i];

    Vector dlambda(net.ineq_count(i));
    for (Index k = 0; k < net.ineq_count(i); ++k) {
      const double lam = state.lambda[i][k];
      const double eta = params.eta()[eta_offset + k];
      const double gv = local.g[k].value(state.x[i]);
      dx -= lam * local.g[k].grad(state.x[i]);
      dlambda[k] = lam / (1.0 + eta * lam) * gv;
    }
    eta_offset += net.ineq_count(i);

    Vector dnu(net.eq_count(i));
    for (Index k = 0; k < net.eq_count(i); ++k) {
      dx -= state.nu[i][k] * local.h[k].grad(state.x[i]);
      dnu[k] = local.h[k].value(state.x[i]);
    }

    out.dx[i] = std::move(dx);
    out.dlambda[i] = std::move(dlambda);
    out.dnu[i] = std::move(dnu);
    out.dw[i] = -diffusion;
  }
  return out;
}

double consensus_error(const NetworkState& state) {
  double worst = 0.0;
  for (size_t i = 0; i < state.x.size(); ++i)
    for (size_t j = i + 1; j < state.x.size(); ++j)
      worst = std::max(worst, (state.x[i] - state.x[j]).norm());
  return worst;
}

NetworkProblem rosen_suzuki_network(WInit w_init) {
  const Index n = 4;
  auto term = [](double c, int e1, int e2, int e3, int e4) {
    return PolyTerm{c, {e1, e2, e3, e4}};
  };
  const Polynomial f1(n, {term(1, 2, 0, 0, 0), term(1, 0, 2, 0, 0)});
  const Polynomial f2(n, {term(2, 0, 0, 2, 0), term(1, 0, 0, 0, 2)});
  const Polynomial f3(n, {term(-5, 1, 0, 0, 0), term(-5, 0, 1, 0, 0)});
  const Polynomial f4(n, {term(-21, 0, 0, 1, 0)});
  const Polynomial f5(n, {term(7, 0, 0, 0, 1)});
  const Polynomial g1(n, {term(1, 2, 0, 0, 0), term(1, 0, 2, 0, 0),
                          term(1, 0, 0, 2, 0), term(1, 0, 0, 0, 2),
                          term(1, 1, 0, 0, 0), term(-1, 0, 1, 0, 0),
                          term(1, 0, 0, 1, 0), term(-1, 0, 0, 0, 1),
                          term(-8, 0, 0, 0, 0)});
  const Polynomial g2(n, {term(1, 2, 0, 0, 0), term(2, 0, 2, 0, 0),
                          term(1, 0, 0, 2, 0), term(2, 0, 0, 0, 2),
                          term(-1, 1, 0, 0, 0), term(-1, 0, 0, 0, 1),
                          term(-10, 0, 0, 0, 0)});
  const Polynomial h1(n, {term(2, 2, 0, 0, 0), term(1, 0, 2, 0, 0),
                          term(1, 0, 0, 2, 0), term(2, 1, 0, 0, 0),
                          term(-1, 0, 1, 0, 0), term(-1, 0, 0, 0, 1),
                          term(-5, 0, 0, 0, 0)});

  Graph graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 2}});

  std::vector<LocalProblem> locals(5);
  locals[0].f = f1.oracle();
  locals[0].g = {g1.oracle()};
  locals[0].h = {h1.oracle()};
  locals[1].f = f2.oracle();
  locals[1].g = {g2.oracle()};
  locals[2].f = f3.oracle();
  locals[3].f = f4.oracle();
  locals[4].f = f5.oracle();

  NetworkSpec spec(n, graph, std::move(locals));

  NetworkState init;
  init.x = {(Vector(4) << 3, 4, -3, 4).finished(),
            (Vector(4) << 1, -2, 4, 2).finished(),
            (Vector(4) << -3, -4, 3, 3).finished(),
            (Vector(4) << 3, 1, 2, -3).finished(),
            (Vector(4) << 4, -2, -4, 1).finished()};
  init.lambda = {(Vector(1) << 3).finished(), (Vector(1) << 3).finished(),
                 Vector(0), Vector(0), Vector(0)};
  init.nu = {(Vector(1) << 3).finished(), Vector(0), Vector(0), Vector(0),
             Vector(0)};

  const Vector seed = (Vector(4) << 1, 2, 3, 4).finished();
  init.w.resize(5);
  if (w_init == WInit::PerNodeLiteral) {
    for (auto& w : init.w) w = seed;
  } else {
    // Push the per-edge seed through the incidence transpose; the node sum
    // of the result is zero, the class the flow's conservation law keeps.
    const Matrix T = incidence_matrix(spec.graph());
    const Vector colsum = T.colwise().sum();
    for (Index i = 0; i < 5; ++i) init.w[i] = colsum[i] * seed;
  }
  return NetworkProblem{std::move(spec), std::move(init)};
}

ProblemSpec stack_network(const NetworkSpec& net) {
  const Index d = net.decision_dim();
  const Index nodes = net.node_count();
  const Index big_n = nodes * d;

  std::vector<SmoothOracle> fs;
  fs.reserve(nodes);
  for (Index i = 0; i < nodes; ++i) fs.push_back(net.local(i).f);

  SmoothOracle f;
  f.value = [fs, d](const Vector& x) {
    double out = 0.0;
    for (size_t i = 0; i < fs.size(); ++i)
      out += fs[i].value(x.segment(static_cast<Index>(i) * d, d));
    return out;
  };
  f.grad = [fs, d](const Vector& x) {
    Vector out(x.size());
    for (size_t i = 0; i < fs.size(); ++i)
      out.segment(static_cast<Index>(i) * d, d) =
          fs[i].grad(x.segment(static_cast<Index>(i) * d, d));
    return out;
  };

  auto lift = [d, big_n](SmoothOracle o, Index node) {
    SmoothOracle out;
    out.value = [o, node, d](const Vector& x) {
      return o.value(x.segment(node * d, d));
    };
    out.grad = [o, node, d, big_n](const Vector& x) {
      Vector g = Vector::Zero(big_n);
      g.segment(node * d, d) = o.grad(x.segment(node * d, d));
      return g;
    };
    return out;
  };

  std::vector<SmoothOracle> g, h;
  for (Index i = 0; i < nodes; ++i) {
    for (const auto& gi : net.local(i).g) g.push_back(lift(gi, i));
    for (const auto& hi : net.local(i).h) h.push_back(lift(hi, i));
  }

  const Matrix T_edge = incidence_matrix(net.graph());
  Matrix T = Matrix::Zero(T_edge.rows() * d, big_n);
  for (Index e = 0; e < T_edge.rows(); ++e)
    for (Index i = 0; i < nodes; ++i)
      if (T_edge(e, i) != 0.0)
        T.block(e * d, i * d, d, d) =
            T_edge(e, i) * Matrix::Identity(d, d);

  ProblemOptions opts;
  opts.rank_deficient_ok = true;  // incidence has rank (nodes - 1)
  return ProblemSpec(big_n, f, g, h, T,
                     ProxFunction::indicator_zero(T.rows()), opts);
}

ProblemSpec aggregate_problem(const NetworkSpec& net) {
  const Index d = net.decision_dim();
  const Index nodes = net.node_count();

  std::vector<SmoothOracle> fs;
  fs.reserve(nodes);
  for (Index i = 0; i < nodes; ++i) fs.push_back(net.local(i).f);

  SmoothOracle f;
  f.value = [fs](const Vector& x) {
    double out = 0.0;
    for (const auto& fi : fs) out += fi.value(x);
    return out;
  };
  f.grad = [fs, d](const Vector& x) {
    Vector out = Vector::Zero(d);
    for (const auto& fi : fs) out += fi.grad(x);
    return out;
  };

  std::vector<SmoothOracle> g, h;
  for (Index i = 0; i < nodes; ++i) {
    for (const auto& gi : net.local(i).g) g.push_back(gi);
    for (const auto& hi : net.local(i).h) h.push_back(hi);
  }
  return ProblemSpec(d, f, g, h, Matrix::Identity(d, d),
                     ProxFunction::zero(d), ProblemOptions{});
}

KktResidual network_kkt_components(const NetworkSpec& net,
                                   const NetworkState& state) {
  check_state_dims(net, state);
  const Index d = net.decision_dim();
  Vector mean = Vector::Zero(d);
  for (const auto& xi : state.x) mean += xi;
  mean /= static_cast<double>(net.node_count());

  Vector stationarity = Vector::Zero(d);
  double primal_ineq_sq = 0.0, primal_eq_sq = 0.0, comp_sq = 0.0;
  for (Index i = 0; i < net.node_count(); ++i) {
    const LocalProblem& local = net.local(i);
    stationarity += local.f.grad(mean);
    for (Index k = 0; k < net.ineq_count(i); ++k) {
      const double gv = local.g[k].value(mean);
      const double lam = state.lambda[i][k];
      stationarity += lam * local.g[k].grad(mean);
      primal_ineq_sq += std::max(gv, 0.0) * std::max(gv, 0.0);
      comp_sq += (lam * gv) * (lam * gv);
    }
    for (Index k = 0; k < net.eq_count(i); ++k) {
      const double hv = local.h[k].value(mean);
      stationarity += state.nu[i][k] * local.h[k].grad(mean);
      primal_eq_sq += hv * hv;
    }
  }
  KktResidual res;
  res.stationarity = stationarity.norm();
  res.primal_ineq = std::sqrt(primal_ineq_sq);
  res.primal_eq = std::sqrt(primal_eq_sq);
  res.complementarity = std::sqrt(comp_sq);
  res.total = std::max({res.stationarity, res.primal_ineq, res.primal_eq,
                        res.complementarity});
  return res;
}

double network_kkt_total(const NetworkSpec& net, const NetworkState& state) {
  return std::max(network_kkt_components(net, state).total,
                  consensus_error(state));
}

namespace {

struct NetworkLayout {
  Index dim, nodes;
  std::vector<Index> lambda_offsets, nu_offsets;  // into their blocks
  Index x_size, lambda_size, nu_size, w_size;

  explicit NetworkLayout(const NetworkSpec& net)
      : dim(net.decision_dim()), nodes(net.node_count()) {
    Index lo = 0, no = 0;
    for (Index i = 0; i < nodes; ++i) {
      lambda_offsets.push_back(lo);
      nu_offsets.push_back(no);
      lo += net.ineq_count(i);
      no += net.eq_count(i);
    }
    x_size = nodes * dim;
    lambda_size = lo;
    nu_size = no;
    w_size = nodes * dim;
  }

  Index total() const { return x_size + lambda_size + nu_size + w_size; }

  Vector pack(const NetworkState& s) const {
    Vector y(total());
    Index at = 0;
    for (const auto& v : s.x) {
      y.segment(at, v.size()) = v;
      at += v.size();
    }
    for (const auto& v : s.lambda) {
      y.segment(at, v.size()) = v;
      at += v.size();
    }
    for (const auto& v : s.nu) {
      y.segment(at, v.size()) = v;
      at += v.size();
    }
    for (const auto& v : s.w) {
      y.segment(at, v.size()) = v;
      at += v.size();
    }
    return y;
  }

  NetworkState unpack(const NetworkSpec& net, const Vector& y, double t) const {
    NetworkState s;
    s.t = t;
    Index at = 0;
    for (Index i = 0; i < nodes; ++i, at += dim) s.x.push_back(y.segment(at, dim));
    for (Index i = 0; i < nodes; ++i) {
      s.lambda.push_back(y.segment(at, net.ineq_count(i)));
      at += net.ineq_count(i);
    }
    for (Index i = 0; i < nodes; ++i) {
      s.nu.push_back(y.segment(at, net.eq_count(i)));
      at += net.eq_count(i);
    }
    for (Index i = 0; i < nodes; ++i, at += dim) s.w.push_back(y.segment(at, dim));
    return s;
  }

  Vector pack_field(const NetworkField& f) const {
    NetworkState tmp;
    tmp.x = f.dx;
    tmp.lambda = f.dlambda;
    tmp.nu = f.dnu;
    tmp.w = f.dw;
    return pack(tmp);
  }
};

detail::FlatSystem make_network_system(const NetworkSpec& net,
                                       const NetworkLayout& layout,
                                       const DynamicsParams& params) {
  detail::FlatSystem sys;
  sys.field = [&net, &layout, params](const Vector& y, Vector& dy) {
    const NetworkState s = layout.unpack(net, y, 0.0);
    dy = layout.pack_field(distributed_field(net, s, params));
  };
  for (Index k = 0; k < layout.lambda_size; ++k)
    sys.multiplier_indices.push_back(layout.x_size + k);
  return sys;
}

void check_network_initial(const NetworkSpec& net, const NetworkState& state) {
  check_state_dims(net, state);
  for (const auto& lam : state.lambda)
    for (Index k = 0; k < lam.size(); ++k)
      if (!(lam[k] > 0.0))
        throw DomainError(
            "initial inequality multipliers must be strictly positive (the "
            "flow keeps them so)");
}

}  // namespace

NetworkTrajectory integrate_network(const NetworkSpec& net,
                                    const NetworkState& state0,
                                    const DynamicsParams& params,
                                    const IntegratorConfig& cfg) {
  check_network_initial(net, state0);
  const NetworkLayout layout(net);
  detail::FlatSystem sys = make_network_system(net, layout, params);
  detail::StepStats stats;
  Vector y = layout.pack(state0);
  double t = state0.t;

  NetworkTrajectory traj;
  detail::integrate_flat(
      sys, y, t, cfg,
      [&](double tc, const Vector& yc) {
        NetworkTrajectorySample smp;
        smp.t = tc;
        smp.state = layout.unpack(net, yc, tc);
        smp.consensus = consensus_error(smp.state);
        smp.kkt_total = network_kkt_total(net, smp.state);
        traj.samples.push_back(std::move(smp));
        return false;
      },
      stats);
  traj.steps = stats.steps;
  traj.clamp_events = stats.clamp_events;
  traj.min_multiplier = stats.min_multiplier;
  traj.nonfinite = stats.nonfinite;
  return traj;
}

NetworkSolution solve_network(const NetworkSpec& net, const NetworkState& state0,
                              const DynamicsParams& params,
                              const IntegratorConfig& cfg, double kkt_tol) {
  if (!(kkt_tol > 0.0)) throw ParameterError("kkt_tol must be > 0");
  const auto t_start = std::chrono::steady_clock::now();
  check_network_initial(net, state0);
  const NetworkLayout layout(net);
  detail::FlatSystem sys = make_network_system(net, layout, params);
  detail::StepStats stats;
  Vector y = layout.pack(state0);
  double t = state0.t;

  NetworkSolution sol;
  bool hit_tol = false;
  detail::integrate_flat(
      sys, y, t, cfg,
      [&](double tc, const Vector& yc) {
        NetworkTrajectorySample smp;
        smp.t = tc;
        smp.state = layout.unpack(net, yc, tc);
        smp.consensus = consensus_error(smp.state);
        smp.kkt_total = network_kkt_total(net, smp.state);
        sol.trajectory.samples.push_back(std::move(smp));
        if (sol.trajectory.samples.back().kkt_total <= kkt_tol) {
          hit_tol = true;
          return true;
        }
        return false;
      },
      stats);
  sol.trajectory.steps = stats.steps;
  sol.trajectory.clamp_events = stats.clamp_events;
  sol.trajectory.min_multiplier = stats.min_multiplier;
  sol.trajectory.nonfinite = stats.nonfinite;

  const NetworkTrajectorySample& last = sol.trajectory.samples.back();
  sol.final_state = last.state;
  sol.final_kkt = last.kkt_total;
  sol.final_consensus = last.consensus;
  Vector mean = Vector::Zero(net.decision_dim());
  for (const auto& xi : last.state.x) mean += xi;
  sol.x_star = mean / static_cast<double>(net.node_count());
  sol.converged = hit_tol;
  sol.stop_reason = stats.nonfinite ? StopReason::NonFinite
                    : hit_tol       ? StopReason::KktTol
                                    : StopReason::TimeLimit;
  sol.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return sol;
}

}  // namespace palflow
