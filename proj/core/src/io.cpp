#include "palflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "palflow/polynomial.hpp"

namespace palflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError("field '" + field + "': " + what);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

Index require_positive_int(const json& obj, const std::string& field) {
  if (!obj.contains(field)) fail(field, "missing");
  const json& v = obj.at(field);
  if (!v.is_number_integer() || v.get<long>() <= 0)
    fail(field, "expected a positive integer");
  return v.get<Index>();
}

std::vector<PolyTerm> parse_terms(const json& arr, Index n,
                                  const std::string& field) {
  if (!arr.is_array()) fail(field, "expected an array of terms");
  std::vector<PolyTerm> terms;
  for (size_t k = 0; k < arr.size(); ++k) {
    const std::string where = field + "[" + std::to_string(k) + "]";
    const json& t = arr[k];
    if (!t.is_object()) fail(where, "expected an object");
    reject_unknown_keys(t, where, {"coeff", "exponents"});
    if (!t.contains("coeff") || !t.at("coeff").is_number())
      fail(where + ".coeff", "expected a number");
    if (!t.contains("exponents") || !t.at("exponents").is_array())
      fail(where + ".exponents", "expected an array");
    const json& exps = t.at("exponents");
    if (static_cast<Index>(exps.size()) != n)
      fail(where + ".exponents",
           "expected " + std::to_string(n) + " entries");
    PolyTerm term;
    term.coeff = t.at("coeff").get<double>();
    for (const auto& e : exps) {
      if (!e.is_number_integer() || e.get<long>() < 0)
        fail(where + ".exponents", "expected nonnegative integers");
      term.exponents.push_back(e.get<int>());
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

SmoothOracle parse_polynomial(const json& arr, Index n,
                              const std::string& field) {
  return Polynomial(n, parse_terms(arr, n, field)).oracle();
}

std::vector<SmoothOracle> parse_polynomial_list(const json& obj, Index n,
                                                const std::string& field) {
  std::vector<SmoothOracle> out;
  if (!obj.contains(field)) return out;
  const json& arr = obj.at(field);
  if (!arr.is_array()) fail(field, "expected an array of term lists");
  for (size_t k = 0; k < arr.size(); ++k)
    out.push_back(
        parse_polynomial(arr[k], n, field + "[" + std::to_string(k) + "]"));
  return out;
}

Vector parse_vector(const json& arr, const std::string& field) {
  if (!arr.is_array()) fail(field, "expected an array of numbers");
  Vector v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(field, "expected an array of numbers");
    v[static_cast<Index>(i)] = arr[i].get<double>();
  }
  return v;
}

Matrix parse_T(const json& obj, Index n) {
  if (!obj.contains("T")) return Matrix::Identity(n, n);
  const json& t = obj.at("T");
  if (t.is_string()) {
    const auto s = t.get<std::string>();
    if (s == "identity") return Matrix::Identity(n, n);
    if (s == "incidence")
      fail("T", "\"incidence\" needs an \"agents\" section");
    fail("T", "expected \"identity\" or a row-major matrix");
  }
  if (!t.is_array() || t.empty()) fail("T", "expected a nonempty matrix");
  Matrix T(t.size(), n);
  for (size_t r = 0; r < t.size(); ++r) {
    const std::string where = "T[" + std::to_string(r) + "]";
    const Vector row = parse_vector(t[r], where);
    if (row.size() != n) fail(where, "expected " + std::to_string(n) + " entries");
    T.row(static_cast<Index>(r)) = row;
  }
  return T;
}

ProxFunction parse_phi(const json& obj, Index m) {
  if (!obj.contains("phi")) return ProxFunction::zero(m);
  const json& p = obj.at("phi");
  if (!p.is_object()) fail("phi", "expected an object");
  reject_unknown_keys(p, "phi", {"kind", "weight", "lower", "upper"});
  if (!p.contains("kind") || !p.at("kind").is_string())
    fail("phi.kind", "expected a string");
  const auto kind = p.at("kind").get<std::string>();
  auto no_extras = [&](std::initializer_list<const char*> keys) {
    reject_unknown_keys(p, "phi", keys);
  };
  if (kind == "zero") {
    no_extras({"kind"});
    return ProxFunction::zero(m);
  }
  if (kind == "l1") {
    no_extras({"kind"});
    return ProxFunction::l1_norm(m);
  }
  if (kind == "indicator_zero") {
    no_extras({"kind"});
    return ProxFunction::indicator_zero(m);
  }
  if (kind == "quadratic") {
    no_extras({"kind", "weight"});
    if (!p.contains("weight") || !p.at("weight").is_number())
      fail("phi.weight", "expected a number");
    return ProxFunction::quadratic(m, p.at("weight").get<double>());
  }
  if (kind == "indicator_box") {
    no_extras({"kind", "lower", "upper"});
    if (!p.contains("lower")) fail("phi.lower", "missing");
    if (!p.contains("upper")) fail("phi.upper", "missing");
    const Vector lo = parse_vector(p.at("lower"), "phi.lower");
    const Vector hi = parse_vector(p.at("upper"), "phi.upper");
    if (lo.size() != m || hi.size() != m)
      fail("phi.lower", "bounds must have " + std::to_string(m) + " entries");
    return ProxFunction::indicator_box(lo, hi);
  }
  fail("phi.kind", "unknown kind \"" + kind + "\"");
}

ParsedProblem parse_centralized(const json& root) {
  reject_unknown_keys(root, "",
                      {"n", "objective", "inequalities", "equalities", "T",
                       "phi"});
  const Index n = require_positive_int(root, "n");
  if (!root.contains("objective")) fail("objective", "missing");
  SmoothOracle f = parse_polynomial(root.at("objective"), n, "objective");
  auto g = parse_polynomial_list(root, n, "inequalities");
  auto h = parse_polynomial_list(root, n, "equalities");
  Matrix T = parse_T(root, n);
  ProxFunction phi = parse_phi(root, T.rows());

  ParsedProblem out;
  try {
    out.problem.emplace(n, std::move(f), std::move(g), std::move(h),
                        std::move(T), std::move(phi), ProblemOptions{});
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid problem: ") + e.what());
  }
  return out;
}

ParsedProblem parse_network(const json& root) {
  reject_unknown_keys(root, "", {"n", "agents", "edges", "T"});
  if (root.contains("T")) {
    const json& t = root.at("T");
    if (!t.is_string() || t.get<std::string>() != "incidence")
      fail("T", "networked problems fix T to \"incidence\"");
  }
  const Index n = require_positive_int(root, "n");

  const json& agents = root.at("agents");
  if (!agents.is_array() || agents.empty())
    fail("agents", "expected a nonempty array");
  std::vector<LocalProblem> locals;
  for (size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const json& a = agents[i];
    if (!a.is_object()) fail(where, "expected an object");
    reject_unknown_keys(a, where, {"objective", "inequalities", "equalities"});
    LocalProblem local;
    local.f = a.contains("objective")
                  ? parse_polynomial(a.at("objective"), n, where + ".objective")
                  : zero_oracle(n);
    if (a.contains("inequalities"))
      for (size_t k = 0; k < a.at("inequalities").size(); ++k)
        local.g.push_back(parse_polynomial(
            a.at("inequalities")[k], n,
            where + ".inequalities[" + std::to_string(k) + "]"));
    if (a.contains("equalities"))
      for (size_t k = 0; k < a.at("equalities").size(); ++k)
        local.h.push_back(
            parse_polynomial(a.at("equalities")[k], n,
                             where + ".equalities[" + std::to_string(k) + "]"));
    locals.push_back(std::move(local));
  }

  if (!root.contains("edges")) fail("edges", "missing");
  const json& edges_j = root.at("edges");
  if (!edges_j.is_array()) fail("edges", "expected an array of [a, b] pairs");
  std::vector<std::pair<Index, Index>> edges;
  for (size_t e = 0; e < edges_j.size(); ++e) {
    const std::string where = "edges[" + std::to_string(e) + "]";
    const json& pair = edges_j[e];
    if (!pair.is_array() || pair.size() != 2 ||
        !pair[0].is_number_integer() || !pair[1].is_number_integer())
      fail(where, "expected a pair of 0-based node indices");
    edges.emplace_back(pair[0].get<Index>(), pair[1].get<Index>());
  }

  ParsedProblem out;
  try {
    Graph graph(static_cast<Index>(locals.size()), std::move(edges));
    NetworkSpec spec(n, std::move(graph), std::move(locals));

    NetworkState init;
    init.t = 0.0;
    for (Index i = 0; i < spec.node_count(); ++i) {
      init.x.push_back(Vector::Zero(n));
      init.lambda.push_back(Vector::Ones(spec.ineq_count(i)));
      init.nu.push_back(Vector::Zero(spec.eq_count(i)));
      init.w.push_back(Vector::Zero(n));
    }
    out.network = NetworkProblem{std::move(spec), std::move(init)};
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid network problem: ") + e.what());
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ParsedProblem parse_problem_text(const std::string& text,
                                 const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!root.is_object()) throw ParseError(origin + ": expected a JSON object");
  return root.contains("agents") ? parse_network(root)
                                 : parse_centralized(root);
}

ParsedProblem parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), path);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.samples.empty()) return;
  const auto& first = traj.samples.front().state;
  os << "t";
  for (Index i = 0; i < first.x.size(); ++i) os << ",x" << (i + 1);
  for (Index i = 0; i < first.lambda.size(); ++i) os << ",lambda" << (i + 1);
  for (Index i = 0; i < first.nu.size(); ++i) os << ",nu" << (i + 1);
  for (Index i = 0; i < first.w.size(); ++i) os << ",w" << (i + 1);
  os << ",kkt_total\n";
  for (const auto& smp : traj.samples) {
    os << fmt(smp.t);
    for (Index i = 0; i < smp.state.x.size(); ++i)
      os << "," << fmt(smp.state.x[i]);
    for (Index i = 0; i < smp.state.lambda.size(); ++i)
      os << "," << fmt(smp.state.lambda[i]);
    for (Index i = 0; i < smp.state.nu.size(); ++i)
      os << "," << fmt(smp.state.nu[i]);
    for (Index i = 0; i < smp.state.w.size(); ++i)
      os << "," << fmt(smp.state.w[i]);
    os << "," << fmt(smp.kkt_total) << "\n";
  }
}

void write_network_trajectory_csv(std::ostream& os,
                                  const NetworkTrajectory& traj) {
  if (traj.samples.empty()) return;
  const auto& first = traj.samples.front().state;
  const auto nodes = first.x.size();
  os << "t";
  for (size_t i = 0; i < nodes; ++i)
    for (Index j = 0; j < first.x[i].size(); ++j)
      os << ",n" << (i + 1) << ".x" << (j + 1);
  for (size_t i = 0; i < nodes; ++i)
    for (Index j = 0; j < first.lambda[i].size(); ++j)
      os << ",n" << (i + 1) << ".lambda" << (j + 1);
  for (size_t i = 0; i < nodes; ++i)
    for (Index j = 0; j < first.nu[i].size(); ++j)
      os << ",n" << (i + 1) << ".nu" << (j + 1);
  for (size_t i = 0; i < nodes; ++i)
    for (Index j = 0; j < first.w[i].size(); ++j)
      os << ",n" << (i + 1) << ".w" << (j + 1);
  os << ",kkt_total,consensus_error\n";
  for (const auto& smp : traj.samples) {
    os << fmt(smp.t);
    for (const auto& v : smp.state.x)
      for (Index j = 0; j < v.size(); ++j) os << "," << fmt(v[j]);
    for (const auto& v : smp.state.lambda)
      for (Index j = 0; j < v.size(); ++j) os << "," << fmt(v[j]);
    for (const auto& v : smp.state.nu)
      for (Index j = 0; j < v.size(); ++j) os << "," << fmt(v[j]);
    for (const auto& v : smp.state.w)
      for (Index j = 0; j < v.size(); ++j) os << "," << fmt(v[j]);
    os << "," << fmt(smp.kkt_total) << "," << fmt(smp.consensus) << "\n";
  }
}

}  // namespace palflow
