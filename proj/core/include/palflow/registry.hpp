#pragma once

#include <optional>
#include <string>

#include "palflow/network.hpp"

namespace palflow {

// Built-in problems addressable by name from the CLI and tests.
struct RegistryEntry {
  std::string name;
  std::string summary;
  Index dim = 0;    // decision dimension
  Index nodes = 1;  // > 1 for networked problems
  Index ineq = 0;
  Index eq = 0;
  std::string phi;
  std::optional<Vector> optimum;
  std::optional<double> default_t_end;  // entries needing a longer horizon

  // Exactly one of these is set.
  std::function<ProblemSpec()> make;
  std::function<NetworkProblem()> make_network;

  bool is_network() const { return static_cast<bool>(make_network); }
};

// Stable, name-sorted listing of the built-in problems.
const std::vector<RegistryEntry>& problem_registry();

// nullptr when the name is unknown.
const RegistryEntry* find_problem(const std::string& name);

}  // namespace palflow
