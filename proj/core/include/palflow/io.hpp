#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "palflow/network.hpp"

namespace palflow {

// Result of parsing a problem file: exactly one of the two is set,
// depending on whether the file declares an "agents" section.
struct ParsedProblem {
  std::optional<ProblemSpec> problem;
  std::optional<NetworkProblem> network;
};

// JSON problem format (objectives and constraints as polynomial term lists):
//   {
//     "n": 3,
//     "objective": [{"coeff": 1.0, "exponents": [2, 0, 0]}, ...],
//     "inequalities": [[term, ...], ...],
//     "equalities": [[term, ...], ...],
//     "T": "identity" | [[...], ...],
//     "phi": {"kind": "zero"|"l1"|"indicator_zero"|"indicator_box"|"quadratic",
//             "weight": w, "lower": [...], "upper": [...]},
//     "agents": [{"objective": ..., "inequalities": ..., "equalities": ...}],
//     "edges": [[0, 1], ...]   // 0-based, with "agents" only
//   }
// With "agents", consensus supplies the coupling; "T" may only be the
// literal "incidence" (or absent) and "phi" must be absent.
// Throws ParseError: syntax errors carry line/column, schema errors name
// the offending field.
ParsedProblem parse_problem_file(const std::string& path);
ParsedProblem parse_problem_text(const std::string& text,
                                 const std::string& origin = "<input>");

// One row per recorded sample, full double precision (17 significant
// digits), columns: t, x, lambda, nu, w, kkt_total.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Networked layout: per-node blocks (n{i}.x{j}, ...), then kkt_total and
// consensus_error.
void write_network_trajectory_csv(std::ostream& os,
                                  const NetworkTrajectory& traj);

}  // namespace palflow
