#pragma once

#include <string>
#include <vector>

#include "otmatch/dual.hpp"
#include "otmatch/instance.hpp"

namespace otmatch {

struct OracleResult {
  double value = 0.0;
  Plan plan;                  // canonical edge order of the queried instance
  std::vector<double> u, v;   // dual prices (LP path only)
  std::string method;
  double resolution = 0.0;        // grid path only: final lattice pitch
  double value_tolerance = 0.0;   // grid path only: Lipschitz * resolution * dims
};

/// Exact solver for the balanced linear equality case: dense transportation
/// simplex with a northwest-corner start and Bland's rule. Returns an optimal
/// basic plan and dual prices with u_x + v_y >= gamma + delta everywhere and
/// equality on basic cells. Throws on unbalanced instances.
OracleResult solve_lp_centralized(const LinearEqualityInstance& inst);

/// Brute-force oracle for tiny instances of the general model. Eliminates
/// the equality-bound agents' constraints, then enumerates the remaining
/// free coordinates (at most 4) over a lattice refined down to `resolution`.
/// The returned value is within value_tolerance of the true optimum.
OracleResult grid_search_oracle(const ProblemInstance& inst, double resolution);

}  // namespace otmatch
