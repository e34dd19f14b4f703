#pragma once

#include <vector>

#include "otmatch/utility.hpp"

namespace otmatch {

/// Separable proximal subproblem of one agent update:
///
///   minimize   sum_j [ -h_j(a_j) + linear_j * a_j + (eta/2)(a_j - reference_j)^2 ]
///   subject to a_j >= 0,  lower <= sum_j a_j <= upper.
///
/// The proximal term makes the objective strictly convex, so the minimizer
/// is unique. `upper` may be +infinity.
struct ProxProblem {
  std::vector<UtilityFn> utilities;
  std::vector<double> linear;
  std::vector<double> reference;
  double eta = 1.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct ProxResult {
  std::vector<double> amounts;
  /// Scalar KKT multiplier of the sum constraint: positive when the upper
  /// bound binds, negative when the lower bound binds, zero otherwise.
  double multiplier = 0.0;
};

ProxResult solve_prox(const ProxProblem& prob);

/// Euclidean projection onto { v >= 0, sum v = mass }, sort-based and exact
/// up to floating point. Throws for mass <= 0 or non-finite input.
std::vector<double> project_simplex(const std::vector<double>& v, double mass);

/// One dual-side agent subproblem: choose an agent surplus and per-neighbor
/// price proposals minimizing the penalized objective subject to the surplus
/// dominating every pair surplus net of prices. Solved through its dual: the
/// multiplier problem is a simplex projection, prices are recovered affinely
/// from the multipliers, and the surplus is the max over neighbors.
struct DualAgentProblem {
  bool is_target = true;
  double mass = 0.0;                    // p_x (targets) or q_y (sources), > 0
  std::vector<double> pair_surplus;     // gamma (targets) or delta (sources)
  std::vector<double> price_reference;  // consensus prices w_xy(k)
  std::vector<double> multiplier;       // beta_xy(k)
  double eta_hat = 1.0;
};

struct DualAgentResult {
  std::vector<double> lambdas;  // on the mass simplex
  std::vector<double> prices;   // w^(t) or w^(s)
  double value = 0.0;           // u_x or v_y
};

DualAgentResult solve_dual_agent(const DualAgentProblem& prob);

namespace detail {

/// General KKT route for solve_prox: outer bisection on the scalar sum
/// multiplier, per-coordinate closed-form or safeguarded-Newton roots.
/// solve_prox dispatches here unless the exact projection shortcut applies
/// (equality sum bound with all-linear utilities). Exposed for tests.
ProxResult solve_prox_kkt(const ProxProblem& prob);

}  // namespace detail

}  // namespace otmatch
