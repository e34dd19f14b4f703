#pragma once

#include <optional>
#include <vector>

#include "otmatch/agent_view.hpp"
#include "otmatch/instance.hpp"
#include "otmatch/trace.hpp"

namespace otmatch {

/// The linear equality special case: per-agent masses, per-edge unit
/// surpluses, complete bipartite graph. Edge e = x * m + y (row-major).
struct LinearEqualityInstance {
  std::vector<double> target_mass;  // p_x, all > 0
  std::vector<double> source_mass;  // q_y, all > 0
  std::vector<double> gamma;        // row-major, >= 0
  std::vector<double> delta;        // row-major, >= 0

  int n() const { return static_cast<int>(target_mass.size()); }
  int m() const { return static_cast<int>(source_mass.size()); }
  int edge(int x, int y) const { return x * m() + y; }
  double pair_surplus(int x, int y) const { return gamma[edge(x, y)] + delta[edge(x, y)]; }

  /// Throws unless masses are positive and the instance is balanced.
  void validate() const;
};

ProblemInstance to_problem_instance(const LinearEqualityInstance& inst);

/// Interprets a validated general instance as a linear equality one. Throws
/// when the instance is not complete, not in balanced equality form, or has
/// utilities outside offset-free linear ones with nonnegative net rates.
LinearEqualityInstance linear_equality_from(const ProblemInstance& inst);

struct DualEdgeState {
  double proposal_t = 0.0;  // w^(t), price offered by the target
  double proposal_s = 0.0;  // w^(s), price requested by the source
  double consensus = 0.0;   // w
  double multiplier = 0.0;  // beta
  double lambda_t = 0.0;    // subproblem multipliers (the recovered amounts)
  double lambda_s = 0.0;
};

struct DualState {
  std::vector<DualEdgeState> edges;  // row-major
  std::vector<double> u;             // per-target surplus
  std::vector<double> v;             // per-source surplus
  long iteration = 0;
  double eta_hat = 1.0;
};

DualState make_initial_dual_state(const LinearEqualityInstance& inst, double eta_hat);

/// One full pricing round: every agent solves its subproblem through the
/// dual (a simplex projection), prices are recovered, then each pair
/// averages the price proposals and accumulates the multiplier.
DualState dual_step(const LinearEqualityInstance& inst, const DualState& state);

struct DualRunOptions {
  bool record_snapshots = false;
  const double* reference_value = nullptr;
  const Plan* reference_plan = nullptr;
};

struct DualRunReport {
  Plan plan;              // recovered amounts: the final multipliers beta
  std::vector<double> u;  // normalized so min u = 0
  std::vector<double> v;
  std::vector<double> w;  // consensus prices, same normalization
  bool converged = false;
  long iterations = 0;
  IterationTrace trace;  // objective = D2, residual = ||w_t - w_s||,
                         // delta = mass residual of the recovered plan
  DualState final_state;  // raw, unnormalized
  std::vector<DualState> snapshots;
};

DualRunReport run_dual(const LinearEqualityInstance& inst, double eta_hat, const StopRule& stop,
                       const DualRunOptions& options = {});

/// Runs the primal and dual algorithms side by side from zero initialization
/// with eta_hat = 1/eta (overridable as a negative control) and compares the
/// trajectories under the mapping amounts <-> lambdas, consensus <-> beta,
/// multiplier <-> consensus price.
struct EquivalenceReport {
  bool ok = false;
  double max_deviation = 0.0;
  long first_bad_iteration = -1;
  int first_bad_edge = -1;
  std::vector<double> per_iteration_max;
  double tolerance = 1e-9;
};

EquivalenceReport check_equivalence(const LinearEqualityInstance& inst, double eta,
                                    long iterations,
                                    std::optional<double> eta_hat_override = std::nullopt);

/// Shifting every target surplus up by C and every source surplus down by C
/// (prices down by C) preserves the dual objective and all constraint
/// residuals on balanced instances.
struct DualPointShift {
  std::vector<double> u, v, w_t, w_s;
};

DualPointShift shift_solution(const std::vector<double>& u, const std::vector<double>& v,
                              const std::vector<double>& w_t, const std::vector<double>& w_s,
                              double C);

/// Joint certificate for a primal plan and a dual point: duality gap, dual
/// feasibility, complementary slackness on carrying edges, and primal mass
/// residuals, all measured against 1e-6 * scale.
struct CertifyReport {
  double duality_gap = 0.0;
  double max_dual_violation = 0.0;
  double max_slackness_violation = 0.0;
  double max_mass_residual = 0.0;
  double scale = 1.0;
  bool certified = false;
};

CertifyReport certify_optimality(const LinearEqualityInstance& inst, const Plan& plan,
                                 const std::vector<double>& u, const std::vector<double>& v,
                                 const std::vector<double>& w);

/// Shared helpers for the message-passing simulation.
DualAgentView make_dual_target_view(const LinearEqualityInstance& inst, int x,
                                    const DualState& state);
DualAgentView make_dual_source_view(const LinearEqualityInstance& inst, int y,
                                    const DualState& state);
TraceRow dual_trace_row(const LinearEqualityInstance& inst, const DualState& current);

}  // namespace otmatch
