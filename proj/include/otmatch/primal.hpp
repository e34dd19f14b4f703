#pragma once

#include <vector>

#include "otmatch/agent_view.hpp"
#include "otmatch/instance.hpp"
#include "otmatch/trace.hpp"

namespace otmatch {

struct PrimalEdgeState {
  double proposal_t = 0.0;  // amount requested by the target
  double proposal_s = 0.0;  // amount offered by the source
  double consensus = 0.0;
  double multiplier = 0.0;
};

struct PrimalState {
  std::vector<PrimalEdgeState> edges;  // canonical edge order
  long iteration = 0;
  double eta = 1.0;
};

PrimalState make_initial_state(const ProblemInstance& inst, double eta);

/// One full synchronous round: all target updates, all source updates, then
/// all pair updates (consensus = average of the proposals, multiplier
/// accumulates half the penalized disagreement). Throws on non-finite state,
/// naming the offending edge.
PrimalState primal_step(const ProblemInstance& inst, const PrimalState& state);

/// The pre-simplification iterations kept for equivalence testing: two
/// multipliers per edge and a closed-form consensus update that references
/// their difference. From iteration 1 on, both multipliers coincide and the
/// trajectory matches primal_step.
struct UnsimplifiedEdgeState {
  double proposal_t = 0.0;
  double proposal_s = 0.0;
  double consensus = 0.0;
  double multiplier1 = 0.0;
  double multiplier2 = 0.0;
};

struct UnsimplifiedState {
  std::vector<UnsimplifiedEdgeState> edges;
  long iteration = 0;
  double eta = 1.0;
};

UnsimplifiedState make_initial_unsimplified_state(const ProblemInstance& inst, double eta);
UnsimplifiedState unsimplified_step(const ProblemInstance& inst, const UnsimplifiedState& state);

/// Projection onto the shared fields (multiplier taken from multiplier1).
PrimalState to_primal_state(const UnsimplifiedState& state);

struct RunOptions {
  bool record_snapshots = false;
  /// When set, trace rows carry oracle_gap = |D(k) - reference_value| and,
  /// if a reference plan is given, plan_residual = ||pi(k) - plan||_2.
  const double* reference_value = nullptr;
  const Plan* reference_plan = nullptr;
};

struct RunReport {
  Plan plan;
  bool converged = false;
  bool diverged = false;
  bool likely_infeasible = false;
  long iterations = 0;
  IterationTrace trace;
  PrimalState final_state;
  std::vector<PrimalState> snapshots;  // one per iteration when requested
};

/// Runs primal_step under the stop rule. Divergence of the multipliers
/// beyond 1e8 aborts with the diverged flag; failing the necessary
/// feasibility conditions only marks the report as likely infeasible.
RunReport run_primal(const ProblemInstance& inst, double eta, const StopRule& stop,
                     const PrimalState* init = nullptr, const RunOptions& options = {});

/// Shared helpers so that the reference solver and the message-passing
/// simulation produce bit-identical rounds.
AgentView make_target_view(const ProblemInstance& inst, int x, const PrimalState& state);
AgentView make_source_view(const ProblemInstance& inst, int y, const PrimalState& state);
TraceRow primal_trace_row(const ProblemInstance& inst, const PrimalState& previous,
                          const PrimalState& current);

}  // namespace otmatch
