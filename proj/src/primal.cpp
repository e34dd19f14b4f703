#include "otmatch/primal.hpp"

#include <cmath>
#include <stdexcept>

namespace otmatch {

namespace {

constexpr double kDivergenceLimit = 1e8;

void check_finite(const ProblemInstance& inst, const PrimalState& state) {
  if (static_cast<int>(state.edges.size()) != inst.n_edges())
    throw std::invalid_argument("primal state does not match the instance edge set");
  for (int e = 0; e < inst.n_edges(); ++e) {
    const auto& s = state.edges[e];
    if (!std::isfinite(s.proposal_t) || !std::isfinite(s.proposal_s) ||
        !std::isfinite(s.consensus) || !std::isfinite(s.multiplier))
      throw std::runtime_error("non-finite state on edge " + inst.edge_name(e));
  }
}

double l2_diff_consensus(const PrimalState& a, const PrimalState& b) {
  double sum = 0.0;
  for (size_t e = 0; e < a.edges.size(); ++e) {
    const double d = a.edges[e].consensus - b.edges[e].consensus;
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace

PrimalState make_initial_state(const ProblemInstance& inst, double eta) {
  PrimalState state;
  state.edges.assign(inst.n_edges(), PrimalEdgeState{});
  state.eta = eta;
  return state;
}

AgentView make_target_view(const ProblemInstance& inst, int x, const PrimalState& state) {
  AgentView view;
  view.side = AgentSide::target;
  view.lower = inst.targets[x].lower;
  view.upper = inst.targets[x].upper;
  for (int e : inst.edges_of_target[x]) {
    view.utilities.push_back(inst.utilities[e].f);
    view.consensus.push_back(state.edges[e].consensus);
    view.multiplier.push_back(state.edges[e].multiplier);
  }
  return view;
}

AgentView make_source_view(const ProblemInstance& inst, int y, const PrimalState& state) {
  AgentView view;
  view.side = AgentSide::source;
  view.lower = inst.sources[y].lower;
  view.upper = inst.sources[y].upper;
  for (int e : inst.edges_of_source[y]) {
    view.utilities.push_back(inst.utilities[e].g);
    view.consensus.push_back(state.edges[e].consensus);
    view.multiplier.push_back(state.edges[e].multiplier);
  }
  return view;
}

PrimalState primal_step(const ProblemInstance& inst, const PrimalState& state) {
  check_finite(inst, state);
  PrimalState next = state;

  for (int x = 0; x < inst.n_targets(); ++x) {
    const std::vector<double> amounts = propose_amounts(make_target_view(inst, x, state), state.eta);
    const auto& incident = inst.edges_of_target[x];
    for (size_t j = 0; j < incident.size(); ++j) next.edges[incident[j]].proposal_t = amounts[j];
  }
  for (int y = 0; y < inst.n_sources(); ++y) {
    const std::vector<double> amounts = propose_amounts(make_source_view(inst, y, state), state.eta);
    const auto& incident = inst.edges_of_source[y];
    for (size_t j = 0; j < incident.size(); ++j) next.edges[incident[j]].proposal_s = amounts[j];
  }
  for (auto& e : next.edges) {
    e.consensus = 0.5 * (e.proposal_t + e.proposal_s);
    e.multiplier = e.multiplier + 0.5 * state.eta * (e.proposal_t - e.proposal_s);
  }
  next.iteration = state.iteration + 1;
  check_finite(inst, next);
  return next;
}

PrimalState to_primal_state(const UnsimplifiedState& state) {
  PrimalState out;
  out.iteration = state.iteration;
  out.eta = state.eta;
  out.edges.resize(state.edges.size());
  for (size_t e = 0; e < state.edges.size(); ++e)
    out.edges[e] = {state.edges[e].proposal_t, state.edges[e].proposal_s,
                    state.edges[e].consensus, state.edges[e].multiplier1};
  return out;
}

UnsimplifiedState make_initial_unsimplified_state(const ProblemInstance& inst, double eta) {
  UnsimplifiedState state;
  state.edges.assign(inst.n_edges(), UnsimplifiedEdgeState{});
  state.eta = eta;
  return state;
}

UnsimplifiedState unsimplified_step(const ProblemInstance& inst, const UnsimplifiedState& state) {
  UnsimplifiedState next = state;
  const double eta = state.eta;

  for (int x = 0; x < inst.n_targets(); ++x) {
    AgentView view;
    view.side = AgentSide::target;
    view.lower = inst.targets[x].lower;
    view.upper = inst.targets[x].upper;
    for (int e : inst.edges_of_target[x]) {
      view.utilities.push_back(inst.utilities[e].f);
      view.consensus.push_back(state.edges[e].consensus);
      view.multiplier.push_back(state.edges[e].multiplier1);
    }
    const std::vector<double> amounts = propose_amounts(view, eta);
    const auto& incident = inst.edges_of_target[x];
    for (size_t j = 0; j < incident.size(); ++j) next.edges[incident[j]].proposal_t = amounts[j];
  }
  for (int y = 0; y < inst.n_sources(); ++y) {
    AgentView view;
    view.side = AgentSide::source;
    view.lower = inst.sources[y].lower;
    view.upper = inst.sources[y].upper;
    for (int e : inst.edges_of_source[y]) {
      view.utilities.push_back(inst.utilities[e].g);
      view.consensus.push_back(state.edges[e].consensus);
      view.multiplier.push_back(state.edges[e].multiplier2);
    }
    const std::vector<double> amounts = propose_amounts(view, eta);
    const auto& incident = inst.edges_of_source[y];
    for (size_t j = 0; j < incident.size(); ++j) next.edges[incident[j]].proposal_s = amounts[j];
  }
  for (auto& e : next.edges) {
    // Closed-form consensus update, then separate multiplier ascent steps.
    e.consensus = (e.multiplier1 - e.multiplier2) / (2.0 * eta) +
                  0.5 * (e.proposal_t + e.proposal_s);
    e.multiplier1 = e.multiplier1 + eta * (e.proposal_t - e.consensus);
    e.multiplier2 = e.multiplier2 + eta * (e.consensus - e.proposal_s);
  }
  next.iteration = state.iteration + 1;
  return next;
}

TraceRow primal_trace_row(const ProblemInstance& inst, const PrimalState& previous,
                          const PrimalState& current) {
  TraceRow row;
  row.k = current.iteration;
  Plan plan(current.edges.size());
  double residual = 0.0;
  for (size_t e = 0; e < current.edges.size(); ++e) {
    plan[e] = current.edges[e].consensus;
    const double d = current.edges[e].proposal_t - current.edges[e].proposal_s;
    residual += d * d;
  }
  row.objective = total_surplus(inst, plan);
  row.residual = std::sqrt(residual);
  row.delta = l2_diff_consensus(current, previous);
  return row;
}

RunReport run_primal(const ProblemInstance& inst, double eta, const StopRule& stop,
                     const PrimalState* init, const RunOptions& options) {
  stop.validate();
  RunReport report;
  report.likely_infeasible = !check_necessity(inst);

  PrimalState state = init ? *init : make_initial_state(inst, eta);
  state.eta = eta;
  report.trace.has_oracle = options.reference_value != nullptr;

  for (long k = 0; k < stop.max_iterations; ++k) {
    double multiplier_norm = 0.0;
    for (const auto& e : state.edges)
      multiplier_norm = std::max(multiplier_norm, std::abs(e.multiplier));
    if (multiplier_norm > kDivergenceLimit) {
      report.diverged = true;
      break;
    }

    PrimalState next = primal_step(inst, state);
    TraceRow row = primal_trace_row(inst, state, next);
    if (options.reference_value) row.oracle_gap = std::abs(row.objective - *options.reference_value);
    if (options.reference_plan) {
      double sum = 0.0;
      for (size_t e = 0; e < next.edges.size(); ++e) {
        const double d = next.edges[e].consensus - (*options.reference_plan)[e];
        sum += d * d;
      }
      row.plan_residual = std::sqrt(sum);
    }
    report.trace.rows.push_back(row);
    if (options.record_snapshots) report.snapshots.push_back(next);

    state = std::move(next);
    report.iterations = state.iteration;
    // The delta criterion compares successive consensus values, so it only
    // participates from the second iteration on.
    const bool delta_ok = k == 0 ? row.residual <= stop.residual_tolerance
                                 : row.delta <= stop.consensus_tolerance;
    if (row.residual <= stop.residual_tolerance && delta_ok) {
      report.converged = true;
      break;
    }
  }

  report.plan.resize(state.edges.size());
  for (size_t e = 0; e < state.edges.size(); ++e) report.plan[e] = state.edges[e].consensus;
  report.final_state = std::move(state);
  return report;
}

}  // namespace otmatch
