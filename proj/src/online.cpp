#include "otmatch/online.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "otmatch/oracle.hpp"

namespace otmatch {

namespace {

struct EdgeKey {
  std::string target, source;
  bool operator<(const EdgeKey& rhs) const {
    if (target != rhs.target) return target < rhs.target;
    return source < rhs.source;
  }
};

std::map<EdgeKey, PrimalEdgeState> state_by_key(const ProblemInstance& inst,
                                                const PrimalState& state) {
  std::map<EdgeKey, PrimalEdgeState> out;
  for (int e = 0; e < inst.n_edges(); ++e)
    out[{inst.targets[inst.edges[e].target].id, inst.sources[inst.edges[e].source].id}] =
        state.edges[e];
  return out;
}

ProblemInstance mutated_instance(const ProblemInstance& inst, const Mutation& mutation) {
  ProblemInstance next = inst;

  if (const auto* bounds = std::get_if<BoundsChange>(&mutation)) {
    const int x = next.target_index(bounds->agent);
    const int y = next.source_index(bounds->agent);
    if (x >= 0) {
      next.targets[x].lower = bounds->lower;
      next.targets[x].upper = bounds->upper;
    } else if (y >= 0) {
      next.sources[y].lower = bounds->lower;
      next.sources[y].upper = bounds->upper;
    } else {
      throw std::invalid_argument("set_bounds: unknown agent '" + bounds->agent + "'");
    }
  } else if (const auto* util = std::get_if<UtilityChange>(&mutation)) {
    const int x = next.target_index(util->target);
    const int y = next.source_index(util->source);
    const int e = (x >= 0 && y >= 0) ? next.edge_index(x, y) : -1;
    if (e < 0)
      throw std::invalid_argument("set_utility: unknown edge " + util->target + "/" + util->source);
    if (!util->f && !util->g)
      throw std::invalid_argument("set_utility: no utility given for edge " + util->target + "/" +
                                  util->source);
    if (util->f) next.utilities[e].f = *util->f;
    if (util->g) next.utilities[e].g = *util->g;
  } else if (const auto* add = std::get_if<EdgeAddition>(&mutation)) {
    const int x = next.target_index(add->target);
    const int y = next.source_index(add->source);
    if (x < 0 || y < 0)
      throw std::invalid_argument("add_edge: unknown endpoint for " + add->target + "/" + add->source);
    if (next.edge_index(x, y) >= 0)
      throw std::invalid_argument("add_edge: edge " + add->target + "/" + add->source +
                                  " already exists");
    next.edges.push_back({x, y});
    next.utilities.push_back({add->f, add->g});
  } else if (const auto* rem = std::get_if<EdgeRemoval>(&mutation)) {
    const int x = next.target_index(rem->target);
    const int y = next.source_index(rem->source);
    const int e = (x >= 0 && y >= 0) ? next.edge_index(x, y) : -1;
    if (e < 0)
      throw std::invalid_argument("remove_edge: unknown edge " + rem->target + "/" + rem->source);
    next.edges.erase(next.edges.begin() + e);
    next.utilities.erase(next.utilities.begin() + e);
  } else if (const auto* agent = std::get_if<AgentAddition>(&mutation)) {
    if (next.target_index(agent->id) >= 0 || next.source_index(agent->id) >= 0)
      throw std::invalid_argument("add_agent: id '" + agent->id + "' already in use");
    if (agent->is_target) {
      next.targets.push_back({agent->id, agent->lower, agent->upper});
      const int x = next.n_targets() - 1;
      for (const auto& inc : agent->edges) {
        const int y = next.source_index(inc.peer);
        if (y < 0) throw std::invalid_argument("add_agent: unknown peer '" + inc.peer + "'");
        next.edges.push_back({x, y});
        next.utilities.push_back({inc.f, inc.g});
      }
    } else {
      next.sources.push_back({agent->id, agent->lower, agent->upper});
      const int y = next.n_sources() - 1;
      for (const auto& inc : agent->edges) {
        const int x = next.target_index(inc.peer);
        if (x < 0) throw std::invalid_argument("add_agent: unknown peer '" + inc.peer + "'");
        next.edges.push_back({x, y});
        next.utilities.push_back({inc.f, inc.g});
      }
    }
  } else if (const auto* removal = std::get_if<AgentRemoval>(&mutation)) {
    const int x = next.target_index(removal->id);
    const int y = next.source_index(removal->id);
    if (x < 0 && y < 0)
      throw std::invalid_argument("remove_agent: unknown agent '" + removal->id + "'");
    std::vector<Edge> kept_edges;
    std::vector<EdgePair> kept_utils;
    for (int e = 0; e < next.n_edges(); ++e) {
      if ((x >= 0 && next.edges[e].target == x) || (y >= 0 && next.edges[e].source == y)) continue;
      Edge edge = next.edges[e];
      if (x >= 0 && edge.target > x) --edge.target;
      if (y >= 0 && edge.source > y) --edge.source;
      kept_edges.push_back(edge);
      kept_utils.push_back(next.utilities[e]);
    }
    if (x >= 0) next.targets.erase(next.targets.begin() + x);
    if (y >= 0) next.sources.erase(next.sources.begin() + y);
    next.edges = std::move(kept_edges);
    next.utilities = std::move(kept_utils);
  }

  next.finalize();
  return next;
}

}  // namespace

std::string describe(const Mutation& mutation) {
  if (const auto* bounds = std::get_if<BoundsChange>(&mutation))
    return "set_bounds " + bounds->agent;
  if (const auto* util = std::get_if<UtilityChange>(&mutation))
    return "set_utility " + util->target + "/" + util->source;
  if (const auto* add = std::get_if<EdgeAddition>(&mutation))
    return "add_edge " + add->target + "/" + add->source;
  if (const auto* rem = std::get_if<EdgeRemoval>(&mutation))
    return "remove_edge " + rem->target + "/" + rem->source;
  if (const auto* agent = std::get_if<AgentAddition>(&mutation)) return "add_agent " + agent->id;
  if (const auto* removal = std::get_if<AgentRemoval>(&mutation))
    return "remove_agent " + removal->id;
  return "event";
}

std::pair<ProblemInstance, PrimalState> apply_event(const ProblemInstance& inst,
                                                    const PrimalState& state,
                                                    const Mutation& mutation) {
  ProblemInstance next = mutated_instance(inst, mutation);
  const ValidationReport report = validate_instance(next);
  if (!report.ok())
    throw std::invalid_argument("mutation '" + describe(mutation) +
                                "' yields an invalid instance: " + report.violations.front());

  // Surviving edges keep their state; new edges start from zero.
  const auto old_state = state_by_key(inst, state);
  PrimalState next_state = make_initial_state(next, state.eta);
  next_state.iteration = state.iteration;
  for (int e = 0; e < next.n_edges(); ++e) {
    const EdgeKey key{next.targets[next.edges[e].target].id,
                      next.sources[next.edges[e].source].id};
    const auto it = old_state.find(key);
    if (it != old_state.end()) next_state.edges[e] = it->second;
  }
  return {std::move(next), std::move(next_state)};
}

void validate_script(const ProblemInstance& initial, const EventScript& script) {
  long previous = -1;
  ProblemInstance inst = initial;
  PrimalState scratch = make_initial_state(inst, 1.0);
  for (size_t i = 0; i < script.events.size(); ++i) {
    const auto& event = script.events[i];
    if (event.at <= previous)
      throw std::invalid_argument("script event #" + std::to_string(i) +
                                  ": iteration indices must be strictly increasing");
    if (event.at < 0)
      throw std::invalid_argument("script event #" + std::to_string(i) + ": negative index");
    previous = event.at;
    try {
      std::tie(inst, scratch) = apply_event(inst, scratch, event.mutation);
    } catch (const std::exception& err) {
      throw std::invalid_argument("script event #" + std::to_string(i) + " (k=" +
                                  std::to_string(event.at) + "): " + err.what());
    }
  }
}

OnlineReport run_online(const ProblemInstance& initial, const EventScript& script, double eta,
                        long total_iterations, const OnlineOptions& options) {
  validate_script(initial, script);

  OnlineReport report;
  ProblemInstance inst = initial;
  PrimalState state = make_initial_state(inst, eta);

  double phase_value = 0.0;
  Plan phase_plan;
  auto refresh_phase_oracle = [&]() {
    if (!options.attach_phase_oracle) return;
    const OracleResult oracle = grid_search_oracle(inst, options.oracle_resolution);
    phase_value = oracle.value;
    phase_plan = oracle.plan;
  };
  refresh_phase_oracle();
  report.trace.has_oracle = options.attach_phase_oracle;

  size_t next_event = 0;
  for (long k = 0; k < total_iterations; ++k) {
    std::string note;
    bool changed = false;
    while (next_event < script.events.size() && script.events[next_event].at == k) {
      std::tie(inst, state) = apply_event(inst, state, script.events[next_event].mutation);
      if (!note.empty()) note += "; ";
      note += describe(script.events[next_event].mutation);
      report.event_iterations.push_back(k);
      ++next_event;
      changed = true;
    }
    if (changed) refresh_phase_oracle();

    const PrimalState previous = state;
    state = primal_step(inst, state);
    TraceRow row = primal_trace_row(inst, previous, state);
    row.k = k + 1;
    row.event = changed;
    row.note = note;
    if (options.attach_phase_oracle) {
      row.oracle_gap = std::abs(row.objective - phase_value);
      double sum = 0.0;
      for (size_t e = 0; e < state.edges.size(); ++e) {
        const double d = state.edges[e].consensus - phase_plan[e];
        sum += d * d;
      }
      row.plan_residual = std::sqrt(sum);
    }
    report.trace.rows.push_back(std::move(row));
  }

  report.final_instance = std::move(inst);
  report.final_state = std::move(state);
  return report;
}

}  // namespace otmatch
