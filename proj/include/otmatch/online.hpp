#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "otmatch/instance.hpp"
#include "otmatch/primal.hpp"

namespace otmatch {

struct BoundsChange {
  std::string agent;  // target or source id
  double lower = 0.0;
  double upper = 0.0;
};

struct UtilityChange {
  std::string target, source;
  std::optional<UtilityFn> f, g;  // at least one present
};

struct EdgeAddition {
  std::string target, source;
  UtilityFn f, g;
};

struct EdgeRemoval {
  std::string target, source;
};

struct IncidentSpec {
  std::string peer;
  UtilityFn f, g;
};

struct AgentAddition {
  bool is_target = false;
  std::string id;
  double lower = 0.0, upper = 0.0;
  std::vector<IncidentSpec> edges;
};

struct AgentRemoval {
  std::string id;
};

using Mutation =
    std::variant<BoundsChange, UtilityChange, EdgeAddition, EdgeRemoval, AgentAddition, AgentRemoval>;

std::string describe(const Mutation& mutation);

struct TimedMutation {
  long at = 0;
  Mutation mutation;
};

/// Timed instance mutations; indices are strictly increasing and every
/// mutation must leave the instance valid.
struct EventScript {
  std::vector<TimedMutation> events;
};

/// Throws (naming the event) when indices are not strictly increasing or any
/// mutation yields an invalid instance when applied in order.
void validate_script(const ProblemInstance& initial, const EventScript& script);

/// Applies one mutation. Surviving edges keep their ADMM state, new edges
/// start from zero, removed agents drop their edges and state. Throws
/// without side effects when the mutated instance is invalid.
std::pair<ProblemInstance, PrimalState> apply_event(const ProblemInstance& inst,
                                                    const PrimalState& state,
                                                    const Mutation& mutation);

struct OnlineOptions {
  /// Attach a per-phase oracle: each trace row carries the gap to the
  /// current phase's optimum (and the plan residual against its plan).
  bool attach_phase_oracle = false;
  double oracle_resolution = 1e-4;
};

struct OnlineReport {
  ProblemInstance final_instance;
  PrimalState final_state;
  IterationTrace trace;
  std::vector<long> event_iterations;
};

/// Iterates primal_step against the evolving instance, applying mutations at
/// their iteration indices before the step. State carries over; there is no
/// reinitialization at events.
OnlineReport run_online(const ProblemInstance& initial, const EventScript& script, double eta,
                        long total_iterations, const OnlineOptions& options = {});

}  // namespace otmatch
