#pragma once

#include <vector>

#include "otmatch/prox.hpp"
#include "otmatch/utility.hpp"

namespace otmatch {

enum class AgentSide { target, source };

/// The strictly local data an agent may read when computing its proposals:
/// its own bounds and incident utilities, plus the consensus value and
/// multiplier of each incident edge, in canonical peer order. Both the
/// reference solver and the message-passing simulation build their agent
/// updates from this view and nothing else.
struct AgentView {
  AgentSide side = AgentSide::target;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<UtilityFn> utilities;
  std::vector<double> consensus;
  std::vector<double> multiplier;
};

/// One primal agent update: amounts proposed for the incident edges.
std::vector<double> propose_amounts(const AgentView& view, double eta);

/// The dual analogue of AgentView: the agent's mass and per-neighbor pair
/// surpluses, plus the consensus price and multiplier of each incident edge.
struct DualAgentView {
  AgentSide side = AgentSide::target;
  double mass = 0.0;
  std::vector<double> pair_surplus;
  std::vector<double> consensus;
  std::vector<double> multiplier;
};

/// One dual agent update: price proposals, subproblem multipliers, and the
/// agent surplus.
DualAgentResult propose_prices(const DualAgentView& view, double eta_hat);

}  // namespace otmatch
