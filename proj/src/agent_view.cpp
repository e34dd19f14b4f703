#include "otmatch/agent_view.hpp"

namespace otmatch {

std::vector<double> propose_amounts(const AgentView& view, double eta) {
  ProxProblem prob;
  prob.utilities = view.utilities;
  prob.reference = view.consensus;
  prob.eta = eta;
  prob.lower = view.lower;
  prob.upper = view.upper;
  prob.linear.resize(view.multiplier.size());
  // The multiplier enters the target objective with a plus sign and the
  // source objective with a minus sign.
  for (size_t j = 0; j < view.multiplier.size(); ++j)
    prob.linear[j] = view.side == AgentSide::target ? view.multiplier[j] : -view.multiplier[j];
  return solve_prox(prob).amounts;
}

DualAgentResult propose_prices(const DualAgentView& view, double eta_hat) {
  DualAgentProblem prob;
  prob.is_target = view.side == AgentSide::target;
  prob.mass = view.mass;
  prob.pair_surplus = view.pair_surplus;
  prob.price_reference = view.consensus;
  prob.multiplier = view.multiplier;
  prob.eta_hat = eta_hat;
  return solve_dual_agent(prob);
}

}  // namespace otmatch
