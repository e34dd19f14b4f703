#pragma once

#include <string>
#include <utility>
#include <vector>

#include "otmatch/agent_view.hpp"
#include "otmatch/dual.hpp"
#include "otmatch/instance.hpp"
#include "otmatch/primal.hpp"
#include "otmatch/trace.hpp"

namespace otmatch {

enum class SimMode { primal_amounts, dual_prices };

/// Message payloads are restricted to the quantities the algorithms
/// transmit: a proposal (an amount or a price) and the pair-update results
/// (consensus and multiplier). Bounds, masses, and utility parameters never
/// leave an actor.
struct Payload {
  std::string kind;  // "proposal" | "pair_sync"
  std::vector<std::pair<std::string, double>> fields;
};

struct MessageRecord {
  long round = 0;
  AgentSide from_side = AgentSide::target;
  int from_index = -1;
  int target = -1;  // edge endpoint indices
  int source = -1;
  Payload payload;
};

/// An isolated participant: private data plus per-incident-edge local state
/// and a mailbox. Behavior is a pure function of these fields; actors hold
/// no reference to the instance or to each other.
struct AgentActor {
  AgentSide side = AgentSide::target;
  int index = -1;
  std::string id;

  // Private data (exactly one of the two groups is populated per mode).
  double lower = 0.0, upper = 0.0;
  std::vector<UtilityFn> utilities;
  double mass = 0.0;
  std::vector<double> pair_surplus;

  struct LocalEdge {
    int peer = -1;
    int edge = -1;  // canonical index, used only for gathering
    double consensus = 0.0;
    double multiplier = 0.0;
    double my_proposal = 0.0;
    double peer_proposal = 0.0;
    double my_lambda = 0.0;  // dual bookkeeping, never transmitted
  };
  std::vector<LocalEdge> edges;  // canonical peer order
  double surplus = 0.0;          // dual: latest u_x or v_y
};

/// Synchronous message-passing execution of the primal (amount bargaining)
/// or dual (price bargaining) algorithm. Each pair update is computed
/// redundantly by both endpoints from the exchanged proposals; a round
/// fails with a protocol error if the two computations ever differ.
class NetSim {
 public:
  NetSim(const ProblemInstance& inst, double eta);
  NetSim(const LinearEqualityInstance& inst, double eta_hat);

  void run_round();
  void run_rounds(long rounds);

  SimMode mode() const { return mode_; }
  long round() const { return round_; }
  const std::vector<MessageRecord>& log() const { return log_; }
  const IterationTrace& trace() const { return trace_; }
  const std::vector<AgentActor>& actors() const { return actors_; }
  /// Harness bookkeeping copy of the instance (edge set and naming only).
  const ProblemInstance& instance() const { return instance_; }

  PrimalState gather_primal_state() const;
  DualState gather_dual_state() const;

 private:
  SimMode mode_;
  double penalty_ = 1.0;
  long round_ = 0;
  ProblemInstance instance_;             // harness bookkeeping, not actor-visible
  LinearEqualityInstance dual_instance_;
  std::vector<AgentActor> actors_;       // targets first, then sources
  std::vector<MessageRecord> log_;
  IterationTrace trace_;
  PrimalState last_primal_;
  DualState last_dual_;

  AgentActor& actor_of(AgentSide side, int index);
  void deliver(const MessageRecord& message);
};

struct AuditReport {
  std::vector<std::string> violations;
  long messages = 0;
  bool ok() const { return violations.empty(); }
};

/// Checks a message log against the §-free contract: only allowed payload
/// kinds and field names, only messages along instance edges, and exactly
/// 2 proposals + 2 syncs per edge per round.
AuditReport audit_information_flow(const std::vector<MessageRecord>& log,
                                   const ProblemInstance& inst, long rounds, SimMode mode);

inline AuditReport audit_information_flow(const NetSim& sim, long rounds) {
  return audit_information_flow(sim.log(), sim.instance(), rounds, sim.mode());
}

}  // namespace otmatch
