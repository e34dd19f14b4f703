#include "otmatch/netsim.hpp"

#include <map>
#include <stdexcept>

namespace otmatch {

namespace {

Payload proposal_payload(SimMode mode, double value) {
  Payload p;
  p.kind = "proposal";
  p.fields.emplace_back(mode == SimMode::primal_amounts ? "amount" : "price", value);
  return p;
}

Payload pair_sync_payload(double consensus, double multiplier) {
  Payload p;
  p.kind = "pair_sync";
  p.fields.emplace_back("consensus", consensus);
  p.fields.emplace_back("multiplier", multiplier);
  return p;
}

}  // namespace

NetSim::NetSim(const ProblemInstance& inst, double eta)
    : mode_(SimMode::primal_amounts), penalty_(eta), instance_(inst) {
  const ValidationReport report = validate_instance(inst);
  if (!report.ok())
    throw std::invalid_argument("netsim: invalid instance: " + report.violations.front());

  for (int x = 0; x < inst.n_targets(); ++x) {
    AgentActor actor;
    actor.side = AgentSide::target;
    actor.index = x;
    actor.id = inst.targets[x].id;
    actor.lower = inst.targets[x].lower;
    actor.upper = inst.targets[x].upper;
    for (int e : inst.edges_of_target[x]) {
      actor.utilities.push_back(inst.utilities[e].f);
      actor.edges.push_back({inst.edges[e].source, e, 0.0, 0.0, 0.0, 0.0, 0.0});
    }
    actors_.push_back(std::move(actor));
  }
  for (int y = 0; y < inst.n_sources(); ++y) {
    AgentActor actor;
    actor.side = AgentSide::source;
    actor.index = y;
    actor.id = inst.sources[y].id;
    actor.lower = inst.sources[y].lower;
    actor.upper = inst.sources[y].upper;
    for (int e : inst.edges_of_source[y]) {
      actor.utilities.push_back(inst.utilities[e].g);
      actor.edges.push_back({inst.edges[e].target, e, 0.0, 0.0, 0.0, 0.0, 0.0});
    }
    actors_.push_back(std::move(actor));
  }
  last_primal_ = make_initial_state(inst, eta);
}

NetSim::NetSim(const LinearEqualityInstance& inst, double eta_hat)
    : mode_(SimMode::dual_prices), penalty_(eta_hat), dual_instance_(inst) {
  inst.validate();
  instance_ = to_problem_instance(inst);

  for (int x = 0; x < inst.n(); ++x) {
    AgentActor actor;
    actor.side = AgentSide::target;
    actor.index = x;
    actor.id = instance_.targets[x].id;
    actor.mass = inst.target_mass[x];
    for (int y = 0; y < inst.m(); ++y) {
      actor.pair_surplus.push_back(inst.gamma[inst.edge(x, y)]);
      actor.edges.push_back({y, inst.edge(x, y), 0.0, 0.0, 0.0, 0.0, 0.0});
    }
    actors_.push_back(std::move(actor));
  }
  for (int y = 0; y < inst.m(); ++y) {
    AgentActor actor;
    actor.side = AgentSide::source;
    actor.index = y;
    actor.id = instance_.sources[y].id;
    actor.mass = inst.source_mass[y];
    for (int x = 0; x < inst.n(); ++x) {
      actor.pair_surplus.push_back(inst.delta[inst.edge(x, y)]);
      actor.edges.push_back({x, inst.edge(x, y), 0.0, 0.0, 0.0, 0.0, 0.0});
    }
    actors_.push_back(std::move(actor));
  }
  last_dual_ = make_initial_dual_state(inst, eta_hat);
}

AgentActor& NetSim::actor_of(AgentSide side, int index) {
  const size_t offset = side == AgentSide::target ? 0 : instance_.n_targets();
  return actors_.at(offset + index);
}

void NetSim::deliver(const MessageRecord& message) {
  log_.push_back(message);
  const AgentSide to_side =
      message.from_side == AgentSide::target ? AgentSide::source : AgentSide::target;
  const int to_index = to_side == AgentSide::target ? message.target : message.source;
  AgentActor& receiver = actor_of(to_side, to_index);
  const int peer = to_side == AgentSide::target ? message.source : message.target;
  for (auto& edge : receiver.edges) {
    if (edge.peer != peer) continue;
    if (message.payload.kind == "proposal") {
      edge.peer_proposal = message.payload.fields.front().second;
    } else {
      // Redundantly computed pair values must match bit for bit.
      const double consensus = message.payload.fields[0].second;
      const double multiplier = message.payload.fields[1].second;
      if (consensus != edge.consensus || multiplier != edge.multiplier)
        throw std::runtime_error("netsim: pair update mismatch on edge " +
                                 instance_.edge_name(edge.edge) + " in round " +
                                 std::to_string(message.round));
    }
    return;
  }
  throw std::runtime_error("netsim: message across a non-edge pair");
}

void NetSim::run_round() {
  const long round = round_ + 1;

  // Proposal phase: every actor solves its local subproblem from its private
  // data and the consensus state of its incident edges.
  for (AgentActor& actor : actors_) {
    if (mode_ == SimMode::primal_amounts) {
      AgentView view;
      view.side = actor.side;
      view.lower = actor.lower;
      view.upper = actor.upper;
      view.utilities = actor.utilities;
      for (const auto& edge : actor.edges) {
        view.consensus.push_back(edge.consensus);
        view.multiplier.push_back(edge.multiplier);
      }
      const std::vector<double> amounts = propose_amounts(view, penalty_);
      for (size_t j = 0; j < actor.edges.size(); ++j) actor.edges[j].my_proposal = amounts[j];
    } else {
      DualAgentView view;
      view.side = actor.side;
      view.mass = actor.mass;
      view.pair_surplus = actor.pair_surplus;
      for (const auto& edge : actor.edges) {
        view.consensus.push_back(edge.consensus);
        view.multiplier.push_back(edge.multiplier);
      }
      const DualAgentResult result = propose_prices(view, penalty_);
      actor.surplus = result.value;
      for (size_t j = 0; j < actor.edges.size(); ++j) {
        actor.edges[j].my_proposal = result.prices[j];
        actor.edges[j].my_lambda = result.lambdas[j];
      }
    }
  }

  // Exchange proposals (2 messages per edge).
  for (AgentActor& actor : actors_) {
    for (const auto& edge : actor.edges) {
      MessageRecord message;
      message.round = round;
      message.from_side = actor.side;
      message.from_index = actor.index;
      message.target = actor.side == AgentSide::target ? actor.index : edge.peer;
      message.source = actor.side == AgentSide::source ? actor.index : edge.peer;
      message.payload = proposal_payload(mode_, edge.my_proposal);
      deliver(message);
    }
  }

  // Pair phase: both endpoints compute the averaging and multiplier updates
  // from the same two proposals and cross-check via sync messages.
  for (AgentActor& actor : actors_) {
    for (auto& edge : actor.edges) {
      const double from_target =
          actor.side == AgentSide::target ? edge.my_proposal : edge.peer_proposal;
      const double from_source =
          actor.side == AgentSide::source ? edge.my_proposal : edge.peer_proposal;
      edge.consensus = 0.5 * (from_target + from_source);
      edge.multiplier = edge.multiplier + 0.5 * penalty_ * (from_target - from_source);
    }
  }
  for (AgentActor& actor : actors_) {
    for (const auto& edge : actor.edges) {
      MessageRecord message;
      message.round = round;
      message.from_side = actor.side;
      message.from_index = actor.index;
      message.target = actor.side == AgentSide::target ? actor.index : edge.peer;
      message.source = actor.side == AgentSide::source ? actor.index : edge.peer;
      message.payload = pair_sync_payload(edge.consensus, edge.multiplier);
      deliver(message);
    }
  }

  round_ = round;
  if (mode_ == SimMode::primal_amounts) {
    PrimalState current = gather_primal_state();
    trace_.rows.push_back(primal_trace_row(instance_, last_primal_, current));
    last_primal_ = std::move(current);
  } else {
    DualState current = gather_dual_state();
    trace_.rows.push_back(dual_trace_row(dual_instance_, current));
    last_dual_ = std::move(current);
  }
}

void NetSim::run_rounds(long rounds) {
  for (long i = 0; i < rounds; ++i) run_round();
}

PrimalState NetSim::gather_primal_state() const {
  PrimalState state = make_initial_state(instance_, penalty_);
  state.iteration = round_;
  for (const AgentActor& actor : actors_) {
    for (const auto& edge : actor.edges) {
      auto& out = state.edges[edge.edge];
      if (actor.side == AgentSide::target) {
        out.proposal_t = edge.my_proposal;
        out.consensus = edge.consensus;
        out.multiplier = edge.multiplier;
      } else {
        out.proposal_s = edge.my_proposal;
      }
    }
  }
  return state;
}

DualState NetSim::gather_dual_state() const {
  DualState state = make_initial_dual_state(dual_instance_, penalty_);
  state.iteration = round_;
  for (const AgentActor& actor : actors_) {
    for (const auto& edge : actor.edges) {
      auto& out = state.edges[edge.edge];
      if (actor.side == AgentSide::target) {
        out.proposal_t = edge.my_proposal;
        out.lambda_t = edge.my_lambda;
        out.consensus = edge.consensus;
        out.multiplier = edge.multiplier;
        state.u[actor.index] = actor.surplus;
      } else {
        out.proposal_s = edge.my_proposal;
        out.lambda_s = edge.my_lambda;
        state.v[actor.index] = actor.surplus;
      }
    }
  }
  return state;
}

AuditReport audit_information_flow(const std::vector<MessageRecord>& log,
                                   const ProblemInstance& inst, long rounds, SimMode mode) {
  AuditReport report;
  report.messages = static_cast<long>(log.size());
  const std::string amount_field = mode == SimMode::primal_amounts ? "amount" : "price";

  std::map<long, long> per_round;
  for (size_t i = 0; i < log.size(); ++i) {
    const MessageRecord& message = log[i];
    const std::string where = "message #" + std::to_string(i) + " (round " +
                              std::to_string(message.round) + ")";

    if (message.payload.kind == "proposal") {
      if (message.payload.fields.size() != 1 || message.payload.fields[0].first != amount_field)
        report.violations.push_back(where + ": proposal payload carries disallowed fields");
    } else if (message.payload.kind == "pair_sync") {
      if (message.payload.fields.size() != 2 || message.payload.fields[0].first != "consensus" ||
          message.payload.fields[1].first != "multiplier")
        report.violations.push_back(where + ": pair_sync payload carries disallowed fields");
    } else {
      report.violations.push_back(where + ": disallowed payload kind '" + message.payload.kind + "'");
    }

    if (message.target < 0 || message.target >= inst.n_targets() || message.source < 0 ||
        message.source >= inst.n_sources() ||
        inst.edge_index(message.target, message.source) < 0)
      report.violations.push_back(where + ": crosses a non-edge pair");

    per_round[message.round] += 1;
  }

  const long expected = 4L * inst.n_edges();
  for (long r = 1; r <= rounds; ++r) {
    const long got = per_round.count(r) ? per_round[r] : 0;
    if (got != expected)
      report.violations.push_back("round " + std::to_string(r) + ": expected " +
                                  std::to_string(expected) + " messages, saw " +
                                  std::to_string(got));
  }
  return report;
}

}  // namespace otmatch
