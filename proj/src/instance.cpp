#include "otmatch/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace otmatch {

void ProblemInstance::finalize() {
  std::vector<int> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (edges[a].target != edges[b].target) return edges[a].target < edges[b].target;
    return edges[a].source < edges[b].source;
  });

  std::vector<Edge> sorted_edges(edges.size());
  std::vector<EdgePair> sorted_utils(edges.size());
  for (size_t i = 0; i < order.size(); ++i) {
    sorted_edges[i] = edges[order[i]];
    sorted_utils[i] = utilities.size() == edges.size() ? utilities[order[i]] : EdgePair{};
  }
  edges = std::move(sorted_edges);
  utilities = std::move(sorted_utils);

  edges_of_target.assign(targets.size(), {});
  edges_of_source.assign(sources.size(), {});
  for (int e = 0; e < n_edges(); ++e) {
    const Edge& ed = edges[e];
    if (ed.target >= 0 && ed.target < n_targets()) edges_of_target[ed.target].push_back(e);
    if (ed.source >= 0 && ed.source < n_sources()) edges_of_source[ed.source].push_back(e);
  }
}

int ProblemInstance::target_index(const std::string& id) const {
  for (int i = 0; i < n_targets(); ++i)
    if (targets[i].id == id) return i;
  return -1;
}

int ProblemInstance::source_index(const std::string& id) const {
  for (int i = 0; i < n_sources(); ++i)
    if (sources[i].id == id) return i;
  return -1;
}

int ProblemInstance::edge_index(int target, int source) const {
  Edge key{target, source};
  auto it = std::lower_bound(edges.begin(), edges.end(), key, [](const Edge& a, const Edge& b) {
    if (a.target != b.target) return a.target < b.target;
    return a.source < b.source;
  });
  if (it != edges.end() && it->target == target && it->source == source)
    return static_cast<int>(it - edges.begin());
  return -1;
}

std::string ProblemInstance::edge_name(int e) const {
  const Edge& ed = edges.at(e);
  const std::string t = (ed.target >= 0 && ed.target < n_targets()) ? targets[ed.target].id
                                                                    : "#" + std::to_string(ed.target);
  const std::string s = (ed.source >= 0 && ed.source < n_sources()) ? sources[ed.source].id
                                                                    : "#" + std::to_string(ed.source);
  return t + "/" + s;
}

namespace {

void check_bounds(const std::string& who, double lower, double upper,
                  std::vector<std::string>& out) {
  if (!std::isfinite(lower) || !std::isfinite(upper)) {
    out.push_back(who + ": non-finite bounds");
    return;
  }
  if (lower < 0.0 || lower > upper)
    out.push_back(who + ": bound ordering violated (need 0 <= lower <= upper, got [" +
                  std::to_string(lower) + ", " + std::to_string(upper) + "])");
}

}  // namespace

ValidationReport validate_instance(const ProblemInstance& inst) {
  ValidationReport report;
  auto& out = report.violations;

  for (const auto& t : inst.targets) check_bounds("target " + t.id, t.lower, t.upper, out);
  for (const auto& s : inst.sources) check_bounds("source " + s.id, s.lower, s.upper, out);

  if (inst.utilities.size() != inst.edges.size())
    out.push_back("utilities not keyed by edges (" + std::to_string(inst.utilities.size()) +
                  " utilities for " + std::to_string(inst.edges.size()) + " edges)");

  for (int e = 0; e < inst.n_edges(); ++e) {
    const Edge& ed = inst.edges[e];
    if (ed.target < 0 || ed.target >= inst.n_targets() || ed.source < 0 ||
        ed.source >= inst.n_sources()) {
      out.push_back("edge #" + std::to_string(e) + " references a missing agent");
      continue;
    }
    if (e > 0 && inst.edges[e - 1] == ed)
      out.push_back("duplicate edge " + inst.edge_name(e));
    if (e < static_cast<int>(inst.utilities.size())) {
      if (!inst.utilities[e].f.concave())
        out.push_back("edge " + inst.edge_name(e) + ": target utility violates concavity");
      if (!inst.utilities[e].g.concave())
        out.push_back("edge " + inst.edge_name(e) + ": source utility violates concavity");
    }
  }

  for (int x = 0; x < inst.n_targets(); ++x)
    if (x < static_cast<int>(inst.edges_of_target.size()) && inst.edges_of_target[x].empty())
      out.push_back("target " + inst.targets[x].id + " has no incident edge");
  for (int y = 0; y < inst.n_sources(); ++y)
    if (y < static_cast<int>(inst.edges_of_source.size()) && inst.edges_of_source[y].empty())
      out.push_back("source " + inst.sources[y].id + " has no incident edge");

  return report;
}

bool check_necessity(const ProblemInstance& inst) {
  double total_demand_floor = 0.0;
  double total_supply_ceiling = 0.0;
  for (const auto& s : inst.sources) total_supply_ceiling += s.upper;
  for (int x = 0; x < inst.n_targets(); ++x) {
    double neighbor_supply = 0.0;
    for (int e : inst.edges_of_target[x]) neighbor_supply += inst.sources[inst.edges[e].source].upper;
    if (inst.targets[x].lower > neighbor_supply) return false;
    total_demand_floor += inst.targets[x].lower;
  }
  return total_demand_floor <= total_supply_ceiling;
}

bool check_sufficiency(const ProblemInstance& inst) {
  for (int y = 0; y < inst.n_sources(); ++y) {
    double neighbor_demand_floor = 0.0;
    for (int e : inst.edges_of_source[y]) neighbor_demand_floor += inst.targets[inst.edges[e].target].lower;
    if (inst.sources[y].upper < neighbor_demand_floor) return false;
  }
  return true;
}

bool equality_form(const ProblemInstance& inst) {
  for (const auto& t : inst.targets)
    if (t.lower != t.upper) return false;
  for (const auto& s : inst.sources)
    if (s.lower != s.upper) return false;
  return true;
}

bool check_balance(const ProblemInstance& inst) {
  if (!equality_form(inst))
    throw std::invalid_argument("check_balance requires an equality-form instance");
  double p = 0.0, q = 0.0;
  for (const auto& t : inst.targets) p += t.lower;
  for (const auto& s : inst.sources) q += s.lower;
  return std::abs(p - q) <= 1e-12 * std::max(1.0, p);
}

double total_surplus(const ProblemInstance& inst, const Plan& plan) {
  if (static_cast<int>(plan.size()) != inst.n_edges())
    throw std::invalid_argument("plan has " + std::to_string(plan.size()) + " amounts for " +
                                std::to_string(inst.n_edges()) + " edges");
  double total = 0.0;
  for (int e = 0; e < inst.n_edges(); ++e) {
    const double amount = plan[e];
    if (!(amount >= 0.0) || !std::isfinite(amount))
      throw std::invalid_argument("plan amount on edge " + inst.edge_name(e) + " is invalid");
    total += inst.utilities[e].f.value(amount) + inst.utilities[e].g.value(amount);
  }
  return total;
}

}  // namespace otmatch
