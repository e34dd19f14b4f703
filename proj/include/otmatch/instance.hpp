#pragma once

#include <string>
#include <vector>

#include "otmatch/utility.hpp"

namespace otmatch {

struct TargetSpec {
  std::string id;
  double lower = 0.0;  // p_l
  double upper = 0.0;  // p_h
  bool operator==(const TargetSpec&) const = default;
};

struct SourceSpec {
  std::string id;
  double lower = 0.0;  // q_l
  double upper = 0.0;  // q_h
  bool operator==(const SourceSpec&) const = default;
};

struct Edge {
  int target = -1;
  int source = -1;
  bool operator==(const Edge&) const = default;
};

/// Target-side and source-side utilities of one edge.
struct EdgePair {
  UtilityFn f;
  UtilityFn g;
  bool operator==(const EdgePair&) const = default;
};

/// Amounts per edge, parallel to ProblemInstance::edges.
using Plan = std::vector<double>;

/// A bipartite transport instance. After finalize(), edges are in canonical
/// order (ascending target index, then source index) and the adjacency lists
/// are consistent with the edge set. Instances are treated as immutable once
/// validated; mutation goes through copies.
struct ProblemInstance {
  std::vector<TargetSpec> targets;
  std::vector<SourceSpec> sources;
  std::vector<Edge> edges;
  std::vector<EdgePair> utilities;  // parallel to edges

  // Derived by finalize().
  std::vector<std::vector<int>> edges_of_target;
  std::vector<std::vector<int>> edges_of_source;

  void finalize();

  int n_targets() const { return static_cast<int>(targets.size()); }
  int n_sources() const { return static_cast<int>(sources.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  int target_index(const std::string& id) const;
  int source_index(const std::string& id) const;
  int edge_index(int target, int source) const;
  std::string edge_name(int e) const;

  bool operator==(const ProblemInstance& rhs) const {
    return targets == rhs.targets && sources == rhs.sources &&
           edges == rhs.edges && utilities == rhs.utilities;
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Structural checks: bound ordering, orphan agents, duplicate edges,
/// dangling edge endpoints, non-concave utilities. The instance is usable
/// iff the report is empty.
ValidationReport validate_instance(const ProblemInstance& inst);

/// Necessary feasibility conditions: every target's lower bound is covered
/// by its neighbors' upper bounds, and total demand floor does not exceed
/// total supply ceiling.
bool check_necessity(const ProblemInstance& inst);

/// Sufficient feasibility condition: every source alone can cover the lower
/// bounds of all its neighbors. Strictly stronger than check_necessity.
bool check_sufficiency(const ProblemInstance& inst);

/// True when an instance with equality bounds is balanced,
/// |sum p - sum q| <= 1e-12 * max(1, sum p). Throws std::invalid_argument
/// if the instance is not in equality form.
bool check_balance(const ProblemInstance& inst);

/// True when every agent has lower == upper.
bool equality_form(const ProblemInstance& inst);

/// Sum of f and g over the plan. Throws on a plan of the wrong size or with
/// negative or non-finite amounts.
double total_surplus(const ProblemInstance& inst, const Plan& plan);

}  // namespace otmatch
