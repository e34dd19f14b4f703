#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace otmatch {

/// Iteration budget and stopping tolerances. The residual tolerance applies
/// to the disagreement between paired proposals; the consensus tolerance to
/// the change of the consensus variables between successive iterations.
struct StopRule {
  long max_iterations = 20000;
  double residual_tolerance = 1e-8;
  double consensus_tolerance = 1e-8;

  void validate() const {
    if (max_iterations < 1 || !(residual_tolerance > 0.0) || !(consensus_tolerance > 0.0))
      throw std::invalid_argument("stop rule requires positive tolerances and iterations");
  }
};

struct TraceRow {
  long k = 0;
  double objective = 0.0;
  double residual = 0.0;  // ||proposal_t - proposal_s||_2
  double delta = 0.0;     // ||consensus(k) - consensus(k-1)||_2
  double oracle_gap = std::numeric_limits<double>::quiet_NaN();
  double plan_residual = std::numeric_limits<double>::quiet_NaN();
  bool event = false;
  std::string note;
};

struct IterationTrace {
  std::vector<TraceRow> rows;
  bool has_oracle = false;
};

}  // namespace otmatch
