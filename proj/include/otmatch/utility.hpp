#pragma once

#include <string>

namespace otmatch {

enum class UtilityKind { linear, quadratic, log, threshold };

std::string to_string(UtilityKind kind);

/// Concave utility of a nonnegative transfer amount. The representable
/// family is closed:
///
///   linear     u(a) = offset + rate * a
///   quadratic  u(a) = offset + rate * a - curvature * a^2
///   log        u(a) = rate * log(a + 1)
///   threshold  u(a) = rate * min(a, cap)
///
/// each optionally reduced by a cost  cost_rate * a + cost_curvature * a^2.
/// Concavity requires curvature + cost_curvature >= 0 and nonnegative rates
/// for the log and threshold kinds.
struct UtilityFn {
  UtilityKind kind = UtilityKind::linear;
  double rate = 0.0;
  double offset = 0.0;
  double curvature = 0.0;  // quadratic only
  double cap = 0.0;        // threshold only
  double cost_rate = 0.0;
  double cost_curvature = 0.0;

  static UtilityFn linear(double rate, double offset = 0.0);
  static UtilityFn quadratic(double rate, double curvature, double offset = 0.0);
  static UtilityFn log_revenue(double rate);
  static UtilityFn threshold(double rate, double cap);

  UtilityFn with_linear_cost(double coefficient) const;
  UtilityFn with_quadratic_cost(double coefficient) const;

  double value(double amount) const;
  /// One-sided (right) derivative; at the threshold kink this selects the
  /// flat branch.
  double derivative(double amount) const;
  bool concave() const;
  bool finite_parameters() const;

  bool operator==(const UtilityFn&) const = default;
};

/// Flattened view used by the proximal solvers:
///   u(a) = constant + lin*a - quad*a^2 + log_gain*log(a+1)
///          + step_gain*min(a, step_cap)
/// with quad, log_gain, step_gain >= 0 for any utility passing concave().
struct UtilityCoefficients {
  double lin = 0.0;
  double quad = 0.0;
  double log_gain = 0.0;
  double step_gain = 0.0;
  double step_cap = 0.0;
  double constant = 0.0;
};

UtilityCoefficients coefficients(const UtilityFn& u);

}  // namespace otmatch
