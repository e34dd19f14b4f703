#include "otmatch/utility.hpp"

#include <algorithm>
#include <cmath>

namespace otmatch {

std::string to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::linear: return "linear";
    case UtilityKind::quadratic: return "quadratic";
    case UtilityKind::log: return "log";
    case UtilityKind::threshold: return "threshold";
  }
  return "unknown";
}

UtilityFn UtilityFn::linear(double rate, double offset) {
  UtilityFn u;
  u.kind = UtilityKind::linear;
  u.rate = rate;
  u.offset = offset;
  return u;
}

UtilityFn UtilityFn::quadratic(double rate, double curvature, double offset) {
  UtilityFn u;
  u.kind = UtilityKind::quadratic;
  u.rate = rate;
  u.curvature = curvature;
  u.offset = offset;
  return u;
}

UtilityFn UtilityFn::log_revenue(double rate) {
  UtilityFn u;
  u.kind = UtilityKind::log;
  u.rate = rate;
  return u;
}

UtilityFn UtilityFn::threshold(double rate, double cap) {
  UtilityFn u;
  u.kind = UtilityKind::threshold;
  u.rate = rate;
  u.cap = cap;
  return u;
}

UtilityFn UtilityFn::with_linear_cost(double coefficient) const {
  UtilityFn u = *this;
  u.cost_rate = coefficient;
  return u;
}

UtilityFn UtilityFn::with_quadratic_cost(double coefficient) const {
  UtilityFn u = *this;
  u.cost_curvature = coefficient;
  return u;
}

double UtilityFn::value(double a) const {
  const double cost = cost_rate * a + cost_curvature * a * a;
  switch (kind) {
    case UtilityKind::linear: return offset + rate * a - cost;
    case UtilityKind::quadratic: return offset + rate * a - curvature * a * a - cost;
    case UtilityKind::log: return rate * std::log1p(a) - cost;
    case UtilityKind::threshold: return rate * std::min(a, cap) - cost;
  }
  return 0.0;
}

double UtilityFn::derivative(double a) const {
  const double cost = cost_rate + 2.0 * cost_curvature * a;
  switch (kind) {
    case UtilityKind::linear: return rate - cost;
    case UtilityKind::quadratic: return rate - 2.0 * curvature * a - cost;
    case UtilityKind::log: return rate / (a + 1.0) - cost;
    case UtilityKind::threshold: return (a < cap ? rate : 0.0) - cost;
  }
  return 0.0;
}

bool UtilityFn::concave() const {
  if (!finite_parameters()) return false;
  const UtilityCoefficients c = coefficients(*this);
  return c.quad >= 0.0 && c.log_gain >= 0.0 && c.step_gain >= 0.0 &&
         c.step_cap >= 0.0;
}

bool UtilityFn::finite_parameters() const {
  return std::isfinite(rate) && std::isfinite(offset) &&
         std::isfinite(curvature) && std::isfinite(cap) &&
         std::isfinite(cost_rate) && std::isfinite(cost_curvature);
}

UtilityCoefficients coefficients(const UtilityFn& u) {
  UtilityCoefficients c;
  c.lin = -u.cost_rate;
  c.quad = u.cost_curvature;
  switch (u.kind) {
    case UtilityKind::linear:
      c.lin += u.rate;
      c.constant = u.offset;
      break;
    case UtilityKind::quadratic:
      c.lin += u.rate;
      c.quad += u.curvature;
      c.constant = u.offset;
      break;
    case UtilityKind::log:
      c.log_gain = u.rate;
      break;
    case UtilityKind::threshold:
      c.step_gain = u.rate;
      c.step_cap = u.cap;
      break;
  }
  return c;
}

}  // namespace otmatch
