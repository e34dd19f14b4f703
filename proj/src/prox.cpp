#include "otmatch/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace otmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SimplexProjection {
  std::vector<double> point;
  double shift = 0.0;  // the threshold subtracted from every active coordinate
};

SimplexProjection project_simplex_detail(const std::vector<double>& v, double mass) {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::invalid_argument("project_simplex: mass must be positive and finite");
  if (v.empty()) throw std::invalid_argument("project_simplex: empty input");
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument("project_simplex: non-finite input");

  const size_t n = v.size();
  if (n == 1) return {{mass}, v[0] - mass};

  std::vector<double> sorted(v);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double shift = 0.0;
  size_t active = 0;
  for (size_t j = 0; j < n; ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - mass) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) {
      shift = candidate;
      active = j + 1;
    }
  }
  if (active == 0) shift = (cumulative - mass) / static_cast<double>(n);

  SimplexProjection out;
  out.shift = shift;
  out.point.resize(n);
  for (size_t j = 0; j < n; ++j) out.point[j] = std::max(v[j] - shift, 0.0);
  return out;
}

/// One coordinate of the prox objective,
///   phi(x) = -u(x) + (linear + mu) x + (eta/2)(x - reference)^2,
/// minimized over x >= 0 with at most one kink (the threshold cap).
struct ProxCoordinate {
  UtilityCoefficients u;
  double linear = 0.0;
  double reference = 0.0;
  double eta = 1.0;

  double phi(double x, double mu) const {
    double revenue = u.lin * x - u.quad * x * x;
    if (u.log_gain != 0.0) revenue += u.log_gain * std::log1p(x);
    if (u.step_gain != 0.0) revenue += u.step_gain * std::min(x, u.step_cap);
    const double d = x - reference;
    return -revenue + (linear + mu) * x + 0.5 * eta * d * d;
  }

  // Stationary point of the smooth branch whose linear revenue slope is
  // `slope`: solves A x + B = C/(x+1) with A = 2 quad + eta > 0, C >= 0.
  double branch_root(double slope, double mu) const {
    const double A = 2.0 * u.quad + eta;
    const double B = linear + mu - slope - u.lin - eta * reference;
    const double C = u.log_gain;
    if (C == 0.0) return -B / A;
    // A x^2 + (A + B) x + (B - C) = 0; the root > -1 is the stationary point.
    const double b = A + B;
    const double disc = (A - B) * (A - B) + 4.0 * A * C;
    const double sq = std::sqrt(disc);
    double x = (b <= 0.0) ? (-b + sq) / (2.0 * A) : 2.0 * (C - B) / (b + sq);
    // Newton polish; the closed form already lands within a few ulp.
    for (int it = 0; it < 3; ++it) {
      const double denom = x + 1.0;
      if (!(denom > 0.0)) break;
      const double residual = A * x + B - C / denom;
      const double derivative = A + C / (denom * denom);
      const double next = x - residual / derivative;
      if (!(next > -1.0) || next == x) break;
      x = next;
    }
    return x;
  }

  double minimize(double mu) const {
    if (u.step_gain == 0.0) return std::max(branch_root(0.0, mu), 0.0);
    // Threshold kink: evaluate both branches (and implicitly the kink,
    // reached by clamping) and keep the lower objective.
    const double below = std::clamp(branch_root(u.step_gain, mu), 0.0, u.step_cap);
    const double above = std::max(branch_root(0.0, mu), u.step_cap);
    return phi(below, mu) <= phi(above, mu) ? below : above;
  }
};

bool pure_linear(const UtilityCoefficients& c) {
  return c.quad == 0.0 && c.log_gain == 0.0 && c.step_gain == 0.0;
}

void validate(const ProxProblem& prob) {
  const size_t n = prob.utilities.size();
  if (n == 0) throw std::invalid_argument("solve_prox: empty problem");
  if (prob.linear.size() != n || prob.reference.size() != n)
    throw std::invalid_argument("solve_prox: mismatched coefficient sizes");
  if (!(prob.eta > 0.0) || !std::isfinite(prob.eta))
    throw std::invalid_argument("solve_prox: eta must be positive");
  if (!std::isfinite(prob.lower) || std::isnan(prob.upper))
    throw std::invalid_argument("solve_prox: non-finite sum bounds");
  if (!(0.0 <= prob.lower) || !(prob.lower <= prob.upper))
    throw std::invalid_argument("solve_prox: need 0 <= lower <= upper");
  for (size_t j = 0; j < n; ++j) {
    if (!std::isfinite(prob.linear[j]) || !std::isfinite(prob.reference[j]) ||
        !prob.utilities[j].finite_parameters())
      throw std::invalid_argument("solve_prox: non-finite inputs");
  }
}

}  // namespace

std::vector<double> project_simplex(const std::vector<double>& v, double mass) {
  return project_simplex_detail(v, mass).point;
}

namespace detail {

ProxResult solve_prox_kkt(const ProxProblem& prob) {
  validate(prob);
  const size_t n = prob.utilities.size();

  std::vector<ProxCoordinate> coords(n);
  for (size_t j = 0; j < n; ++j) {
    coords[j].u = coefficients(prob.utilities[j]);
    coords[j].linear = prob.linear[j];
    coords[j].reference = prob.reference[j];
    coords[j].eta = prob.eta;
  }

  auto amounts_at = [&](double mu) {
    std::vector<double> a(n);
    for (size_t j = 0; j < n; ++j) a[j] = coords[j].minimize(mu);
    return a;
  };
  auto sum_of = [](const std::vector<double>& a) {
    return std::accumulate(a.begin(), a.end(), 0.0);
  };

  std::vector<double> amounts = amounts_at(0.0);
  const double unconstrained_sum = sum_of(amounts);
  if (unconstrained_sum >= prob.lower &&
      (prob.upper == kInf || unconstrained_sum <= prob.upper))
    return {std::move(amounts), 0.0};

  // The sum is strictly decreasing in mu wherever positive; bracket the
  // multiplier against the violated bound, then bisect to machine precision
  // so that nearby inputs map to nearby outputs.
  const bool at_upper = unconstrained_sum > prob.upper;
  const double bound = at_upper ? prob.upper : prob.lower;
  double lo, hi;
  if (at_upper) {
    lo = 0.0;
    hi = 1.0;
    for (int it = 0; it < 200 && sum_of(amounts_at(hi)) > bound; ++it) hi *= 2.0;
  } else {
    hi = 0.0;
    lo = -1.0;
    for (int it = 0; it < 200 && sum_of(amounts_at(lo)) < bound; ++it) lo *= 2.0;
  }

  double mu = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mu = 0.5 * (lo + hi);
    if (mu == lo || mu == hi) break;
    const double s = sum_of(amounts_at(mu));
    if (s == bound) break;
    if (s > bound)
      lo = mu;
    else
      hi = mu;
  }
  return {amounts_at(mu), mu};
}

}  // namespace detail

ProxResult solve_prox(const ProxProblem& prob) {
  validate(prob);
  // Equality sum bound with all-linear utilities reduces to an exact
  // Euclidean projection onto the scaled simplex.
  if (prob.lower == prob.upper && prob.lower > 0.0) {
    bool linear_only = true;
    for (const auto& u : prob.utilities)
      if (!pure_linear(coefficients(u))) {
        linear_only = false;
        break;
      }
    if (linear_only) {
      const size_t n = prob.utilities.size();
      std::vector<double> center(n);
      for (size_t j = 0; j < n; ++j) {
        const double slope = coefficients(prob.utilities[j]).lin;
        center[j] = prob.reference[j] + (slope - prob.linear[j]) / prob.eta;
      }
      SimplexProjection proj = project_simplex_detail(center, prob.lower);
      return {std::move(proj.point), prob.eta * proj.shift};
    }
  }
  return detail::solve_prox_kkt(prob);
}

DualAgentResult solve_dual_agent(const DualAgentProblem& prob) {
  const size_t n = prob.pair_surplus.size();
  if (n == 0) throw std::invalid_argument("solve_dual_agent: empty neighbor list");
  if (prob.price_reference.size() != n || prob.multiplier.size() != n)
    throw std::invalid_argument("solve_dual_agent: mismatched sizes");
  if (!(prob.mass > 0.0) || !std::isfinite(prob.mass))
    throw std::invalid_argument("solve_dual_agent: mass must be positive");
  if (!(prob.eta_hat > 0.0) || !std::isfinite(prob.eta_hat))
    throw std::invalid_argument("solve_dual_agent: eta_hat must be positive");
  for (size_t j = 0; j < n; ++j)
    if (!std::isfinite(prob.pair_surplus[j]) || !std::isfinite(prob.price_reference[j]) ||
        !std::isfinite(prob.multiplier[j]))
      throw std::invalid_argument("solve_dual_agent: non-finite inputs");

  // Completing the square in the lambda problem centers the projection at
  // beta + eta_hat * (pair surplus net of the consensus price).
  std::vector<double> center(n);
  for (size_t j = 0; j < n; ++j) {
    const double net = prob.is_target ? prob.pair_surplus[j] - prob.price_reference[j]
                                      : prob.pair_surplus[j] + prob.price_reference[j];
    center[j] = prob.multiplier[j] + prob.eta_hat * net;
  }

  DualAgentResult out;
  out.lambdas = project_simplex(center, prob.mass);
  out.prices.resize(n);
  double best = -kInf;
  for (size_t j = 0; j < n; ++j) {
    if (prob.is_target) {
      out.prices[j] =
          prob.price_reference[j] + (out.lambdas[j] - prob.multiplier[j]) / prob.eta_hat;
      best = std::max(best, prob.pair_surplus[j] - out.prices[j]);
    } else {
      out.prices[j] =
          prob.price_reference[j] + (prob.multiplier[j] - out.lambdas[j]) / prob.eta_hat;
      best = std::max(best, prob.pair_surplus[j] + out.prices[j]);
    }
  }
  out.value = best;
  return out;
}

}  // namespace otmatch
