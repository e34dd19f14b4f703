#include "otmatch/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "otmatch/primal.hpp"

namespace otmatch {

void LinearEqualityInstance::validate() const {
  if (n() == 0 || m() == 0)
    throw std::invalid_argument("linear equality instance needs at least one agent per side");
  if (static_cast<int>(gamma.size()) != n() * m() || static_cast<int>(delta.size()) != n() * m())
    throw std::invalid_argument("unit surpluses must cover the complete graph");
  double p = 0.0, q = 0.0;
  for (double mass : target_mass) {
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw std::invalid_argument("target masses must be positive");
    p += mass;
  }
  for (double mass : source_mass) {
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw std::invalid_argument("source masses must be positive");
    q += mass;
  }
  if (std::abs(p - q) > 1e-9 * std::max(1.0, p))
    throw std::invalid_argument("unbalanced instance: total demand differs from total supply");
  for (double g : gamma)
    if (!(g >= 0.0) || !std::isfinite(g))
      throw std::invalid_argument("unit surpluses must be nonnegative");
  for (double d : delta)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument("unit surpluses must be nonnegative");
}

ProblemInstance to_problem_instance(const LinearEqualityInstance& inst) {
  ProblemInstance out;
  for (int x = 0; x < inst.n(); ++x)
    out.targets.push_back({"t" + std::to_string(x), inst.target_mass[x], inst.target_mass[x]});
  for (int y = 0; y < inst.m(); ++y)
    out.sources.push_back({"s" + std::to_string(y), inst.source_mass[y], inst.source_mass[y]});
  for (int x = 0; x < inst.n(); ++x)
    for (int y = 0; y < inst.m(); ++y) {
      out.edges.push_back({x, y});
      out.utilities.push_back(
          {UtilityFn::linear(inst.gamma[inst.edge(x, y)]), UtilityFn::linear(inst.delta[inst.edge(x, y)])});
    }
  out.finalize();
  return out;
}

LinearEqualityInstance linear_equality_from(const ProblemInstance& inst) {
  if (!equality_form(inst))
    throw std::invalid_argument("instance is not in equality form");
  if (inst.n_edges() != inst.n_targets() * inst.n_sources())
    throw std::invalid_argument("instance graph is not complete");

  LinearEqualityInstance out;
  for (const auto& t : inst.targets) out.target_mass.push_back(t.lower);
  for (const auto& s : inst.sources) out.source_mass.push_back(s.lower);
  out.gamma.resize(inst.n_edges());
  out.delta.resize(inst.n_edges());

  auto net_rate = [](const UtilityFn& u, const char* side) {
    const UtilityCoefficients c = coefficients(u);
    if (c.quad != 0.0 || c.log_gain != 0.0 || c.step_gain != 0.0 || u.offset != 0.0)
      throw std::invalid_argument(std::string(side) +
                                  " utility is not an offset-free linear function");
    if (c.lin < 0.0)
      throw std::invalid_argument(std::string(side) + " utility has a negative net rate");
    return c.lin;
  };

  for (int e = 0; e < inst.n_edges(); ++e) {
    const int idx = out.edge(inst.edges[e].target, inst.edges[e].source);
    out.gamma[idx] = net_rate(inst.utilities[e].f, "target");
    out.delta[idx] = net_rate(inst.utilities[e].g, "source");
  }
  out.validate();
  return out;
}

DualState make_initial_dual_state(const LinearEqualityInstance& inst, double eta_hat) {
  DualState state;
  state.edges.assign(static_cast<size_t>(inst.n()) * inst.m(), DualEdgeState{});
  state.u.assign(inst.n(), 0.0);
  state.v.assign(inst.m(), 0.0);
  state.eta_hat = eta_hat;
  return state;
}

DualAgentView make_dual_target_view(const LinearEqualityInstance& inst, int x,
                                    const DualState& state) {
  DualAgentView view;
  view.side = AgentSide::target;
  view.mass = inst.target_mass[x];
  for (int y = 0; y < inst.m(); ++y) {
    const int e = inst.edge(x, y);
    view.pair_surplus.push_back(inst.gamma[e]);
    view.consensus.push_back(state.edges[e].consensus);
    view.multiplier.push_back(state.edges[e].multiplier);
  }
  return view;
}

DualAgentView make_dual_source_view(const LinearEqualityInstance& inst, int y,
                                    const DualState& state) {
  DualAgentView view;
  view.side = AgentSide::source;
  view.mass = inst.source_mass[y];
  for (int x = 0; x < inst.n(); ++x) {
    const int e = inst.edge(x, y);
    view.pair_surplus.push_back(inst.delta[e]);
    view.consensus.push_back(state.edges[e].consensus);
    view.multiplier.push_back(state.edges[e].multiplier);
  }
  return view;
}

namespace {

void check_finite(const DualState& state) {
  for (const auto& e : state.edges)
    if (!std::isfinite(e.proposal_t) || !std::isfinite(e.proposal_s) ||
        !std::isfinite(e.consensus) || !std::isfinite(e.multiplier))
      throw std::runtime_error("non-finite dual state");
}

}  // namespace

DualState dual_step(const LinearEqualityInstance& inst, const DualState& state) {
  check_finite(state);
  DualState next = state;

  for (int x = 0; x < inst.n(); ++x) {
    const DualAgentResult r = propose_prices(make_dual_target_view(inst, x, state), state.eta_hat);
    next.u[x] = r.value;
    for (int y = 0; y < inst.m(); ++y) {
      next.edges[inst.edge(x, y)].proposal_t = r.prices[y];
      next.edges[inst.edge(x, y)].lambda_t = r.lambdas[y];
    }
  }
  for (int y = 0; y < inst.m(); ++y) {
    const DualAgentResult r = propose_prices(make_dual_source_view(inst, y, state), state.eta_hat);
    next.v[y] = r.value;
    for (int x = 0; x < inst.n(); ++x) {
      next.edges[inst.edge(x, y)].proposal_s = r.prices[x];
      next.edges[inst.edge(x, y)].lambda_s = r.lambdas[x];
    }
  }
  for (auto& e : next.edges) {
    e.consensus = 0.5 * (e.proposal_t + e.proposal_s);
    e.multiplier = e.multiplier + 0.5 * state.eta_hat * (e.proposal_t - e.proposal_s);
  }
  next.iteration = state.iteration + 1;
  return next;
}

TraceRow dual_trace_row(const LinearEqualityInstance& inst, const DualState& current) {
  TraceRow row;
  row.k = current.iteration;
  double objective = 0.0;
  for (int x = 0; x < inst.n(); ++x) objective += current.u[x] * inst.target_mass[x];
  for (int y = 0; y < inst.m(); ++y) objective += current.v[y] * inst.source_mass[y];
  row.objective = objective;

  double residual = 0.0;
  for (const auto& e : current.edges) {
    const double d = e.proposal_t - e.proposal_s;
    residual += d * d;
  }
  row.residual = std::sqrt(residual);

  // Mass residual of the recovered plan (the multipliers beta).
  double mass = 0.0;
  for (int x = 0; x < inst.n(); ++x) {
    double rowsum = 0.0;
    for (int y = 0; y < inst.m(); ++y) rowsum += current.edges[inst.edge(x, y)].multiplier;
    const double d = rowsum - inst.target_mass[x];
    mass += d * d;
  }
  for (int y = 0; y < inst.m(); ++y) {
    double colsum = 0.0;
    for (int x = 0; x < inst.n(); ++x) colsum += current.edges[inst.edge(x, y)].multiplier;
    const double d = colsum - inst.source_mass[y];
    mass += d * d;
  }
  row.delta = std::sqrt(mass);
  return row;
}

DualRunReport run_dual(const LinearEqualityInstance& inst, double eta_hat, const StopRule& stop,
                       const DualRunOptions& options) {
  inst.validate();
  stop.validate();
  if (!(eta_hat > 0.0)) throw std::invalid_argument("eta_hat must be positive");

  DualRunReport report;
  report.trace.has_oracle = options.reference_value != nullptr;
  DualState state = make_initial_dual_state(inst, eta_hat);

  for (long k = 0; k < stop.max_iterations; ++k) {
    DualState next = dual_step(inst, state);
    TraceRow row = dual_trace_row(inst, next);
    if (options.reference_value) row.oracle_gap = std::abs(row.objective - *options.reference_value);
    if (options.reference_plan) {
      double sum = 0.0;
      for (size_t e = 0; e < next.edges.size(); ++e) {
        const double d = next.edges[e].multiplier - (*options.reference_plan)[e];
        sum += d * d;
      }
      row.plan_residual = std::sqrt(sum);
    }
    report.trace.rows.push_back(row);
    if (options.record_snapshots) report.snapshots.push_back(next);
    state = std::move(next);
    report.iterations = state.iteration;
    if (row.residual <= stop.residual_tolerance) {
      report.converged = true;
      break;
    }
  }

  report.plan.resize(state.edges.size());
  for (size_t e = 0; e < state.edges.size(); ++e) report.plan[e] = state.edges[e].multiplier;

  // Dual points are shift-indeterminate; report them with min u = 0 and keep
  // the raw values in final_state and the snapshots.
  std::vector<double> w_t(state.edges.size()), w_s(state.edges.size());
  for (size_t e = 0; e < state.edges.size(); ++e) {
    w_t[e] = state.edges[e].proposal_t;
    w_s[e] = state.edges[e].proposal_s;
  }
  const double c = -*std::min_element(state.u.begin(), state.u.end());
  const DualPointShift shifted = shift_solution(state.u, state.v, w_t, w_s, c);
  report.u = shifted.u;
  report.v = shifted.v;
  report.w.resize(state.edges.size());
  for (size_t e = 0; e < state.edges.size(); ++e) report.w[e] = state.edges[e].consensus - c;

  report.final_state = std::move(state);
  return report;
}

EquivalenceReport check_equivalence(const LinearEqualityInstance& inst, double eta,
                                    long iterations, std::optional<double> eta_hat_override) {
  inst.validate();
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const double eta_hat = eta_hat_override.value_or(1.0 / eta);

  const ProblemInstance primal_inst = to_problem_instance(inst);
  PrimalState primal = make_initial_state(primal_inst, eta);
  DualState dual = make_initial_dual_state(inst, eta_hat);

  EquivalenceReport report;
  report.per_iteration_max.reserve(iterations);

  for (long k = 0; k < iterations; ++k) {
    primal = primal_step(primal_inst, primal);
    dual = dual_step(inst, dual);
    double worst = 0.0;
    int worst_edge = -1;
    for (int e = 0; e < static_cast<int>(primal.edges.size()); ++e) {
      const double d = std::max(
          {std::abs(dual.edges[e].lambda_t - primal.edges[e].proposal_t),
           std::abs(dual.edges[e].lambda_s - primal.edges[e].proposal_s),
           std::abs(dual.edges[e].multiplier - primal.edges[e].consensus),
           std::abs(dual.edges[e].consensus - primal.edges[e].multiplier)});
      if (d > worst) {
        worst = d;
        worst_edge = e;
      }
    }
    report.per_iteration_max.push_back(worst);
    if (worst > report.max_deviation) report.max_deviation = worst;
    if (worst > report.tolerance && report.first_bad_iteration < 0) {
      report.first_bad_iteration = k + 1;
      report.first_bad_edge = worst_edge;
    }
  }
  report.ok = report.max_deviation <= report.tolerance;
  return report;
}

DualPointShift shift_solution(const std::vector<double>& u, const std::vector<double>& v,
                              const std::vector<double>& w_t, const std::vector<double>& w_s,
                              double C) {
  DualPointShift out{u, v, w_t, w_s};
  for (double& x : out.u) x += C;
  for (double& x : out.v) x -= C;
  for (double& x : out.w_t) x -= C;
  for (double& x : out.w_s) x -= C;
  return out;
}

CertifyReport certify_optimality(const LinearEqualityInstance& inst, const Plan& plan,
                                 const std::vector<double>& u, const std::vector<double>& v,
                                 const std::vector<double>& w) {
  inst.validate();
  const int n = inst.n(), m = inst.m();
  if (static_cast<int>(plan.size()) != n * m || static_cast<int>(u.size()) != n ||
      static_cast<int>(v.size()) != m || static_cast<int>(w.size()) != n * m)
    throw std::invalid_argument("certify_optimality: dimension mismatch");

  CertifyReport report;
  double primal_value = 0.0;
  for (int e = 0; e < n * m; ++e) primal_value += plan[e] * (inst.gamma[e] + inst.delta[e]);
  double dual_value = 0.0;
  for (int x = 0; x < n; ++x) dual_value += u[x] * inst.target_mass[x];
  for (int y = 0; y < m; ++y) dual_value += v[y] * inst.source_mass[y];
  report.duality_gap = std::abs(primal_value - dual_value);
  report.scale = std::max(1.0, std::abs(primal_value));

  const double support_tol = 1e-6 * report.scale;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      const int e = inst.edge(x, y);
      report.max_dual_violation =
          std::max({report.max_dual_violation, inst.gamma[e] - u[x] - w[e],
                    inst.delta[e] - v[y] + w[e]});
      if (plan[e] > support_tol)
        report.max_slackness_violation =
            std::max(report.max_slackness_violation,
                     std::abs(u[x] + v[y] - inst.gamma[e] - inst.delta[e]));
    }

  for (int x = 0; x < n; ++x) {
    double rowsum = 0.0;
    for (int y = 0; y < m; ++y) rowsum += plan[inst.edge(x, y)];
    report.max_mass_residual =
        std::max(report.max_mass_residual, std::abs(rowsum - inst.target_mass[x]));
  }
  for (int y = 0; y < m; ++y) {
    double colsum = 0.0;
    for (int x = 0; x < n; ++x) colsum += plan[inst.edge(x, y)];
    report.max_mass_residual =
        std::max(report.max_mass_residual, std::abs(colsum - inst.source_mass[y]));
  }

  const double tol = 1e-6 * report.scale;
  report.certified = report.duality_gap <= tol && report.max_dual_violation <= tol &&
                     report.max_slackness_violation <= tol && report.max_mass_residual <= tol;
  return report;
}

}  // namespace otmatch
