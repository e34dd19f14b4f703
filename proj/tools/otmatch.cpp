#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "otmatch/dual.hpp"
#include "otmatch/instance.hpp"
#include "otmatch/io.hpp"
#include "otmatch/online.hpp"
#include "otmatch/oracle.hpp"
#include "otmatch/primal.hpp"

namespace {

using namespace otmatch;

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kNotConverged = 2;

ProblemInstance load_validated(const std::string& path) {
  ProblemInstance inst = parse_instance(path);
  const ValidationReport report = validate_instance(inst);
  if (!report.ok()) {
    std::string message = path + ": invalid instance:";
    for (const auto& v : report.violations) message += "\n  - " + v;
    throw std::runtime_error(message);
  }
  return inst;
}

// Oracle selection: the transportation LP for linear equality instances,
// otherwise the grid enumerator (at most 4 free dimensions).
OracleResult best_oracle(const ProblemInstance& inst, double resolution) {
  try {
    return solve_lp_centralized(linear_equality_from(inst));
  } catch (const std::invalid_argument&) {
    return grid_search_oracle(inst, resolution);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed discrete optimal transport: consensus bargaining on amounts "
               "(primal) or prices (dual), with centralized oracles for verification"};
  app.require_subcommand(1);

  std::string instance_path, script_path, trace_path, plan_path, dual_path, out_path;
  double eta = 1.0, eta_hat = 1.0, tol = 1e-8, resolution = 1e-4;
  long max_iter = 20000, iterations = 500;
  bool with_oracle = false;
  int n_targets = 2, m_sources = 2;
  std::uint64_t seed = 0;
  std::string family = "linear", mode = "equality", method = "auto";

  auto* solve_primal = app.add_subcommand("solve-primal", "Run the amount-bargaining solver");
  solve_primal->add_option("--instance", instance_path)->required();
  solve_primal->add_option("--eta", eta);
  solve_primal->add_option("--max-iter", max_iter);
  solve_primal->add_option("--tol", tol);
  solve_primal->add_option("--trace", trace_path);
  solve_primal->add_option("--plan", plan_path);
  solve_primal->add_option("--resolution", resolution);
  solve_primal->add_flag("--oracle", with_oracle);

  auto* solve_dual = app.add_subcommand("solve-dual", "Run the price-bargaining solver "
                                                      "(linear equality instances)");
  solve_dual->add_option("--instance", instance_path)->required();
  solve_dual->add_option("--eta-hat", eta_hat);
  solve_dual->add_option("--max-iter", max_iter);
  solve_dual->add_option("--tol", tol);
  solve_dual->add_option("--trace", trace_path);
  solve_dual->add_option("--plan", plan_path);
  solve_dual->add_option("--dual", dual_path);
  solve_dual->add_flag("--oracle", with_oracle);

  auto* solve_online = app.add_subcommand("solve-online", "Run the online solver with a "
                                                          "timed mutation script");
  solve_online->add_option("--instance", instance_path)->required();
  solve_online->add_option("--script", script_path)->required();
  solve_online->add_option("--eta", eta);
  solve_online->add_option("--iterations", iterations)->required();
  solve_online->add_option("--trace", trace_path);
  solve_online->add_option("--resolution", resolution);
  solve_online->add_flag("--oracle", with_oracle);

  auto* oracle_cmd = app.add_subcommand("oracle", "Centralized reference solution");
  oracle_cmd->add_option("--instance", instance_path)->required();
  oracle_cmd->add_option("--method", method)->check(CLI::IsMember({"auto", "lp", "grid"}));
  oracle_cmd->add_option("--resolution", resolution);
  oracle_cmd->add_option("-o,--out", out_path);

  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--targets", n_targets)->required();
  gen->add_option("--sources", m_sources)->required();
  gen->add_option("--seed", seed);
  gen->add_option("--family", family)->check(CLI::IsMember({"linear", "quadratic", "mixed"}));
  gen->add_option("--mode", mode)->check(CLI::IsMember({"equality", "bounded"}));
  gen->add_option("-o,--out", out_path)->required();

  auto* equivalence = app.add_subcommand("check-equivalence",
                                         "Compare primal and dual trajectories");
  equivalence->add_option("--instance", instance_path)->required();
  equivalence->add_option("--eta", eta);
  std::optional<double> eta_hat_override;
  equivalence->add_option("--eta-hat", eta_hat_override,
                          "Override the implied 1/eta (negative control)");
  equivalence->add_option("--iterations", iterations);

  auto* certify = app.add_subcommand("certify", "Certify a plan against a dual point");
  certify->add_option("--instance", instance_path)->required();
  certify->add_option("--plan", plan_path)->required();
  certify->add_option("--dual", dual_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_primal->parsed()) {
      const ProblemInstance inst = load_validated(instance_path);
      RunOptions options;
      OracleResult reference;
      if (with_oracle) {
        reference = best_oracle(inst, resolution);
        options.reference_value = &reference.value;
        options.reference_plan = &reference.plan;
      }
      StopRule stop{max_iter, tol, tol};
      const RunReport report = run_primal(inst, eta, stop, nullptr, options);
      if (!trace_path.empty()) emit_trace(report.trace, trace_path);
      if (!plan_path.empty()) serialize_plan(inst, report.plan, plan_path);
      std::printf("iterations=%ld objective=%.12g converged=%s%s%s\n", report.iterations,
                  total_surplus(inst, report.plan), report.converged ? "yes" : "no",
                  report.diverged ? " diverged" : "",
                  report.likely_infeasible ? " likely-infeasible" : "");
      return report.converged ? kOk : kNotConverged;
    }

    if (solve_dual->parsed()) {
      const LinearEqualityInstance inst = linear_equality_from(load_validated(instance_path));
      DualRunOptions options;
      OracleResult reference;
      if (with_oracle) {
        reference = solve_lp_centralized(inst);
        options.reference_value = &reference.value;
        options.reference_plan = &reference.plan;
      }
      StopRule stop{max_iter, tol, tol};
      const DualRunReport report = run_dual(inst, eta_hat, stop, options);
      if (!trace_path.empty()) emit_trace(report.trace, trace_path);
      const ProblemInstance as_problem = to_problem_instance(inst);
      if (!plan_path.empty()) serialize_plan(as_problem, report.plan, plan_path);
      if (!dual_path.empty())
        serialize_dual_point(as_problem, report.u, report.v, report.w, dual_path);
      std::printf("iterations=%ld objective=%.12g converged=%s\n", report.iterations,
                  report.trace.rows.back().objective, report.converged ? "yes" : "no");
      return report.converged ? kOk : kNotConverged;
    }

    if (solve_online->parsed()) {
      const ProblemInstance inst = load_validated(instance_path);
      const EventScript script = parse_script(script_path, inst);
      OnlineOptions options;
      options.attach_phase_oracle = with_oracle;
      options.oracle_resolution = resolution;
      const OnlineReport report = run_online(inst, script, eta, iterations, options);
      if (!trace_path.empty()) emit_trace(report.trace, trace_path);
      std::printf("iterations=%ld events=%zu final_objective=%.12g\n", iterations,
                  report.event_iterations.size(), report.trace.rows.back().objective);
      return kOk;
    }

    if (oracle_cmd->parsed()) {
      const ProblemInstance inst = load_validated(instance_path);
      OracleResult result;
      if (method == "lp")
        result = solve_lp_centralized(linear_equality_from(inst));
      else if (method == "grid")
        result = grid_search_oracle(inst, resolution);
      else
        result = best_oracle(inst, resolution);
      std::printf("method=%s value=%.17g\n", result.method.c_str(), result.value);
      if (!out_path.empty()) serialize_plan(inst, result.plan, out_path);
      return kOk;
    }

    if (gen->parsed()) {
      const UtilityFamily fam = family == "linear"      ? UtilityFamily::linear
                                : family == "quadratic" ? UtilityFamily::quadratic
                                                        : UtilityFamily::mixed;
      const BoundMode bm = mode == "equality" ? BoundMode::equality : BoundMode::bounded;
      const ProblemInstance inst = generate_random_instance(n_targets, m_sources, seed, fam, bm);
      serialize_instance(inst, out_path);
      std::printf("wrote %s (%d targets, %d sources, %d edges)\n", out_path.c_str(),
                  inst.n_targets(), inst.n_sources(), inst.n_edges());
      return kOk;
    }

    if (equivalence->parsed()) {
      const LinearEqualityInstance inst = linear_equality_from(load_validated(instance_path));
      const EquivalenceReport report = check_equivalence(
          inst, eta, iterations,
          eta_hat_override ? std::optional<double>(*eta_hat_override) : std::nullopt);
      std::printf("max_deviation=%.3e tolerance=%.1e %s\n", report.max_deviation,
                  report.tolerance, report.ok ? "MATCH" : "MISMATCH");
      if (!report.ok)
        std::printf("first offending iteration=%ld edge=%d\n", report.first_bad_iteration,
                    report.first_bad_edge);
      return report.ok ? kOk : kNotConverged;
    }

    if (certify->parsed()) {
      const ProblemInstance general = load_validated(instance_path);
      const LinearEqualityInstance inst = linear_equality_from(general);
      const Plan plan = parse_plan(plan_path, general);
      const DualPointFile dual = parse_dual_point(dual_path, general);
      const CertifyReport report = certify_optimality(inst, plan, dual.u, dual.v, dual.w);
      std::printf("duality_gap=%.3e dual_violation=%.3e slackness_violation=%.3e "
                  "mass_residual=%.3e -> %s\n",
                  report.duality_gap, report.max_dual_violation,
                  report.max_slackness_violation, report.max_mass_residual,
                  report.certified ? "CERTIFIED" : "NOT OPTIMAL");
      return report.certified ? kOk : kNotConverged;
    }
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kError;
  }
  return kError;
}
