#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otmatch/dual.hpp"
#include "otmatch/instance.hpp"
#include "otmatch/online.hpp"
#include "otmatch/trace.hpp"

namespace otmatch {

/// Instance files are JSON documents with targets[], sources[], and edges[]
/// (utilities keyed by edge). Round-trips are lossless; parse errors carry
/// the file and the offending agent or edge.
ProblemInstance parse_instance(const std::string& path);
ProblemInstance instance_from_string(const std::string& text, const std::string& context);
void serialize_instance(const ProblemInstance& inst, const std::string& path);
std::string instance_to_string(const ProblemInstance& inst);

/// Script files are JSON lists of timestamped mutations; the script is
/// validated against the initial instance at load.
EventScript parse_script(const std::string& path, const ProblemInstance& initial);
std::string script_to_string(const EventScript& script);
EventScript script_from_string(const std::string& text, const ProblemInstance& initial,
                               const std::string& context);

/// CSV trace: header k,objective,primal_residual,consensus_delta and, when
/// an oracle is attached, oracle_gap,plan_residual. Numbers are written with
/// 17 significant digits so downstream comparisons are exact. Event rows are
/// preceded by a '#' marker line. Throws on an empty trace.
void emit_trace(const IterationTrace& trace, const std::string& path);
std::string trace_to_string(const IterationTrace& trace);

enum class UtilityFamily { linear, quadratic, mixed };
enum class BoundMode { equality, bounded };

/// Deterministic random instances on the complete bipartite graph, driven by
/// a seeded mt19937_64 (doubles from the top 53 bits, zeros redrawn).
///
/// equality mode: masses are uniform(0,1) normalized to total 1 per side.
/// bounded mode: p_h = 100 and q_l = 0 for everyone; p_l uniform on
/// (0, 0.5/n_targets), q_h = 0.5 + uniform(0,1), so the sufficiency
/// condition holds by construction.
///
/// linear utilities are rate*a with rates uniform(0,1); quadratic ones are
/// -curvature*a^2 with curvature uniform(0,1) and zero offset; mixed draws a
/// fair coin per edge side.
ProblemInstance generate_random_instance(int n_targets, int m_sources, std::uint64_t seed,
                                         UtilityFamily family, BoundMode mode);

/// Plan files: {"plan": [{"target", "source", "amount"}]}, keyed exactly by
/// the instance edges.
Plan parse_plan(const std::string& path, const ProblemInstance& inst);
void serialize_plan(const ProblemInstance& inst, const Plan& plan, const std::string& path);

/// Dual point files: {"u": {id: value}, "v": {id: value},
/// "w": [{"target","source","value"}]}.
struct DualPointFile {
  std::vector<double> u, v, w;
};
DualPointFile parse_dual_point(const std::string& path, const ProblemInstance& inst);
void serialize_dual_point(const ProblemInstance& inst, const std::vector<double>& u,
                          const std::vector<double>& v, const std::vector<double>& w,
                          const std::string& path);

}  // namespace otmatch
