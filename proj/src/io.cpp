#include "otmatch/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace otmatch {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& message) {
  throw std::runtime_error(context + ": " + message);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

double require_number(const json& obj, const std::string& field, const std::string& context) {
  if (!obj.contains(field)) fail(context, "missing field '" + field + "'");
  if (!obj[field].is_number()) fail(context, "field '" + field + "' is not a number");
  return obj[field].get<double>();
}

std::string require_string(const json& obj, const std::string& field, const std::string& context) {
  if (!obj.contains(field)) fail(context, "missing field '" + field + "'");
  if (!obj[field].is_string()) fail(context, "field '" + field + "' is not a string");
  return obj[field].get<std::string>();
}

json utility_to_json(const UtilityFn& u) {
  json out;
  out["family"] = to_string(u.kind);
  switch (u.kind) {
    case UtilityKind::linear:
      out["rate"] = u.rate;
      out["offset"] = u.offset;
      break;
    case UtilityKind::quadratic:
      out["rate"] = u.rate;
      out["curvature"] = u.curvature;
      out["offset"] = u.offset;
      break;
    case UtilityKind::log:
      out["rate"] = u.rate;
      break;
    case UtilityKind::threshold:
      out["rate"] = u.rate;
      out["cap"] = u.cap;
      break;
  }
  if (u.cost_rate != 0.0) out["cost_rate"] = u.cost_rate;
  if (u.cost_curvature != 0.0) out["cost_curvature"] = u.cost_curvature;
  return out;
}

UtilityFn utility_from_json(const json& obj, const std::string& context) {
  if (!obj.is_object()) fail(context, "utility is not an object");
  const std::string family = require_string(obj, "family", context);
  UtilityFn u;
  if (family == "linear") {
    u = UtilityFn::linear(require_number(obj, "rate", context),
                          obj.contains("offset") ? require_number(obj, "offset", context) : 0.0);
  } else if (family == "quadratic") {
    u = UtilityFn::quadratic(obj.contains("rate") ? require_number(obj, "rate", context) : 0.0,
                             require_number(obj, "curvature", context),
                             obj.contains("offset") ? require_number(obj, "offset", context) : 0.0);
  } else if (family == "log") {
    u = UtilityFn::log_revenue(require_number(obj, "rate", context));
  } else if (family == "threshold") {
    u = UtilityFn::threshold(require_number(obj, "rate", context),
                             require_number(obj, "cap", context));
  } else {
    fail(context, "unknown utility family '" + family + "'");
  }
  if (obj.contains("cost_rate")) u.cost_rate = require_number(obj, "cost_rate", context);
  if (obj.contains("cost_curvature"))
    u.cost_curvature = require_number(obj, "cost_curvature", context);
  return u;
}

json instance_to_json(const ProblemInstance& inst) {
  json out;
  out["targets"] = json::array();
  for (const auto& t : inst.targets)
    out["targets"].push_back({{"id", t.id}, {"p_l", t.lower}, {"p_h", t.upper}});
  out["sources"] = json::array();
  for (const auto& s : inst.sources)
    out["sources"].push_back({{"id", s.id}, {"q_l", s.lower}, {"q_h", s.upper}});
  out["edges"] = json::array();
  for (int e = 0; e < inst.n_edges(); ++e)
    out["edges"].push_back({{"target", inst.targets[inst.edges[e].target].id},
                            {"source", inst.sources[inst.edges[e].source].id},
                            {"f", utility_to_json(inst.utilities[e].f)},
                            {"g", utility_to_json(inst.utilities[e].g)}});
  return out;
}

ProblemInstance instance_from_json(const json& doc, const std::string& context) {
  if (!doc.is_object()) fail(context, "document is not an object");
  ProblemInstance inst;
  if (!doc.contains("targets") || !doc["targets"].is_array()) fail(context, "missing targets[]");
  if (!doc.contains("sources") || !doc["sources"].is_array()) fail(context, "missing sources[]");
  if (!doc.contains("edges") || !doc["edges"].is_array()) fail(context, "missing edges[]");

  for (const auto& t : doc["targets"]) {
    const std::string id = require_string(t, "id", context + ": target");
    const std::string who = context + ": target '" + id + "'";
    inst.targets.push_back({id, require_number(t, "p_l", who), require_number(t, "p_h", who)});
  }
  for (const auto& s : doc["sources"]) {
    const std::string id = require_string(s, "id", context + ": source");
    const std::string who = context + ": source '" + id + "'";
    inst.sources.push_back({id, require_number(s, "q_l", who), require_number(s, "q_h", who)});
  }
  for (const auto& e : doc["edges"]) {
    const std::string tid = require_string(e, "target", context + ": edge");
    const std::string sid = require_string(e, "source", context + ": edge");
    const std::string who = context + ": edge " + tid + "/" + sid;
    const int x = inst.target_index(tid);
    const int y = inst.source_index(sid);
    if (x < 0) fail(who, "unknown target");
    if (y < 0) fail(who, "unknown source");
    if (!e.contains("f") || !e.contains("g")) fail(who, "missing utility f or g");
    inst.edges.push_back({x, y});
    inst.utilities.push_back(
        {utility_from_json(e["f"], who + " f"), utility_from_json(e["g"], who + " g")});
  }
  inst.finalize();
  return inst;
}

json parse_json(const std::string& text, const std::string& context) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(context, "malformed JSON document");
  return doc;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Mutation mutation_from_json(const json& obj, const std::string& context) {
  const std::string op = require_string(obj, "op", context);
  if (op == "set_bounds") {
    return BoundsChange{require_string(obj, "agent", context),
                        require_number(obj, "lower", context),
                        require_number(obj, "upper", context)};
  }
  if (op == "set_utility") {
    UtilityChange change;
    change.target = require_string(obj, "target", context);
    change.source = require_string(obj, "source", context);
    if (obj.contains("f")) change.f = utility_from_json(obj["f"], context + " f");
    if (obj.contains("g")) change.g = utility_from_json(obj["g"], context + " g");
    if (!change.f && !change.g) fail(context, "set_utility requires f or g");
    return change;
  }
  if (op == "add_edge") {
    if (!obj.contains("f") || !obj.contains("g")) fail(context, "add_edge requires f and g");
    return EdgeAddition{require_string(obj, "target", context),
                        require_string(obj, "source", context),
                        utility_from_json(obj["f"], context + " f"),
                        utility_from_json(obj["g"], context + " g")};
  }
  if (op == "remove_edge")
    return EdgeRemoval{require_string(obj, "target", context),
                       require_string(obj, "source", context)};
  if (op == "add_agent") {
    AgentAddition add;
    const std::string side = require_string(obj, "side", context);
    if (side != "target" && side != "source") fail(context, "side must be target or source");
    add.is_target = side == "target";
    add.id = require_string(obj, "id", context);
    add.lower = require_number(obj, "lower", context);
    add.upper = require_number(obj, "upper", context);
    if (!obj.contains("edges") || !obj["edges"].is_array() || obj["edges"].empty())
      fail(context, "add_agent requires a non-empty edges[] list");
    for (const auto& inc : obj["edges"]) {
      if (!inc.contains("f") || !inc.contains("g"))
        fail(context, "add_agent edge requires f and g");
      add.edges.push_back({require_string(inc, "peer", context),
                           utility_from_json(inc["f"], context + " f"),
                           utility_from_json(inc["g"], context + " g")});
    }
    return add;
  }
  if (op == "remove_agent") return AgentRemoval{require_string(obj, "id", context)};
  fail(context, "unknown op '" + op + "'");
}

json mutation_to_json(const Mutation& mutation) {
  json out;
  if (const auto* bounds = std::get_if<BoundsChange>(&mutation)) {
    out["op"] = "set_bounds";
    out["agent"] = bounds->agent;
    out["lower"] = bounds->lower;
    out["upper"] = bounds->upper;
  } else if (const auto* util = std::get_if<UtilityChange>(&mutation)) {
    out["op"] = "set_utility";
    out["target"] = util->target;
    out["source"] = util->source;
    if (util->f) out["f"] = utility_to_json(*util->f);
    if (util->g) out["g"] = utility_to_json(*util->g);
  } else if (const auto* add = std::get_if<EdgeAddition>(&mutation)) {
    out["op"] = "add_edge";
    out["target"] = add->target;
    out["source"] = add->source;
    out["f"] = utility_to_json(add->f);
    out["g"] = utility_to_json(add->g);
  } else if (const auto* rem = std::get_if<EdgeRemoval>(&mutation)) {
    out["op"] = "remove_edge";
    out["target"] = rem->target;
    out["source"] = rem->source;
  } else if (const auto* agent = std::get_if<AgentAddition>(&mutation)) {
    out["op"] = "add_agent";
    out["side"] = agent->is_target ? "target" : "source";
    out["id"] = agent->id;
    out["lower"] = agent->lower;
    out["upper"] = agent->upper;
    out["edges"] = json::array();
    for (const auto& inc : agent->edges)
      out["edges"].push_back({{"peer", inc.peer},
                              {"f", utility_to_json(inc.f)},
                              {"g", utility_to_json(inc.g)}});
  } else if (const auto* removal = std::get_if<AgentRemoval>(&mutation)) {
    out["op"] = "remove_agent";
    out["id"] = removal->id;
  }
  return out;
}

}  // namespace

ProblemInstance instance_from_string(const std::string& text, const std::string& context) {
  return instance_from_json(parse_json(text, context), context);
}

ProblemInstance parse_instance(const std::string& path) {
  return instance_from_string(read_file(path), path);
}

std::string instance_to_string(const ProblemInstance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

void serialize_instance(const ProblemInstance& inst, const std::string& path) {
  write_file(path, instance_to_string(inst));
}

EventScript script_from_string(const std::string& text, const ProblemInstance& initial,
                               const std::string& context) {
  const json doc = parse_json(text, context);
  if (!doc.is_object() || !doc.contains("events") || !doc["events"].is_array())
    fail(context, "missing events[]");
  EventScript script;
  for (size_t i = 0; i < doc["events"].size(); ++i) {
    const json& event = doc["events"][i];
    const std::string who = context + ": event #" + std::to_string(i);
    if (!event.contains("at") || !event["at"].is_number_integer())
      fail(who, "missing integer field 'at'");
    script.events.push_back(
        {event["at"].get<long>(), mutation_from_json(event, who)});
  }
  validate_script(initial, script);
  return script;
}

EventScript parse_script(const std::string& path, const ProblemInstance& initial) {
  return script_from_string(read_file(path), initial, path);
}

std::string script_to_string(const EventScript& script) {
  json out;
  out["events"] = json::array();
  for (const auto& event : script.events) {
    json e = mutation_to_json(event.mutation);
    e["at"] = event.at;
    out["events"].push_back(std::move(e));
  }
  return out.dump(2) + "\n";
}

std::string trace_to_string(const IterationTrace& trace) {
  if (trace.rows.empty()) throw std::invalid_argument("emit_trace: empty trace");
  std::string out = "k,objective,primal_residual,consensus_delta";
  if (trace.has_oracle) out += ",oracle_gap,plan_residual";
  out += "\n";
  for (const auto& row : trace.rows) {
    if (row.event) out += "# event k=" + std::to_string(row.k) + " " + row.note + "\n";
    out += std::to_string(row.k) + "," + format_double(row.objective) + "," +
           format_double(row.residual) + "," + format_double(row.delta);
    if (trace.has_oracle)
      out += "," + format_double(row.oracle_gap) + "," + format_double(row.plan_residual);
    out += "\n";
  }
  return out;
}

void emit_trace(const IterationTrace& trace, const std::string& path) {
  write_file(path, trace_to_string(trace));
}

namespace {

class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on the open interval (0,1): top 53 bits, zeros redrawn.
  double open01() {
    for (;;) {
      const double v = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
      if (v != 0.0) return v;
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace

ProblemInstance generate_random_instance(int n_targets, int m_sources, std::uint64_t seed,
                                         UtilityFamily family, BoundMode mode) {
  if (n_targets < 1 || m_sources < 1)
    throw std::invalid_argument("generate_random_instance: need at least one agent per side");
  UniformRng rng(seed);
  ProblemInstance inst;

  if (mode == BoundMode::equality) {
    std::vector<double> p(n_targets), q(m_sources);
    double psum = 0.0, qsum = 0.0;
    for (double& v : p) psum += (v = rng.open01());
    for (double& v : q) qsum += (v = rng.open01());
    for (int x = 0; x < n_targets; ++x) {
      const double mass = p[x] / psum;
      inst.targets.push_back({"t" + std::to_string(x), mass, mass});
    }
    for (int y = 0; y < m_sources; ++y) {
      const double mass = q[y] / qsum;
      inst.sources.push_back({"s" + std::to_string(y), mass, mass});
    }
  } else {
    for (int x = 0; x < n_targets; ++x)
      inst.targets.push_back(
          {"t" + std::to_string(x), 0.5 * rng.open01() / n_targets, 100.0});
    for (int y = 0; y < m_sources; ++y)
      inst.sources.push_back({"s" + std::to_string(y), 0.0, 0.5 + rng.open01()});
  }

  auto draw_utility = [&](UtilityFamily side_family) {
    if (side_family == UtilityFamily::mixed)
      side_family = rng.open01() < 0.5 ? UtilityFamily::linear : UtilityFamily::quadratic;
    if (side_family == UtilityFamily::linear) return UtilityFn::linear(rng.open01());
    return UtilityFn::quadratic(0.0, rng.open01());
  };

  for (int x = 0; x < n_targets; ++x)
    for (int y = 0; y < m_sources; ++y) {
      inst.edges.push_back({x, y});
      const UtilityFn f = draw_utility(family);
      const UtilityFn g = draw_utility(family);
      inst.utilities.push_back({f, g});
    }
  inst.finalize();
  return inst;
}

Plan parse_plan(const std::string& path, const ProblemInstance& inst) {
  const json doc = parse_json(read_file(path), path);
  if (!doc.is_object() || !doc.contains("plan") || !doc["plan"].is_array())
    fail(path, "missing plan[]");
  Plan plan(inst.n_edges(), 0.0);
  std::vector<char> seen(inst.n_edges(), 0);
  for (const auto& entry : doc["plan"]) {
    const std::string tid = require_string(entry, "target", path);
    const std::string sid = require_string(entry, "source", path);
    const int x = inst.target_index(tid);
    const int y = inst.source_index(sid);
    const int e = (x >= 0 && y >= 0) ? inst.edge_index(x, y) : -1;
    if (e < 0) fail(path, "plan entry " + tid + "/" + sid + " is not an instance edge");
    if (seen[e]) fail(path, "duplicate plan entry " + tid + "/" + sid);
    seen[e] = 1;
    plan[e] = require_number(entry, "amount", path + ": edge " + tid + "/" + sid);
  }
  for (int e = 0; e < inst.n_edges(); ++e)
    if (!seen[e]) fail(path, "plan is missing edge " + inst.edge_name(e));
  return plan;
}

void serialize_plan(const ProblemInstance& inst, const Plan& plan, const std::string& path) {
  json out;
  out["plan"] = json::array();
  for (int e = 0; e < inst.n_edges(); ++e)
    out["plan"].push_back({{"target", inst.targets[inst.edges[e].target].id},
                           {"source", inst.sources[inst.edges[e].source].id},
                           {"amount", plan[e]}});
  write_file(path, out.dump(2) + "\n");
}

DualPointFile parse_dual_point(const std::string& path, const ProblemInstance& inst) {
  const json doc = parse_json(read_file(path), path);
  DualPointFile out;
  if (!doc.contains("u") || !doc.contains("v") || !doc.contains("w"))
    fail(path, "dual point requires u, v, and w");
  out.u.resize(inst.n_targets());
  out.v.resize(inst.n_sources());
  out.w.assign(inst.n_edges(), 0.0);
  for (const auto& t : inst.targets) {
    if (!doc["u"].contains(t.id)) fail(path, "u is missing target '" + t.id + "'");
    out.u[inst.target_index(t.id)] = doc["u"][t.id].get<double>();
  }
  for (const auto& s : inst.sources) {
    if (!doc["v"].contains(s.id)) fail(path, "v is missing source '" + s.id + "'");
    out.v[inst.source_index(s.id)] = doc["v"][s.id].get<double>();
  }
  std::vector<char> seen(inst.n_edges(), 0);
  for (const auto& entry : doc["w"]) {
    const std::string tid = require_string(entry, "target", path);
    const std::string sid = require_string(entry, "source", path);
    const int e = inst.edge_index(inst.target_index(tid), inst.source_index(sid));
    if (e < 0) fail(path, "w entry " + tid + "/" + sid + " is not an instance edge");
    seen[e] = 1;
    out.w[e] = require_number(entry, "value", path);
  }
  for (int e = 0; e < inst.n_edges(); ++e)
    if (!seen[e]) fail(path, "w is missing edge " + inst.edge_name(e));
  return out;
}

void serialize_dual_point(const ProblemInstance& inst, const std::vector<double>& u,
                          const std::vector<double>& v, const std::vector<double>& w,
                          const std::string& path) {
  json out;
  for (int x = 0; x < inst.n_targets(); ++x) out["u"][inst.targets[x].id] = u[x];
  for (int y = 0; y < inst.n_sources(); ++y) out["v"][inst.sources[y].id] = v[y];
  out["w"] = json::array();
  for (int e = 0; e < inst.n_edges(); ++e)
    out["w"].push_back({{"target", inst.targets[inst.edges[e].target].id},
                        {"source", inst.sources[inst.edges[e].source].id},
                        {"value", w[e]}});
  write_file(path, out.dump(2) + "\n");
}

}  // namespace otmatch
