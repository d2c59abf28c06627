#include "piedge/offload.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace piedge {

namespace {

void require(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw ValidationError("'" + field + "' " + rule);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void validate(const VehicleState& v) {
  require(finite(v.x), "x", "must be finite");
  require(finite(v.y), "y", "must be finite");
  require(finite(v.speed) && v.speed >= 0.0, "v", "must be >= 0");
  require(finite(v.heading), "theta", "must be finite");
}

void validate(const CloudNode& n) {
  require(!n.id.empty(), "id", "must be non-empty");
  require(finite(n.x), "x", "must be finite");
  require(finite(n.y), "y", "must be finite");
  require(finite(n.range) && n.range > 0.0, "r_range", "must be > 0");
  require(finite(n.compute_speed) && n.compute_speed > 0.0, "f_off", "must be > 0");
  require(finite(n.capacity) && n.capacity >= 0.0, "w_avail", "must be >= 0");
  require(n.bandwidth > 0.0 && !std::isnan(n.bandwidth), "bandwidth", "must be > 0");
}

void validate(const CostParams& p) {
  require(finite(p.workload) && p.workload > 0.0, "w", "must be > 0");
  require(finite(p.local_speed) && p.local_speed > 0.0, "f_l", "must be > 0");
  require(finite(p.alpha) && p.alpha >= 0.0, "alpha", "must be >= 0");
  require(finite(p.beta) && p.beta >= 0.0, "beta", "must be >= 0");
  require(p.eta >= 0.0 && p.eta <= 1.0, "eta", "must be in [0, 1]");
  require(finite(p.data_in) && p.data_in >= 0.0, "d_in", "must be >= 0");
  require(finite(p.data_out) && p.data_out >= 0.0, "d_out", "must be >= 0");
  require(finite(p.power_in) && p.power_in >= 0.0, "p_in", "must be >= 0");
  require(finite(p.power_out) && p.power_out >= 0.0, "p_out", "must be >= 0");
}

double normalize_heading(double heading) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double h = std::fmod(heading, kTwoPi);
  if (h < 0.0) h += kTwoPi;
  return h >= kTwoPi ? 0.0 : h;
}

Dwell dwell_time(const VehicleState& vehicle, const CloudNode& node) {
  const double dx = vehicle.x - node.x;
  const double dy = vehicle.y - node.y;
  const double c = dx * dx + dy * dy - node.range * node.range;
  if (c > 0.0) return Dwell::finite(0.0);
  if (vehicle.speed == 0.0) return Dwell::unbounded();

  // v^2 t^2 + 2 v (dx sin h + dy cos h) t + c = 0 with c <= 0, so the roots
  // straddle zero. Pick the positive one without cancellation.
  const double h = normalize_heading(vehicle.heading);
  const double a = vehicle.speed * vehicle.speed;
  const double b = 2.0 * vehicle.speed * (dx * std::sin(h) + dy * std::cos(h));
  const double root = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  if (b < 0.0) return Dwell::finite((-b + root) / (2.0 * a));
  const double q = -0.5 * (b + root);
  return Dwell::finite(q == 0.0 ? 0.0 : c / q);
}

CostReport local_cost(const CostParams& p) {
  CostReport r;
  r.time = p.workload / p.local_speed;
  r.energy = (p.alpha + p.beta * p.local_speed * p.local_speed * p.local_speed) * p.workload / p.local_speed;
  r.cost = p.eta * r.time + (1.0 - p.eta) * r.energy;
  return r;
}

CostReport offload_cost(const CostParams& p, const CloudNode& node) {
  CostReport r;
  r.time = p.workload / node.compute_speed + p.data_in / node.bandwidth + p.data_out / node.bandwidth;
  r.energy = p.power_in * p.data_in / node.bandwidth + p.power_out * p.data_out / node.bandwidth;
  r.cost = p.eta * r.time + (1.0 - p.eta) * r.energy;
  return r;
}

std::string to_string(Rejection reason) {
  switch (reason) {
    case Rejection::kNone: return "none";
    case Rejection::kNotCovered: return "not_covered";
    case Rejection::kInsufficientCapacity: return "insufficient_capacity";
    case Rejection::kNotBeneficial: return "not_beneficial";
    case Rejection::kLeavesCoverage: return "leaves_coverage";
  }
  return "?";
}

OffloadDecision select_node(const VehicleState& vehicle, const std::vector<CloudNode>& nodes,
                            const CostParams& params, SelectOptions options) {
  validate(vehicle);
  validate(params);
  for (const auto& n : nodes) validate(n);

  OffloadDecision decision;
  decision.local = local_cost(params);
  decision.nodes.reserve(nodes.size());
  for (const auto& n : nodes) {
    NodeReport report;
    report.id = n.id;
    report.dwell = dwell_time(vehicle, n);
    report.offload = offload_cost(params, n);
    const bool beneficial = report.offload.cost < decision.local.cost && report.offload.time < decision.local.time;
    if (!report.dwell.exceeds(0.0)) report.reason = Rejection::kNotCovered;
    else if (n.capacity < params.workload) report.reason = Rejection::kInsufficientCapacity;
    else if (!beneficial) report.reason = Rejection::kNotBeneficial;
    else if (options.require_coverage && !report.dwell.at_least(report.offload.time))
      report.reason = Rejection::kLeavesCoverage;
    report.eligible = report.reason == Rejection::kNone;
    decision.nodes.push_back(std::move(report));
  }

  std::stable_sort(decision.nodes.begin(), decision.nodes.end(), [](const NodeReport& a, const NodeReport& b) {
    if (a.dwell != b.dwell) return a.dwell > b.dwell;
    return a.id < b.id;
  });
  for (const auto& r : decision.nodes) {
    if (r.eligible) {
      decision.node = r.id;
      break;
    }
  }
  return decision;
}

namespace {

using nlohmann::json;

double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError("'" + std::string(key) + "' missing in " + where);
  if (!obj[key].is_number()) throw ValidationError("'" + std::string(key) + "' must be a number in " + where);
  return obj[key].get<double>();
}

json cost_json(const CostReport& r) { return json{{"time", r.time}, {"energy", r.energy}, {"cost", r.cost}}; }

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed scenario JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("scenario must be a JSON object");
  for (const char* key : {"vehicle", "params"})
    if (!doc.contains(key) || !doc[key].is_object())
      throw ValidationError("'" + std::string(key) + "' must be an object");

  Scenario s;
  const auto& v = doc["vehicle"];
  s.vehicle = {number(v, "x", "vehicle"), number(v, "y", "vehicle"), number(v, "v", "vehicle"),
               number(v, "theta", "vehicle")};
  validate(s.vehicle);

  const auto& p = doc["params"];
  s.params = {number(p, "w", "params"),     number(p, "f_l", "params"),   number(p, "alpha", "params"),
              number(p, "beta", "params"),  number(p, "eta", "params"),   number(p, "d_in", "params"),
              number(p, "d_out", "params"), number(p, "p_in", "params"),  number(p, "p_out", "params")};
  validate(s.params);

  if (doc.contains("nodes")) {
    if (!doc["nodes"].is_array()) throw ValidationError("'nodes' must be an array");
    std::size_t i = 0;
    for (const auto& n : doc["nodes"]) {
      const std::string where = "nodes[" + std::to_string(i++) + "]";
      if (!n.is_object()) throw ValidationError(where + " must be an object");
      CloudNode node;
      if (!n.contains("id") || !n["id"].is_string()) throw ValidationError("'id' must be a string in " + where);
      node.id = n["id"].get<std::string>();
      node.x = number(n, "x", where);
      node.y = number(n, "y", where);
      node.range = number(n, "r_range", where);
      node.compute_speed = number(n, "f_off", where);
      node.capacity = number(n, "w_avail", where);
      node.bandwidth = number(n, "bandwidth", where);
      try {
        validate(node);
      } catch (const ValidationError& e) {
        throw ValidationError(std::string(e.what()) + " in " + where);
      }
      s.nodes.push_back(std::move(node));
    }
  }
  return s;
}

std::string decision_to_json(const OffloadDecision& decision) {
  json nodes = json::array();
  for (const auto& r : decision.nodes) {
    json dwell = r.dwell.is_unbounded() ? json("unbounded") : json(r.dwell.seconds());
    nodes.push_back(json{{"id", r.id},
                         {"dwell", dwell},
                         {"offload", cost_json(r.offload)},
                         {"eligible", r.eligible},
                         {"rejection", to_string(r.reason)}});
  }
  json doc{{"choice", decision.node ? *decision.node : std::string("local")},
           {"local", cost_json(decision.local)},
           {"nodes", nodes}};
  return doc.dump(2) + "\n";
}

}  // namespace piedge
