#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "piedge/workload.hpp"

namespace piedge {

/// Client vehicle. Heading is measured so that motion is
/// (speed * sin(heading), speed * cos(heading)) per second, i.e. 0 points
/// along +Y and pi/2 along +X.
struct VehicleState {
  double x = 0.0;        ///< m
  double y = 0.0;        ///< m
  double speed = 0.0;    ///< m/s
  double heading = 0.0;  ///< rad
};

struct CloudNode {
  std::string id;
  double x = 0.0;              ///< m
  double y = 0.0;              ///< m
  double range = 1.0;          ///< communication radius, m
  double compute_speed = 1.0;  ///< instructions/s
  double capacity = 0.0;       ///< remaining instructions the node can take
  double bandwidth = 1.0;      ///< bytes/s
};

/// Task and client power model. The weighted cost adds seconds and joules as
/// they are; callers wanting a different balance should pre-scale units.
struct CostParams {
  double workload = 1.0;     ///< instructions
  double local_speed = 1.0;  ///< instructions/s
  double alpha = 0.0;        ///< static power, W
  double beta = 0.0;         ///< dynamic power coefficient, W/(instr/s)^3
  double eta = 0.5;          ///< weight of time versus energy, in [0, 1]
  double data_in = 0.0;      ///< bytes sent to the node
  double data_out = 0.0;     ///< bytes received back
  double power_in = 0.0;     ///< radio power while sending, W
  double power_out = 0.0;    ///< radio power while receiving, W
};

// Each throws ValidationError naming the offending field by its scenario
// JSON key (e.g. "bandwidth", "eta").
void validate(const VehicleState& vehicle);
void validate(const CloudNode& node);
void validate(const CostParams& params);

/// Heading folded into [0, 2*pi).
double normalize_heading(double heading);

/// Time left inside a node's range; unbounded for a parked covered client.
class Dwell {
 public:
  static Dwell finite(double seconds) { return Dwell(seconds, false); }
  static Dwell unbounded() { return Dwell(0.0, true); }

  bool is_unbounded() const noexcept { return unbounded_; }
  /// Only meaningful when finite.
  double seconds() const noexcept { return seconds_; }

  /// Unbounded sorts above every finite value.
  friend std::partial_ordering operator<=>(const Dwell& a, const Dwell& b) {
    if (a.unbounded_ || b.unbounded_) return a.unbounded_ <=> b.unbounded_;
    return a.seconds_ <=> b.seconds_;
  }
  friend bool operator==(const Dwell&, const Dwell&) = default;

  bool exceeds(double seconds) const noexcept { return unbounded_ || seconds_ > seconds; }
  bool at_least(double seconds) const noexcept { return unbounded_ || seconds_ >= seconds; }

 private:
  Dwell(double s, bool u) : seconds_(s), unbounded_(u) {}
  double seconds_;
  bool unbounded_;
};

/// Exit time along straight-line motion: the positive root of
/// |p + t*v*(sin h, cos h) - c| = R. Zero when the client is outside the
/// range now.
Dwell dwell_time(const VehicleState& vehicle, const CloudNode& node);

struct CostReport {
  double time = 0.0;    ///< s
  double energy = 0.0;  ///< J
  double cost = 0.0;    ///< eta*time + (1-eta)*energy
};

/// t = w/f_L, e = (alpha + beta*f_L^3) * t.
CostReport local_cost(const CostParams& params);

/// t = w/f_off + (D_in + D_out)/r, e = (P_in*D_in + P_out*D_out)/r.
CostReport offload_cost(const CostParams& params, const CloudNode& node);

enum class Rejection {
  kNone,
  kNotCovered,            ///< dwell is zero
  kInsufficientCapacity,  ///< capacity < workload
  kNotBeneficial,         ///< offload cost or time not below local
  kLeavesCoverage,        ///< offload would outlast the dwell time
};

std::string to_string(Rejection reason);

struct NodeReport {
  std::string id;
  Dwell dwell = Dwell::finite(0.0);
  CostReport offload;
  bool eligible = false;
  Rejection reason = Rejection::kNone;
};

struct OffloadDecision {
  std::optional<std::string> node;  ///< empty means run locally
  CostReport local;
  std::vector<NodeReport> nodes;  ///< in selection order
};

struct SelectOptions {
  /// Also require the offload to finish before the client leaves range.
  bool require_coverage = true;
};

/// Walks nodes by dwell time (longest first, ties by id) and picks the first
/// one that covers the client, has capacity for the workload and beats local
/// execution in both cost and time; otherwise local.
OffloadDecision select_node(const VehicleState& vehicle, const std::vector<CloudNode>& nodes,
                            const CostParams& params, SelectOptions options = {});

struct Scenario {
  VehicleState vehicle;
  CostParams params;
  std::vector<CloudNode> nodes;
};

/// Parses and validates
/// `{ "vehicle": {"x","y","v","theta"},
///    "params": {"w","f_l","alpha","beta","eta","d_in","d_out","p_in","p_out"},
///    "nodes": [{"id","x","y","r_range","f_off","w_avail","bandwidth"}] }`.
Scenario parse_scenario(const std::string& json_text);

/// Decision report as pretty-printed JSON; deterministic byte-for-byte.
std::string decision_to_json(const OffloadDecision& decision);

}  // namespace piedge
