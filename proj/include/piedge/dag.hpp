#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "piedge/sched.hpp"
#include "piedge/workload.hpp"

namespace piedge {

/// Thrown for dependency cycles; `cycle()` lists task ids along one cycle,
/// first id repeated at the end.
class GraphError : public std::runtime_error {
 public:
  GraphError(const std::string& what, std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

enum class InnerAlgorithm { kMinMin, kDiffMin };

struct LayeredSchedule {
  std::vector<std::vector<std::size_t>> layers;  ///< task indices, ascending within a layer
  /// Queues and decision logs carry global task indices; `assignment` and
  /// `mat` are per layer, `assignment` indexed by position in the layer.
  std::vector<Schedule> per_layer;
  std::vector<CoreIndex> assignment;             ///< core of each task, global
  std::vector<double> ranks;                     ///< upward rank per task
  double total_makespan = 0.0;
};

/// Level of each task = longest path (in edges) from any source.
std::vector<std::vector<std::size_t>> topological_layers(const TaskGraph& graph);

/// rank(t) = mean ETC(t) + max over successors s of (comm(t, s) + rank(s)).
std::vector<double> heft_upward_rank(const TaskGraph& graph);

/// Runs the inner algorithm on each layer with fresh core availability; a
/// layer starts only after the previous one completes, so the total is the
/// sum of layer makespans. Task ties inside a layer go to the higher upward
/// rank before `ties` applies.
LayeredSchedule schedule_dag(const TaskGraph& graph, InnerAlgorithm inner, TiePolicy ties = {});

}  // namespace piedge
