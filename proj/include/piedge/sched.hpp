#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "piedge/workload.hpp"

namespace piedge {

/// How to choose among tasks that the heuristic itself considers equal.
/// Core ties always go to the lowest core index.
struct TiePolicy {
  enum class Kind { kLowestIndex, kSeededRandom };

  Kind kind = Kind::kLowestIndex;
  std::uint64_t seed = 0;

  static TiePolicy lowest_index() { return {}; }
  static TiePolicy seeded(std::uint64_t seed) { return {Kind::kSeededRandom, seed}; }
};

/// One mapping step: task placed on core, finishing at `completion_time`.
struct Decision {
  TaskIndex task = 0;
  CoreIndex core = 0;
  double completion_time = 0.0;

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct Schedule {
  std::vector<CoreIndex> assignment;                ///< core of each task
  std::vector<std::vector<TaskIndex>> core_queues;  ///< tasks per core, in mapping order
  std::vector<double> mat;                          ///< busy time per core, summed in task-index order
  double makespan = 0.0;
  std::string algorithm;
  std::vector<Decision> decision_log;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Instrumentation for complexity checks.
struct SchedStats {
  std::uint64_t completion_time_evals = 0;  ///< (task, core) completion times examined
};

/// Extra knobs. `priority`, when non-empty, holds one value per task; among
/// tasks tied under the heuristic's own rules the higher value wins before
/// `ties` is consulted.
struct SchedOptions {
  TiePolicy ties{};
  std::span<const double> priority{};
  SchedStats* stats = nullptr;
};

/// ct(task, core) = mat[core] + ETC(task, core). DomainError if infeasible.
double completion_time(const EtcTable& etc, TaskIndex task, CoreIndex core, std::span<const double> mat);

Schedule min_min(const EtcTable& etc, const SchedOptions& options);
Schedule max_min(const EtcTable& etc, const SchedOptions& options);
Schedule diff_min(const EtcTable& etc, const SchedOptions& options);

inline Schedule min_min(const EtcTable& etc, TiePolicy ties = {}) { return min_min(etc, SchedOptions{.ties = ties}); }
inline Schedule max_min(const EtcTable& etc, TiePolicy ties = {}) { return max_min(etc, SchedOptions{.ties = ties}); }
inline Schedule diff_min(const EtcTable& etc, TiePolicy ties = {}) { return diff_min(etc, SchedOptions{.ties = ties}); }

inline constexpr std::uint64_t kDefaultBruteForceCap = 1'000'000;

/// Exhaustive search over all cores^tasks assignments. Throws ValidationError
/// describing the instance size when it exceeds `cap`.
Schedule optimal_bruteforce(const EtcTable& etc, std::uint64_t cap = kDefaultBruteForceCap);

/// Largest per-core busy time; 0 for an empty schedule.
double makespan(const Schedule& schedule);

enum class Algorithm { kMinMin, kMaxMin, kDiffMin, kOptimal };

std::string to_string(Algorithm algorithm);
/// Accepts "min-min", "max-min", "diff-min", "optimal".
Algorithm parse_algorithm(const std::string& name);

Schedule run_algorithm(Algorithm algorithm, const EtcTable& etc, TiePolicy ties = {});

}  // namespace piedge
