#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "piedge/sched.hpp"
#include "piedge/workload.hpp"

namespace piedge {

/// Monte Carlo comparison of the scheduling heuristics over a grid of
/// (task count, core count) cells.
struct ExperimentGrid {
  std::vector<std::size_t> task_counts{10, 20, 30, 40, 50};
  std::vector<std::size_t> core_counts{3, 4, 5, 6};
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  /// min-min is always run, since every row is normalized by it.
  std::vector<Algorithm> algorithms{Algorithm::kMinMin, Algorithm::kDiffMin};
  ValueKind kind = ValueKind::kContinuous;
  double low = 1.0;
  double high = 30.0;
};

/// Throws ValidationError for empty lists, zero counts or trials, or an
/// `optimal` request on a cell beyond the brute-force cap.
void validate(const ExperimentGrid& grid);

/// Seed of one trial's instance, independent of every other cell.
std::uint64_t trial_seed(std::uint64_t grid_seed, std::size_t tasks, std::size_t cores, std::size_t trial);

struct TrialRow {
  std::size_t tasks = 0;
  std::size_t cores = 0;
  std::size_t trial = 0;
  Algorithm algorithm = Algorithm::kMinMin;
  double makespan = 0.0;
  double normalized = 0.0;  ///< makespan / min-min makespan of the same instance

  friend bool operator==(const TrialRow&, const TrialRow&) = default;
};

struct CellSummary {
  std::size_t tasks = 0;
  std::size_t cores = 0;
  std::map<Algorithm, double> mean_normalized;
};

struct ExperimentSummary {
  std::vector<CellSummary> cells;
  /// Over every diff-min row of the grid; 0 when diff-min was not run.
  double diff_min_mean_normalized = 0.0;
  double diff_min_mean_improvement = 0.0;  ///< 1 - diff_min_mean_normalized
  std::size_t cells_improved = 0;          ///< cells whose diff-min mean is < 1
};

/// Rows sorted by (tasks, cores, trial, algorithm) whatever `threads` is.
std::vector<TrialRow> run_experiment(const ExperimentGrid& grid, std::size_t threads = 1);

ExperimentSummary summarize(const std::vector<TrialRow>& rows);

/// Header `tasks,cores,trial,algorithm,makespan,normalized_makespan`.
void write_rows_csv(const std::vector<TrialRow>& rows, std::ostream& out);
std::vector<TrialRow> read_rows_csv(std::istream& in);

/// Human-readable per-cell table plus grid-wide diff-min figures.
std::string format_summary(const ExperimentSummary& summary);

}  // namespace piedge
