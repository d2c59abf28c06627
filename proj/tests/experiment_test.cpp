#include "piedge/experiment.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace piedge {
namespace {

ExperimentGrid small_grid() {
  ExperimentGrid g;
  g.task_counts = {4, 6};
  g.core_counts = {2, 3};
  g.trials = 20;
  g.seed = 9;
  g.algorithms = {Algorithm::kMinMin, Algorithm::kMaxMin, Algorithm::kDiffMin, Algorithm::kOptimal};
  return g;
}

TEST(Experiment, RowCountAndNormalization) {
  const auto rows = run_experiment(small_grid());
  ASSERT_EQ(rows.size(), 4u * 20u * 4u);
  for (std::size_t i = 0; i < rows.size(); i += 4) {
    // Sorted by algorithm enum: min-min first.
    ASSERT_EQ(rows[i].algorithm, Algorithm::kMinMin);
    EXPECT_EQ(rows[i].normalized, 1.0);
    for (std::size_t k = 1; k < 4; ++k) {
      EXPECT_EQ(rows[i + k].trial, rows[i].trial);
      EXPECT_DOUBLE_EQ(rows[i + k].normalized, rows[i + k].makespan / rows[i].makespan);
    }
    // optimal dominates every heuristic on the same instance
    EXPECT_EQ(rows[i + 3].algorithm, Algorithm::kOptimal);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_LE(rows[i + 3].normalized, rows[i + k].normalized);
  }
}

TEST(Experiment, MinMinAlwaysIncluded) {
  auto g = small_grid();
  g.algorithms = {Algorithm::kDiffMin};
  const auto rows = run_experiment(g);
  EXPECT_EQ(rows.size(), 4u * 20u * 2u);
}

TEST(Experiment, ThreadCountDoesNotChangeRows) {
  const auto g = small_grid();
  EXPECT_EQ(run_experiment(g, 1), run_experiment(g, 4));
}

TEST(Experiment, TrialSeedsAreIndependentPerCell) {
  EXPECT_NE(trial_seed(1, 10, 3, 0), trial_seed(1, 10, 3, 1));
  EXPECT_NE(trial_seed(1, 10, 3, 0), trial_seed(1, 10, 4, 0));
  EXPECT_NE(trial_seed(1, 10, 3, 0), trial_seed(2, 10, 3, 0));
  EXPECT_EQ(trial_seed(1, 10, 3, 0), trial_seed(1, 10, 3, 0));

  // A cell's rows do not depend on which other cells are in the grid.
  auto g = small_grid();
  const auto full = run_experiment(g);
  g.task_counts = {6};
  g.core_counts = {3};
  const auto single = run_experiment(g);
  std::vector<TrialRow> from_full;
  for (const auto& r : full)
    if (r.tasks == 6 && r.cores == 3) from_full.push_back(r);
  EXPECT_EQ(single, from_full);
}

TEST(Experiment, Validation) {
  auto g = small_grid();
  g.task_counts = {20};
  EXPECT_THROW(run_experiment(g), ValidationError);
  g = small_grid();
  g.trials = 0;
  EXPECT_THROW(run_experiment(g), ValidationError);
  g = small_grid();
  g.core_counts = {};
  EXPECT_THROW(run_experiment(g), ValidationError);
}

TEST(Experiment, CsvRoundTripAndSummaryRecomputation) {
  const auto rows = run_experiment(small_grid());
  std::stringstream ss;
  write_rows_csv(rows, ss);
  const auto back = read_rows_csv(ss);
  EXPECT_EQ(back, rows);

  // Summary recomputed from raw rows by hand.
  const auto s = summarize(back);
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.algorithm == Algorithm::kDiffMin) {
      sum += r.normalized;
      ++n;
    }
  EXPECT_DOUBLE_EQ(s.diff_min_mean_normalized, sum / static_cast<double>(n));
  EXPECT_DOUBLE_EQ(s.diff_min_mean_improvement, 1.0 - sum / static_cast<double>(n));
  EXPECT_EQ(s.cells.size(), 4u);
  EXPECT_EQ(s.cells.front().mean_normalized.at(Algorithm::kMinMin), 1.0);
  EXPECT_NE(format_summary(s).find("diff-min mean normalized makespan"), std::string::npos);
}

TEST(Experiment, CsvErrors) {
  std::stringstream bad_header("a,b\n");
  EXPECT_THROW(read_rows_csv(bad_header), ParseError);
  std::stringstream bad_alg("tasks,cores,trial,algorithm,makespan,normalized_makespan\n1,1,0,ga,1,1\n");
  EXPECT_THROW(read_rows_csv(bad_alg), ParseError);
}

}  // namespace
}  // namespace piedge
