#include "piedge/dag.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace piedge {
namespace {

using Layers = std::vector<std::vector<std::size_t>>;

TaskGraph make_graph(std::vector<std::vector<double>> rows, std::vector<Edge> edges) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back(std::string(1, static_cast<char>('A' + i)));
  return TaskGraph(std::move(ids), EtcTable::from_rows(rows), std::move(edges));
}

// A -> {B, C} -> D
TaskGraph diamond(std::vector<double> row) {
  return make_graph({row, row, row, row}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
}

// Random DAG: edges only from lower to higher index, then ids shuffled so
// index order is not a topological order.
TaskGraph random_dag(std::mt19937_64& rng, std::size_t n, std::size_t cores) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<double>> rows(n);
  for (auto& r : rows)
    for (std::size_t c = 0; c < cores; ++c) r.push_back(1.0 + static_cast<double>(rng() % 290) / 10.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng() % 4 == 0) edges.push_back({perm[i], perm[j], static_cast<double>(rng() % 3)});
  return make_graph(rows, edges);
}

TEST(TopologicalLayers, ForcedShapes) {
  EXPECT_EQ(topological_layers(diamond({1, 2})), (Layers{{0}, {1, 2}, {3}}));
  EXPECT_EQ(topological_layers(make_graph({{1}, {1}, {1}}, {{0, 1}, {1, 2}})), (Layers{{0}, {1}, {2}}));
  EXPECT_EQ(topological_layers(make_graph({{1}, {1}}, {})), (Layers{{0, 1}}));
}

TEST(TopologicalLayers, LongestPathDepth) {
  // A -> B -> C and A -> C: C sits below B, not beside it.
  EXPECT_EQ(topological_layers(make_graph({{1}, {1}, {1}}, {{0, 1}, {1, 2}, {0, 2}})), (Layers{{0}, {1}, {2}}));
}

TEST(TopologicalLayers, CycleNamesWitness) {
  const auto g = make_graph({{1}, {1}, {1}, {1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 1}});
  try {
    topological_layers(g);
    FAIL();
  } catch (const GraphError& e) {
    const auto& cyc = e.cycle();
    ASSERT_EQ(cyc.size(), 4u);
    EXPECT_EQ(cyc.front(), cyc.back());
    for (std::size_t i = 0; i + 1 < cyc.size(); ++i) {
      const auto from = static_cast<std::size_t>(cyc[i][0] - 'A');
      const auto to = static_cast<std::size_t>(cyc[i + 1][0] - 'A');
      const auto& succ = g.successors(from);
      EXPECT_NE(std::find(succ.begin(), succ.end(), to), succ.end()) << cyc[i] << "->" << cyc[i + 1];
    }
  }
  EXPECT_THROW(heft_upward_rank(g), GraphError);
  EXPECT_THROW(schedule_dag(g, InnerAlgorithm::kDiffMin), GraphError);
  EXPECT_THROW(topological_layers(make_graph({{1}}, {{0, 0}})), GraphError);
}

TEST(UpwardRank, RecursiveValues) {
  const auto chain = make_graph({{1, 3}, {2, 4}}, {{0, 1}});
  EXPECT_EQ(heft_upward_rank(chain), (std::vector<double>{5, 3}));
  EXPECT_EQ(heft_upward_rank(make_graph({{7}}, {})), (std::vector<double>{7}));
  EXPECT_EQ(heft_upward_rank(diamond({1})), (std::vector<double>{3, 2, 2, 1}));
  // comm costs enter the successor term
  const auto weighted = make_graph({{2}, {3}, {1}}, {{0, 1, 0.5}, {0, 2, 4.0}});
  EXPECT_EQ(heft_upward_rank(weighted), (std::vector<double>{7, 3, 1}));
}

TEST(UpwardRank, StrictlyDecreasesAlongEdges) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto g = random_dag(rng, 1 + rng() % 20, 3);
    const auto rank = heft_upward_rank(g);
    for (const Edge& e : g.edges()) EXPECT_GT(rank[e.from], rank[e.to]);
  }
}

TEST(ScheduleDag, DiamondMinMin) {
  const auto s = schedule_dag(diamond({1, 2}), InnerAlgorithm::kMinMin);
  ASSERT_EQ(s.per_layer.size(), 3u);
  EXPECT_DOUBLE_EQ(s.per_layer[0].makespan, 1.0);
  EXPECT_DOUBLE_EQ(s.per_layer[1].makespan, 2.0);
  EXPECT_DOUBLE_EQ(s.per_layer[2].makespan, 1.0);
  EXPECT_DOUBLE_EQ(s.total_makespan, 4.0);
}

TEST(ScheduleDag, ChainTakesFastestCorePerTask) {
  const auto g = make_graph({{1, 9}, {2, 9}, {3, 9}}, {{0, 1}, {1, 2}});
  for (auto inner : {InnerAlgorithm::kMinMin, InnerAlgorithm::kDiffMin}) {
    const auto s = schedule_dag(g, inner);
    EXPECT_DOUBLE_EQ(s.total_makespan, 6.0);
    EXPECT_EQ(s.assignment, (std::vector<CoreIndex>{0, 0, 0}));
  }
}

TEST(ScheduleDag, RankBreaksTiesInsideLayer) {
  // B and C tie on every heuristic rule; C leads to a heavier subtree.
  const auto g = make_graph({{1, 1}, {2, 4}, {2, 4}, {1, 1}, {9, 9}}, {{0, 1}, {0, 2}, {1, 3}, {2, 4}});
  const auto s = schedule_dag(g, InnerAlgorithm::kMinMin);
  EXPECT_EQ(s.per_layer[1].decision_log.front().task, 2u);
  const auto d = schedule_dag(g, InnerAlgorithm::kDiffMin);
  EXPECT_EQ(d.per_layer[1].decision_log.front().task, 2u);
}

TEST(ScheduleDag, EdgeFreeGraphEqualsIndependentScheduler) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto etc = generate_etc({1 + seed % 30, 1 + seed % 6, 1.0, 30.0, ValueKind::kContinuous, seed});
    std::vector<std::string> ids;
    for (std::size_t t = 0; t < etc.tasks(); ++t) ids.push_back("t" + std::to_string(t));
    const TaskGraph g(ids, etc, {});
    const auto dm = schedule_dag(g, InnerAlgorithm::kDiffMin);
    const auto mm = schedule_dag(g, InnerAlgorithm::kMinMin);
    ASSERT_EQ(dm.per_layer.size(), 1u);
    EXPECT_EQ(dm.per_layer[0], diff_min(etc));
    EXPECT_EQ(mm.per_layer[0], min_min(etc));
    EXPECT_EQ(dm.total_makespan, diff_min(etc).makespan);
  }
}

TEST(ScheduleDag, RandomDagsAreSafe) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const auto g = random_dag(rng, 1 + rng() % 20, 1 + rng() % 4);
    const auto s = schedule_dag(g, i % 2 ? InnerAlgorithm::kMinMin : InnerAlgorithm::kDiffMin);
    std::vector<std::size_t> layer_of(g.size(), 0);
    std::size_t placed = 0;
    double total = 0;
    for (std::size_t l = 0; l < s.layers.size(); ++l) {
      for (auto t : s.layers[l]) layer_of[t] = l;
      placed += s.layers[l].size();
      total += s.per_layer[l].makespan;
      for (const auto& d : s.per_layer[l].decision_log)
        EXPECT_NE(std::find(s.layers[l].begin(), s.layers[l].end(), d.task), s.layers[l].end());
    }
    EXPECT_EQ(placed, g.size());
    for (const Edge& e : g.edges()) EXPECT_LT(layer_of[e.from], layer_of[e.to]);
    for (const auto& layer : s.layers)
      for (auto a : layer)
        for (auto b : g.successors(a)) EXPECT_NE(layer_of[a], layer_of[b]);
    EXPECT_DOUBLE_EQ(s.total_makespan, total);
  }
}

}  // namespace
}  // namespace piedge
