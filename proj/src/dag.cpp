#include "piedge/dag.hpp"

#include <algorithm>

namespace piedge {

GraphError::GraphError(const std::string& what, std::vector<std::string> cycle)
    : std::runtime_error(what), cycle_(std::move(cycle)) {}

namespace {

// Kahn order; on failure extracts a cycle from the leftover nodes and throws.
std::vector<std::size_t> topological_order(const TaskGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const Edge& e : graph.edges()) ++indegree[e.to];

  std::vector<std::size_t> order, ready;
  for (std::size_t v = n; v-- > 0;)
    if (indegree[v] == 0) ready.push_back(v);
  while (!ready.empty()) {
    const std::size_t v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (std::size_t s : graph.successors(v))
      if (--indegree[s] == 0) ready.push_back(s);
  }
  if (order.size() == n) return order;

  // Every leftover node has a leftover predecessor; walk backwards until a
  // node repeats.
  std::size_t v = 0;
  while (indegree[v] == 0) ++v;
  std::vector<std::size_t> seen_at(n, n), path;
  while (seen_at[v] == n) {
    seen_at[v] = path.size();
    path.push_back(v);
    const auto& preds = graph.predecessors(v);
    v = *std::find_if(preds.begin(), preds.end(), [&](std::size_t p) { return indegree[p] != 0; });
  }
  std::vector<std::string> cycle;
  for (std::size_t i = path.size(); i-- > seen_at[v];) cycle.push_back(graph.ids()[path[i]]);
  cycle.push_back(cycle.front());

  std::string text;
  for (const auto& id : cycle) text += (text.empty() ? "" : " -> ") + id;
  throw GraphError("dependency cycle: " + text, std::move(cycle));
}

}  // namespace

std::vector<std::vector<std::size_t>> topological_layers(const TaskGraph& graph) {
  const auto order = topological_order(graph);
  std::vector<std::size_t> depth(graph.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t v : order) {
    for (std::size_t p : graph.predecessors(v)) depth[v] = std::max(depth[v], depth[p] + 1);
    deepest = std::max(deepest, depth[v]);
  }
  std::vector<std::vector<std::size_t>> layers(graph.size() == 0 ? 0 : deepest + 1);
  for (std::size_t v = 0; v < graph.size(); ++v) layers[depth[v]].push_back(v);
  return layers;
}

std::vector<double> heft_upward_rank(const TaskGraph& graph) {
  const auto order = topological_order(graph);
  std::vector<double> rank(graph.size(), 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t v = *it;
    double tail = 0.0;
    for (const Edge& e : graph.edges())
      if (e.from == v) tail = std::max(tail, e.comm + rank[e.to]);
    rank[v] = graph.mean_etc(v) + tail;
  }
  return rank;
}

LayeredSchedule schedule_dag(const TaskGraph& graph, InnerAlgorithm inner, TiePolicy ties) {
  LayeredSchedule out;
  out.layers = topological_layers(graph);
  out.ranks = heft_upward_rank(graph);
  out.assignment.assign(graph.size(), 0);

  for (const auto& layer : out.layers) {
    const EtcTable sub = graph.etc().select_tasks(layer);
    std::vector<double> priority;
    priority.reserve(layer.size());
    for (std::size_t v : layer) priority.push_back(out.ranks[v]);

    // Without edges there is no precedence to rank by; the layer is the plain
    // independent problem.
    SchedOptions options{.ties = ties};
    if (!graph.edges().empty()) options.priority = priority;
    Schedule s = inner == InnerAlgorithm::kMinMin ? min_min(sub, options) : diff_min(sub, options);

    // Back to global task indices.
    for (auto& queue : s.core_queues)
      for (auto& t : queue) t = layer[t];
    for (auto& d : s.decision_log) d.task = layer[d.task];
    for (std::size_t i = 0; i < layer.size(); ++i) out.assignment[layer[i]] = s.assignment[i];
    out.total_makespan += s.makespan;
    out.per_layer.push_back(std::move(s));
  }
  return out;
}

}  // namespace piedge
