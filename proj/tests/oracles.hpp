#pragma once

// Test-only reference implementations. They share no code with the library
// paths they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

using Row = std::vector<std::optional<double>>;
using Table = std::vector<Row>;

/// Minimum makespan by depth-first enumeration of every assignment.
inline double best_makespan(const Table& etc) {
  const std::size_t cores = etc.front().size();
  double best = std::numeric_limits<double>::infinity();
  // Loads are passed by value so each leaf sums its tasks in index order.
  auto rec = [&](auto&& self, std::size_t t, std::vector<double> load) -> void {
    if (t == etc.size()) {
      best = std::min(best, *std::max_element(load.begin(), load.end()));
      return;
    }
    for (std::size_t c = 0; c < cores; ++c) {
      if (!etc[t][c]) continue;
      auto next = load;
      next[c] += *etc[t][c];
      self(self, t + 1, std::move(next));
    }
  };
  rec(rec, 0, std::vector<double>(cores, 0.0));
  return best;
}

struct Pick {
  std::size_t task;
  std::size_t core;
};

/// Greedy over (minimum completion time) with lexicographic tie-breaks:
/// smallest (or largest, for max-min) value, then lowest task, then lowest core.
inline std::vector<Pick> greedy_trace(const Table& etc, bool max_of_mins) {
  const std::size_t cores = etc.front().size();
  std::vector<double> mat(cores, 0.0);
  std::vector<bool> done(etc.size(), false);
  std::vector<Pick> trace;
  for (std::size_t round = 0; round < etc.size(); ++round) {
    std::optional<double> target;
    Pick pick{0, 0};
    for (std::size_t t = 0; t < etc.size(); ++t) {
      if (done[t]) continue;
      std::optional<double> own;
      std::size_t own_core = 0;
      for (std::size_t c = 0; c < cores; ++c) {
        if (!etc[t][c]) continue;
        const double ct = mat[c] + *etc[t][c];
        if (!own || ct < *own) {
          own = ct;
          own_core = c;
        }
      }
      const bool better = !target || (max_of_mins ? *own > *target : *own < *target);
      if (better) {
        target = own;
        pick = {t, own_core};
      }
    }
    done[pick.task] = true;
    mat[pick.core] += *etc[pick.task][pick.core];
    trace.push_back(pick);
  }
  return trace;
}

inline double trace_makespan(const Table& etc, const std::vector<Pick>& trace) {
  std::vector<double> mat(etc.front().size(), 0.0);
  for (const auto& p : trace) mat[p.core] += *etc[p.task][p.core];
  return *std::max_element(mat.begin(), mat.end());
}

/// Steps a point along straight-line motion until it leaves the circle.
inline double stepped_exit_time(double x, double y, double v, double heading, double cx, double cy, double r,
                                double dt) {
  double t = 0.0;
  while ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) {
    t += dt;
    x += v * std::sin(heading) * dt;
    y += v * std::cos(heading) * dt;
  }
  return t;
}

}  // namespace oracle
