#include "piedge/sched.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "piedge/random.hpp"

namespace piedge {

double completion_time(const EtcTable& etc, TaskIndex task, CoreIndex core, std::span<const double> mat) {
  if (mat.size() != etc.cores()) throw ValidationError("availability vector width does not match core count");
  const auto& e = etc.at(task, core);
  if (!e) throw DomainError("task " + std::to_string(task) + " cannot run on core " + std::to_string(core));
  return mat[core] + *e;
}

namespace {

class ScheduleBuilder {
 public:
  ScheduleBuilder(const EtcTable& etc, std::string algorithm) : etc_(etc) {
    s_.algorithm = std::move(algorithm);
    s_.assignment.assign(etc.tasks(), 0);
    s_.core_queues.resize(etc.cores());
    s_.mat.assign(etc.cores(), 0.0);
  }

  const std::vector<double>& mat() const { return s_.mat; }

  void assign(TaskIndex task, CoreIndex core) {
    s_.mat[core] += *etc_.at(task, core);
    s_.assignment[task] = core;
    s_.core_queues[core].push_back(task);
    s_.decision_log.push_back({task, core, s_.mat[core]});
  }

  // Loads are re-summed in task-index order so one assignment always yields
  // the same bits, whatever order the algorithm placed the tasks in.
  Schedule finish() && {
    std::fill(s_.mat.begin(), s_.mat.end(), 0.0);
    for (TaskIndex t = 0; t < s_.assignment.size(); ++t) s_.mat[s_.assignment[t]] += *etc_.at(t, s_.assignment[t]);
    s_.makespan = makespan(s_);
    return std::move(s_);
  }

 private:
  const EtcTable& etc_;
  Schedule s_;
};

struct BestCore {
  CoreIndex core = 0;
  double ct = std::numeric_limits<double>::infinity();
};

// Fastest completion for a task given current availability; lowest core wins ties.
BestCore best_core(const EtcTable& etc, TaskIndex task, const std::vector<double>& mat, SchedStats* stats) {
  BestCore best;
  for (CoreIndex c = 0; c < etc.cores(); ++c) {
    const auto& e = etc.at(task, c);
    if (!e) continue;
    if (stats) ++stats->completion_time_evals;
    const double ct = mat[c] + *e;
    if (ct < best.ct) best = {c, ct};
  }
  return best;
}

void check_priority(const EtcTable& etc, const SchedOptions& options) {
  if (!options.priority.empty() && options.priority.size() != etc.tasks())
    throw ValidationError("priority vector width does not match task count");
}

// Narrows `tied` (ascending task indices) to a single task: highest priority
// first, then the tie policy.
TaskIndex pick_among(std::vector<TaskIndex>& tied, const SchedOptions& options, std::mt19937_64& rng) {
  if (tied.size() > 1 && !options.priority.empty()) {
    double top = -std::numeric_limits<double>::infinity();
    for (TaskIndex t : tied) top = std::max(top, options.priority[t]);
    std::erase_if(tied, [&](TaskIndex t) { return options.priority[t] != top; });
  }
  if (tied.size() == 1 || options.ties.kind == TiePolicy::Kind::kLowestIndex) return tied.front();
  return tied[uniform_below(rng, tied.size())];
}

// Shared loop of Min-Min and Max-Min: each round every unmapped task gets its
// minimum completion time; `prefer(a, b)` says whether a beats b.
template <typename Prefer>
Schedule min_completion_loop(const EtcTable& etc, const SchedOptions& options, std::string name, Prefer prefer) {
  check_priority(etc, options);
  std::mt19937_64 rng(options.ties.seed);
  ScheduleBuilder builder(etc, std::move(name));
  std::vector<TaskIndex> unmapped(etc.tasks());
  std::iota(unmapped.begin(), unmapped.end(), TaskIndex{0});
  std::vector<BestCore> best(etc.tasks());
  std::vector<TaskIndex> tied;

  while (!unmapped.empty()) {
    bool have = false;
    double target = 0.0;
    for (TaskIndex t : unmapped) {
      best[t] = best_core(etc, t, builder.mat(), options.stats);
      if (!have || prefer(best[t].ct, target)) {
        target = best[t].ct;
        have = true;
      }
    }
    tied.clear();
    for (TaskIndex t : unmapped)
      if (best[t].ct == target) tied.push_back(t);
    const TaskIndex chosen = pick_among(tied, options, rng);
    builder.assign(chosen, best[chosen].core);
    unmapped.erase(std::find(unmapped.begin(), unmapped.end(), chosen));
  }
  return std::move(builder).finish();
}

}  // namespace

Schedule min_min(const EtcTable& etc, const SchedOptions& options) {
  return min_completion_loop(etc, options, "min-min", [](double a, double b) { return a < b; });
}

Schedule max_min(const EtcTable& etc, const SchedOptions& options) {
  return min_completion_loop(etc, options, "max-min", [](double a, double b) { return a > b; });
}

Schedule diff_min(const EtcTable& etc, const SchedOptions& options) {
  check_priority(etc, options);
  const std::size_t n = etc.tasks();
  std::vector<double> div(n), sub(n);
  for (TaskIndex t = 0; t < n; ++t) {
    div[t] = div_metric(etc, t);
    sub[t] = sub_metric(etc, t);
  }
  const auto prio = [&](TaskIndex t) { return options.priority.empty() ? 0.0 : options.priority[t]; };
  const auto same_key = [&](TaskIndex a, TaskIndex b) {
    return div[a] == div[b] && sub[a] == sub[b] && prio(a) == prio(b);
  };

  // Div and Sub do not depend on the mapping, so the selection order is fixed
  // up front: largest Div, then largest Sub, then priority, then task index.
  std::vector<TaskIndex> order(n);
  std::iota(order.begin(), order.end(), TaskIndex{0});
  std::sort(order.begin(), order.end(), [&](TaskIndex a, TaskIndex b) {
    if (div[a] != div[b]) return div[a] > div[b];
    if (sub[a] != sub[b]) return sub[a] > sub[b];
    if (prio(a) != prio(b)) return prio(a) > prio(b);
    return a < b;
  });

  if (options.ties.kind == TiePolicy::Kind::kSeededRandom) {
    // Uniform shuffle inside each run of equal keys.
    std::mt19937_64 rng(options.ties.seed);
    for (std::size_t lo = 0; lo < n;) {
      std::size_t hi = lo + 1;
      while (hi < n && same_key(order[lo], order[hi])) ++hi;
      for (std::size_t i = hi - 1; i > lo; --i) {
        const auto j = lo + uniform_below(rng, i - lo + 1);
        std::swap(order[i], order[j]);
      }
      lo = hi;
    }
  }

  ScheduleBuilder builder(etc, "diff-min");
  for (TaskIndex t : order) builder.assign(t, best_core(etc, t, builder.mat(), options.stats).core);
  return std::move(builder).finish();
}

Schedule optimal_bruteforce(const EtcTable& etc, std::uint64_t cap) {
  const std::size_t tasks = etc.tasks();
  const std::size_t cores = etc.cores();
  std::uint64_t space = 1;
  for (std::size_t i = 0; i < tasks; ++i) {
    if (space > cap / cores) {
      throw ValidationError("brute force refused: " + std::to_string(cores) + "^" + std::to_string(tasks) +
                            " assignments exceeds cap " + std::to_string(cap));
    }
    space *= cores;
  }

  std::vector<CoreIndex> current(tasks, 0), best;
  std::vector<double> mat(cores);
  double best_span = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < space; ++k) {
    std::fill(mat.begin(), mat.end(), 0.0);
    bool ok = true;
    for (TaskIndex t = 0; t < tasks && ok; ++t) {
      const auto& e = etc.at(t, current[t]);
      if (!e) ok = false;
      else mat[current[t]] += *e;
    }
    if (ok) {
      const double span = *std::max_element(mat.begin(), mat.end());
      if (span < best_span) {
        best_span = span;
        best = current;
      }
    }
    for (TaskIndex t = 0; t < tasks; ++t) {  // odometer increment
      if (++current[t] < cores) break;
      current[t] = 0;
    }
  }

  ScheduleBuilder builder(etc, "optimal");
  for (TaskIndex t = 0; t < tasks; ++t) builder.assign(t, best[t]);
  return std::move(builder).finish();
}

double makespan(const Schedule& schedule) {
  double span = 0.0;
  for (double m : schedule.mat) span = std::max(span, m);
  return span;
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kMinMin: return "min-min";
    case Algorithm::kMaxMin: return "max-min";
    case Algorithm::kDiffMin: return "diff-min";
    case Algorithm::kOptimal: return "optimal";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (auto a : {Algorithm::kMinMin, Algorithm::kMaxMin, Algorithm::kDiffMin, Algorithm::kOptimal})
    if (to_string(a) == name) return a;
  throw ValidationError("unknown algorithm '" + name + "'");
}

Schedule run_algorithm(Algorithm algorithm, const EtcTable& etc, TiePolicy ties) {
  switch (algorithm) {
    case Algorithm::kMinMin: return min_min(etc, ties);
    case Algorithm::kMaxMin: return max_min(etc, ties);
    case Algorithm::kDiffMin: return diff_min(etc, ties);
    case Algorithm::kOptimal: return optimal_bruteforce(etc);
  }
  throw ValidationError("unknown algorithm");
}

}  // namespace piedge
