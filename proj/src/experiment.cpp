#include "piedge/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "piedge/random.hpp"

namespace piedge {

void validate(const ExperimentGrid& grid) {
  if (grid.task_counts.empty() || grid.core_counts.empty()) throw ValidationError("grid lists must be non-empty");
  if (grid.trials == 0) throw ValidationError("trials must be >= 1");
  for (auto t : grid.task_counts)
    if (t == 0) throw ValidationError("task counts must be >= 1");
  for (auto c : grid.core_counts)
    if (c == 0) throw ValidationError("core counts must be >= 1");
  if (!(grid.low < grid.high)) throw ValidationError("value range needs low < high");

  if (std::find(grid.algorithms.begin(), grid.algorithms.end(), Algorithm::kOptimal) == grid.algorithms.end())
    return;
  for (auto t : grid.task_counts) {
    for (auto c : grid.core_counts) {
      double space = 1.0;
      for (std::size_t i = 0; i < t; ++i) space *= static_cast<double>(c);
      if (space > static_cast<double>(kDefaultBruteForceCap))
        throw ValidationError("optimal requested but cell tasks=" + std::to_string(t) + " cores=" +
                              std::to_string(c) + " exceeds the brute-force cap");
    }
  }
}

std::uint64_t trial_seed(std::uint64_t grid_seed, std::size_t tasks, std::size_t cores, std::size_t trial) {
  return derive_seed(grid_seed, tasks, cores, trial);
}

namespace {

std::vector<Algorithm> ordered_algorithms(const ExperimentGrid& grid) {
  std::vector<Algorithm> algs = grid.algorithms;
  algs.push_back(Algorithm::kMinMin);
  std::sort(algs.begin(), algs.end());
  algs.erase(std::unique(algs.begin(), algs.end()), algs.end());
  return algs;
}

struct Job {
  std::size_t tasks;
  std::size_t cores;
  std::size_t trial;
};

void run_job(const ExperimentGrid& grid, const std::vector<Algorithm>& algs, const Job& job,
             std::vector<TrialRow>& out) {
  GenSpec spec;
  spec.tasks = job.tasks;
  spec.cores = job.cores;
  spec.low = grid.low;
  spec.high = grid.high;
  spec.kind = grid.kind;
  spec.seed = trial_seed(grid.seed, job.tasks, job.cores, job.trial);
  const EtcTable etc = generate_etc(spec);

  const double baseline = min_min(etc).makespan;
  for (Algorithm a : algs) {
    const double span = a == Algorithm::kMinMin ? baseline : run_algorithm(a, etc).makespan;
    out.push_back({job.tasks, job.cores, job.trial, a, span, span / baseline});
  }
}

}  // namespace

std::vector<TrialRow> run_experiment(const ExperimentGrid& grid, std::size_t threads) {
  validate(grid);
  const auto algs = ordered_algorithms(grid);

  std::vector<Job> jobs;
  for (auto t : grid.task_counts)
    for (auto c : grid.core_counts)
      for (std::size_t k = 0; k < grid.trials; ++k) jobs.push_back({t, c, k});

  threads = std::clamp<std::size_t>(threads, 1, jobs.size());
  std::vector<std::vector<TrialRow>> partial(threads);
  std::atomic<std::size_t> next{0};
  const auto worker = [&](std::size_t w) {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) run_job(grid, algs, jobs[j], partial[w]);
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  std::vector<TrialRow> rows;
  for (auto& p : partial) rows.insert(rows.end(), p.begin(), p.end());
  std::sort(rows.begin(), rows.end(), [](const TrialRow& a, const TrialRow& b) {
    return std::tie(a.tasks, a.cores, a.trial, a.algorithm) < std::tie(b.tasks, b.cores, b.trial, b.algorithm);
  });
  return rows;
}

ExperimentSummary summarize(const std::vector<TrialRow>& rows) {
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::map<Algorithm, Acc>> cells;
  Acc diff;
  for (const auto& r : rows) {
    auto& acc = cells[{r.tasks, r.cores}][r.algorithm];
    acc.sum += r.normalized;
    ++acc.n;
    if (r.algorithm == Algorithm::kDiffMin) {
      diff.sum += r.normalized;
      ++diff.n;
    }
  }

  ExperimentSummary s;
  for (const auto& [key, algs] : cells) {
    CellSummary cell{key.first, key.second, {}};
    for (const auto& [a, acc] : algs) cell.mean_normalized[a] = acc.sum / static_cast<double>(acc.n);
    if (auto it = cell.mean_normalized.find(Algorithm::kDiffMin); it != cell.mean_normalized.end() && it->second < 1.0)
      ++s.cells_improved;
    s.cells.push_back(std::move(cell));
  }
  if (diff.n > 0) {
    s.diff_min_mean_normalized = diff.sum / static_cast<double>(diff.n);
    s.diff_min_mean_improvement = 1.0 - s.diff_min_mean_normalized;
  }
  return s;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  T v{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
    throw ParseError(row, col, "not a number: '" + cell + "'");
  return v;
}

}  // namespace

void write_rows_csv(const std::vector<TrialRow>& rows, std::ostream& out) {
  out << "tasks,cores,trial,algorithm,makespan,normalized_makespan\n";
  for (const auto& r : rows) {
    out << r.tasks << ',' << r.cores << ',' << r.trial << ',' << to_string(r.algorithm) << ','
        << format_double(r.makespan) << ',' << format_double(r.normalized) << '\n';
  }
}

std::vector<TrialRow> read_rows_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "tasks,cores,trial,algorithm,makespan,normalized_makespan")
    throw ParseError(1, 0, "unexpected header");
  std::vector<TrialRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) throw ParseError(row, 0, "expected 6 cells");
    TrialRow r;
    r.tasks = parse_number<std::size_t>(cells[0], row, 1);
    r.cores = parse_number<std::size_t>(cells[1], row, 2);
    r.trial = parse_number<std::size_t>(cells[2], row, 3);
    try {
      r.algorithm = parse_algorithm(cells[3]);
    } catch (const ValidationError& e) {
      throw ParseError(row, 4, e.what());
    }
    r.makespan = parse_number<double>(cells[4], row, 5);
    r.normalized = parse_number<double>(cells[5], row, 6);
    rows.push_back(r);
  }
  return rows;
}

std::string format_summary(const ExperimentSummary& summary) {
  std::string out;
  char buf[128];
  for (const auto& cell : summary.cells) {
    std::snprintf(buf, sizeof buf, "tasks=%-3zu cores=%-2zu", cell.tasks, cell.cores);
    out += buf;
    for (const auto& [a, mean] : cell.mean_normalized) {
      std::snprintf(buf, sizeof buf, "  %s=%.4f", to_string(a).c_str(), mean);
      out += buf;
    }
    out += '\n';
  }
  std::snprintf(buf, sizeof buf,
                "diff-min mean normalized makespan %.4f, mean improvement %.2f%%, improved cells %zu/%zu\n",
                summary.diff_min_mean_normalized, 100.0 * summary.diff_min_mean_improvement,
                summary.cells_improved, summary.cells.size());
  out += buf;
  return out;
}

}  // namespace piedge
