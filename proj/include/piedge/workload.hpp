#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace piedge {

/// Raised when an input violates a documented invariant (bad dimensions,
/// non-positive execution time, empty range, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a metric or operation is undefined for its input, e.g. a task
/// with no feasible core.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// CSV parse failure. `row` and `column` are 1-based positions in the file;
/// column 0 means the whole row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what);

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

using TaskIndex = std::size_t;
using CoreIndex = std::size_t;

/// Expected-time-to-compute table: entry (task, core) is the expected
/// execution time of the task on that core, or empty when the core cannot
/// run the task at all.
class EtcTable {
 public:
  using Entry = std::optional<double>;

  /// Builds a table from row-major entries. Throws ValidationError unless
  /// tasks >= 1, cores >= 1, every finite entry is > 0 and every task has at
  /// least one feasible core.
  EtcTable(std::size_t tasks, std::size_t cores, std::vector<Entry> entries);

  /// Convenience for fully feasible tables, one inner vector per task.
  static EtcTable from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t tasks() const noexcept { return tasks_; }
  std::size_t cores() const noexcept { return cores_; }

  const Entry& at(TaskIndex task, CoreIndex core) const;
  bool feasible(TaskIndex task, CoreIndex core) const { return at(task, core).has_value(); }

  /// Row of one task, `cores()` entries.
  std::vector<Entry> row(TaskIndex task) const;

  /// Fastest and slowest feasible time of a task.
  double min_time(TaskIndex task) const;
  double max_time(TaskIndex task) const;

  /// Copy with every finite entry multiplied by `factor` (> 0).
  EtcTable scaled(double factor) const;

  /// Sub-table made of the given tasks, in the given order.
  EtcTable select_tasks(const std::vector<TaskIndex>& tasks) const;

  friend bool operator==(const EtcTable&, const EtcTable&) = default;

 private:
  std::size_t tasks_;
  std::size_t cores_;
  std::vector<Entry> entries_;
};

enum class ValueKind { kContinuous, kInteger };

struct GenSpec {
  std::size_t tasks = 10;
  std::size_t cores = 3;
  double low = 1.0;
  double high = 30.0;
  ValueKind kind = ValueKind::kContinuous;
  std::uint64_t seed = 0;
};

/// Random instance with every entry drawn independently and strictly inside
/// (low, high). Continuous values are uniform; integer values are uniform over
/// the integers strictly between the bounds. Same spec, same table, on every
/// platform.
EtcTable generate_etc(const GenSpec& spec);

/// max/min feasible time of a task (>= 1).
double div_metric(const EtcTable& etc, TaskIndex task);

/// max - min feasible time of a task (>= 0).
double sub_metric(const EtcTable& etc, TaskIndex task);

// CSV: header `task,core_0,...,core_{n-1}`, one row per task starting with the
// task index; "inf" marks an infeasible entry. Values are written with enough
// digits to round-trip doubles exactly.
void save_etc(const EtcTable& etc, std::ostream& out);
EtcTable load_etc(std::istream& in);

void save_etc_file(const EtcTable& etc, const std::string& path);
EtcTable load_etc_file(const std::string& path);

/// Directed dependency between two tasks of a TaskGraph.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double comm = 0.0;
};

/// DAG of sub-tasks. Each node carries its own ETC row.
class TaskGraph {
 public:
  /// Throws ValidationError on bad endpoints, negative comm, rows of unequal
  /// width or rows violating the EtcTable invariants. Cycles are detected
  /// later by the DAG operations, which report a witness.
  TaskGraph(std::vector<std::string> ids, EtcTable etc, std::vector<Edge> edges);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t cores() const noexcept { return etc_.cores(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const EtcTable& etc() const noexcept { return etc_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  const std::vector<std::size_t>& successors(std::size_t node) const { return succ_.at(node); }
  const std::vector<std::size_t>& predecessors(std::size_t node) const { return pred_.at(node); }

  /// Communication cost of edge from->to, 0 when absent.
  double comm(std::size_t from, std::size_t to) const;

  /// Mean of the node's feasible ETC entries.
  double mean_etc(std::size_t node) const;

 private:
  std::vector<std::string> ids_;
  EtcTable etc_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::vector<std::size_t>> pred_;
};

/// Parses the DAG JSON document:
/// `{ "cores": n, "tasks": [{"id", "etc": [...]}], "edges": [{"from", "to", "comm"}] }`.
/// Edge endpoints refer to task ids. An "etc" entry may be the string "inf".
TaskGraph parse_task_graph(const std::string& json_text);

}  // namespace piedge
