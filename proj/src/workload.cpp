#include "piedge/workload.hpp"

#include "piedge/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace piedge {

ParseError::ParseError(std::size_t row, std::size_t column, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) +
                         (column ? ", column " + std::to_string(column) : std::string()) + ": " + what),
      row_(row),
      column_(column) {}

EtcTable::EtcTable(std::size_t tasks, std::size_t cores, std::vector<Entry> entries)
    : tasks_(tasks), cores_(cores), entries_(std::move(entries)) {
  if (tasks_ == 0 || cores_ == 0) throw ValidationError("ETC table needs at least one task and one core");
  if (entries_.size() != tasks_ * cores_) throw ValidationError("ETC entry count does not match dimensions");
  for (std::size_t t = 0; t < tasks_; ++t) {
    bool any = false;
    for (std::size_t c = 0; c < cores_; ++c) {
      const Entry& e = entries_[t * cores_ + c];
      if (!e) continue;
      if (!std::isfinite(*e) || *e <= 0.0) {
        throw ValidationError("ETC(" + std::to_string(t) + "," + std::to_string(c) +
                              ") must be finite and > 0");
      }
      any = true;
    }
    if (!any) throw ValidationError("task " + std::to_string(t) + " has no feasible core");
  }
}

EtcTable EtcTable::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("ETC table needs at least one task");
  const std::size_t cores = rows.front().size();
  std::vector<Entry> entries;
  entries.reserve(rows.size() * cores);
  for (const auto& r : rows) {
    if (r.size() != cores) throw ValidationError("ETC rows have unequal widths");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return EtcTable(rows.size(), cores, std::move(entries));
}

const EtcTable::Entry& EtcTable::at(TaskIndex task, CoreIndex core) const {
  if (task >= tasks_ || core >= cores_) throw std::out_of_range("ETC index out of range");
  return entries_[task * cores_ + core];
}

std::vector<EtcTable::Entry> EtcTable::row(TaskIndex task) const {
  if (task >= tasks_) throw std::out_of_range("ETC task index out of range");
  auto first = entries_.begin() + static_cast<std::ptrdiff_t>(task * cores_);
  return {first, first + static_cast<std::ptrdiff_t>(cores_)};
}

double EtcTable::min_time(TaskIndex task) const {
  double best = std::numeric_limits<double>::infinity();
  for (CoreIndex c = 0; c < cores_; ++c)
    if (const auto& e = at(task, c)) best = std::min(best, *e);
  return best;
}

double EtcTable::max_time(TaskIndex task) const {
  double worst = 0.0;
  for (CoreIndex c = 0; c < cores_; ++c)
    if (const auto& e = at(task, c)) worst = std::max(worst, *e);
  return worst;
}

EtcTable EtcTable::scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("scale factor must be > 0");
  std::vector<Entry> out = entries_;
  for (auto& e : out)
    if (e) *e *= factor;
  return EtcTable(tasks_, cores_, std::move(out));
}

EtcTable EtcTable::select_tasks(const std::vector<TaskIndex>& tasks) const {
  std::vector<Entry> out;
  out.reserve(tasks.size() * cores_);
  for (TaskIndex t : tasks) {
    auto r = row(t);
    out.insert(out.end(), r.begin(), r.end());
  }
  return EtcTable(tasks.size(), cores_, std::move(out));
}

EtcTable generate_etc(const GenSpec& spec) {
  if (spec.tasks == 0 || spec.cores == 0) throw ValidationError("tasks and cores must be >= 1");
  if (!std::isfinite(spec.low) || !std::isfinite(spec.high) || !(spec.low < spec.high))
    throw ValidationError("value range needs low < high");
  if (spec.low < 0.0) throw ValidationError("value range must be non-negative");

  std::mt19937_64 rng(spec.seed);
  std::vector<EtcTable::Entry> entries;
  entries.reserve(spec.tasks * spec.cores);

  if (spec.kind == ValueKind::kInteger) {
    const double first = std::floor(spec.low) + 1.0;
    const double last = std::ceil(spec.high) - 1.0;
    if (first > last || first <= 0.0) throw ValidationError("no integer strictly inside value range");
    const auto count = static_cast<std::uint64_t>(last - first) + 1;
    for (std::size_t i = 0; i < spec.tasks * spec.cores; ++i)
      entries.emplace_back(first + static_cast<double>(uniform_below(rng, count)));
  } else {
    const double width = spec.high - spec.low;
    for (std::size_t i = 0; i < spec.tasks * spec.cores; ++i) {
      double v;
      do {
        v = spec.low + unit_interval(rng) * width;
      } while (!(v > spec.low && v < spec.high));
      entries.emplace_back(v);
    }
  }
  return EtcTable(spec.tasks, spec.cores, std::move(entries));
}

namespace {

void require_feasible(const EtcTable& etc, TaskIndex task) {
  if (task >= etc.tasks()) throw std::out_of_range("task index out of range");
  for (CoreIndex c = 0; c < etc.cores(); ++c)
    if (etc.feasible(task, c)) return;
  throw DomainError("task " + std::to_string(task) + " has no feasible core");
}

}  // namespace

double div_metric(const EtcTable& etc, TaskIndex task) {
  require_feasible(etc, task);
  return etc.max_time(task) / etc.min_time(task);
}

double sub_metric(const EtcTable& etc, TaskIndex task) {
  require_feasible(etc, task);
  return etc.max_time(task) - etc.min_time(task);
}

namespace {

std::string format_value(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

void save_etc(const EtcTable& etc, std::ostream& out) {
  out << "task";
  for (CoreIndex c = 0; c < etc.cores(); ++c) out << ",core_" << c;
  out << '\n';
  for (TaskIndex t = 0; t < etc.tasks(); ++t) {
    out << t;
    for (CoreIndex c = 0; c < etc.cores(); ++c) {
      const auto& e = etc.at(t, c);
      out << ',' << (e ? format_value(*e) : std::string("inf"));
    }
    out << '\n';
  }
}

EtcTable load_etc(std::istream& in) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw ParseError(1, 0, "missing header");
  const auto header = split_csv_line(trim(line));
  if (header.size() < 2 || trim(header[0]) != "task") throw ParseError(1, 1, "header must start with 'task'");
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (trim(header[c]) != "core_" + std::to_string(c - 1))
      throw ParseError(1, c + 1, "expected header 'core_" + std::to_string(c - 1) + "'");
  }
  const std::size_t cores = header.size() - 1;

  std::vector<EtcTable::Entry> entries;
  std::size_t tasks = 0;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cores + 1)
      throw ParseError(row, 0, "expected " + std::to_string(cores + 1) + " cells, got " +
                                   std::to_string(cells.size()));
    if (trim(cells[0]) != std::to_string(tasks))
      throw ParseError(row, 1, "expected task index " + std::to_string(tasks));
    for (std::size_t c = 1; c <= cores; ++c) {
      const std::string cell = trim(cells[c]);
      if (cell == "inf") {
        entries.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
        throw ParseError(row, c + 1, "not a number: '" + cell + "'");
      if (!std::isfinite(v) || v <= 0.0) throw ParseError(row, c + 1, "entry must be > 0: '" + cell + "'");
      entries.emplace_back(v);
    }
    ++tasks;
  }
  if (tasks == 0) throw ParseError(row, 0, "no task rows");
  try {
    return EtcTable(tasks, cores, std::move(entries));
  } catch (const ValidationError& e) {
    throw ParseError(0, 0, e.what());
  }
}

void save_etc_file(const EtcTable& etc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  save_etc(etc, out);
  if (!out) throw std::ios_base::failure("write to '" + path + "' failed");
}

EtcTable load_etc_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  return load_etc(in);
}

TaskGraph::TaskGraph(std::vector<std::string> ids, EtcTable etc, std::vector<Edge> edges)
    : ids_(std::move(ids)), etc_(std::move(etc)), edges_(std::move(edges)) {
  if (ids_.size() != etc_.tasks()) throw ValidationError("task id count does not match ETC rows");
  succ_.resize(ids_.size());
  pred_.resize(ids_.size());
  for (const Edge& e : edges_) {
    if (e.from >= ids_.size() || e.to >= ids_.size()) throw ValidationError("edge endpoint out of range");
    if (!std::isfinite(e.comm) || e.comm < 0.0) throw ValidationError("edge comm cost must be >= 0");
    succ_[e.from].push_back(e.to);
    pred_[e.to].push_back(e.from);
  }
}

double TaskGraph::comm(std::size_t from, std::size_t to) const {
  for (const Edge& e : edges_)
    if (e.from == from && e.to == to) return e.comm;
  return 0.0;
}

double TaskGraph::mean_etc(std::size_t node) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (CoreIndex c = 0; c < etc_.cores(); ++c) {
    if (const auto& e = etc_.at(node, c)) {
      sum += *e;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

TaskGraph parse_task_graph(const std::string& json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed DAG JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("cores") || !doc["cores"].is_number_unsigned())
    throw ValidationError("DAG JSON: 'cores' must be a positive integer");
  if (!doc.contains("tasks") || !doc["tasks"].is_array()) throw ValidationError("DAG JSON: 'tasks' must be an array");

  const auto cores = doc["cores"].get<std::size_t>();
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  std::vector<EtcTable::Entry> entries;
  for (const auto& t : doc["tasks"]) {
    if (!t.contains("id") || !t["id"].is_string()) throw ValidationError("DAG JSON: task 'id' must be a string");
    const auto id = t["id"].get<std::string>();
    if (!index.emplace(id, ids.size()).second) throw ValidationError("DAG JSON: duplicate task id '" + id + "'");
    ids.push_back(id);
    if (!t.contains("etc") || !t["etc"].is_array() || t["etc"].size() != cores)
      throw ValidationError("DAG JSON: task '" + id + "' needs an 'etc' array of width " + std::to_string(cores));
    for (const auto& v : t["etc"]) {
      if (v.is_string() && v.get<std::string>() == "inf") {
        entries.emplace_back(std::nullopt);
      } else if (v.is_number()) {
        entries.emplace_back(v.get<double>());
      } else {
        throw ValidationError("DAG JSON: task '" + id + "' has a non-numeric 'etc' entry");
      }
    }
  }

  std::vector<Edge> edges;
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) throw ValidationError("DAG JSON: 'edges' must be an array");
    for (const auto& e : doc["edges"]) {
      const auto lookup = [&](const char* key) {
        if (!e.contains(key) || !e[key].is_string())
          throw ValidationError(std::string("DAG JSON: edge '") + key + "' must be a task id");
        auto it = index.find(e[key].get<std::string>());
        if (it == index.end()) throw ValidationError("DAG JSON: unknown task id '" + e[key].get<std::string>() + "'");
        return it->second;
      };
      Edge edge{lookup("from"), lookup("to"), 0.0};
      if (e.contains("comm")) {
        if (!e["comm"].is_number()) throw ValidationError("DAG JSON: edge 'comm' must be a number");
        edge.comm = e["comm"].get<double>();
      }
      edges.push_back(edge);
    }
  }
  EtcTable etc(ids.size(), cores, std::move(entries));
  return TaskGraph(std::move(ids), std::move(etc), std::move(edges));
}

}  // namespace piedge
