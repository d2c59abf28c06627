// piedge: instance generation, scheduling experiments, offloading decisions
// and bus benchmarks.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 IO.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "piedge/bench.hpp"
#include "piedge/dag.hpp"
#include "piedge/experiment.hpp"
#include "piedge/offload.hpp"
#include "piedge/tcp.hpp"

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kValidation = 2, kIo = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
}

piedge::ValueKind parse_kind(const std::string& kind) {
  return kind == "integer" ? piedge::ValueKind::kInteger : piedge::ValueKind::kContinuous;
}

// gen ----------------------------------------------------------------------

struct GenArgs {
  std::size_t tasks = 10;
  std::size_t cores = 3;
  double low = 1.0;
  double high = 30.0;
  std::string kind = "continuous";
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenArgs& a) {
  if (a.tasks == 0 || a.cores == 0) throw UsageError("--tasks and --cores must be >= 1");
  piedge::GenSpec spec{a.tasks, a.cores, a.low, a.high, parse_kind(a.kind), a.seed};
  const auto etc = piedge::generate_etc(spec);
  std::ostringstream csv;
  piedge::save_etc(etc, csv);
  write_file(a.out, csv.str());
  std::cout << a.out << '\n';
  return kOk;
}

// sched-compare --------------------------------------------------------------

struct CompareArgs {
  std::vector<std::size_t> tasks{10, 20, 30, 40, 50};
  std::vector<std::size_t> cores{3, 4, 5, 6};
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::vector<std::string> algorithms{"min-min", "diff-min"};
  std::string kind = "continuous";
  std::size_t threads = 1;
  std::string out = "sched_compare.csv";
};

int run_compare(const CompareArgs& a) {
  piedge::ExperimentGrid grid;
  grid.task_counts = a.tasks;
  grid.core_counts = a.cores;
  grid.trials = a.trials;
  grid.seed = a.seed;
  grid.kind = parse_kind(a.kind);
  grid.algorithms.clear();
  for (const auto& name : a.algorithms) grid.algorithms.push_back(piedge::parse_algorithm(name));

  const auto rows = piedge::run_experiment(grid, a.threads);
  std::ostringstream csv;
  piedge::write_rows_csv(rows, csv);
  write_file(a.out, csv.str());
  std::cout << piedge::format_summary(piedge::summarize(rows)) << "rows written to " << a.out << '\n';
  return kOk;
}

// sched-dag ---------------------------------------------------------------------

int run_dag(const std::string& path, const std::string& inner_name) {
  const auto graph = piedge::parse_task_graph(read_file(path));
  piedge::InnerAlgorithm inner;
  if (inner_name == "min-min") inner = piedge::InnerAlgorithm::kMinMin;
  else if (inner_name == "diff-min") inner = piedge::InnerAlgorithm::kDiffMin;
  else throw UsageError("--inner must be min-min or diff-min");

  const auto result = piedge::schedule_dag(graph, inner);
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t i = 0; i < result.layers.size(); ++i) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& d : result.per_layer[i].decision_log)
      tasks.push_back({{"id", graph.ids()[d.task]}, {"core", d.core}, {"finish", d.completion_time}});
    layers.push_back({{"makespan", result.per_layer[i].makespan}, {"tasks", tasks}});
  }
  nlohmann::json ranks = nlohmann::json::object();
  for (std::size_t t = 0; t < graph.size(); ++t) ranks[graph.ids()[t]] = result.ranks[t];
  nlohmann::json doc{{"inner", inner_name}, {"layers", layers}, {"ranks", ranks},
                     {"total_makespan", result.total_makespan}};
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

// offload ---------------------------------------------------------------------

int run_offload(const std::string& path, bool coverage, const std::string& out) {
  const auto scenario = piedge::parse_scenario(read_file(path));
  const auto decision =
      piedge::select_node(scenario.vehicle, scenario.nodes, scenario.params, piedge::SelectOptions{coverage});
  const auto report = piedge::decision_to_json(decision);
  if (out.empty()) std::cout << report;
  else write_file(out, report);
  return kOk;
}

// bus-bench ---------------------------------------------------------------------

struct BenchArgs {
  std::size_t subscribers = 1;
  std::vector<std::size_t> sweep;
  std::size_t size = 65536;
  std::string mode = "zero-copy";
  long duration_ms = 1000;
  bool latency = false;
  std::vector<std::size_t> sizes{1024, 1048576};
  std::string transport = "inproc";
  std::size_t samples = 1000;
};

int run_bench(const BenchArgs& a) {
  using namespace piedge::bus;
  if (a.latency) {
    if (a.samples < 100) throw UsageError("--samples must be >= 100");
    const Transport t = a.transport == "tcp" ? Transport::kTcpLoopback : Transport::kInProcess;
    std::cout << "msg_size,transport,samples,mean_us,p99_us\n";
    for (auto size : a.sizes) {
      const auto r = bench_latency(size, t, a.samples);
      std::printf("%zu,%s,%zu,%.3f,%.3f\n", r.msg_size, to_string(r.transport).c_str(), r.samples, r.mean_us,
                  r.p99_us);
    }
    return kOk;
  }

  std::vector<std::size_t> counts = a.sweep.empty() ? std::vector<std::size_t>{a.subscribers} : a.sweep;
  for (auto n : counts)
    if (n == 0) throw UsageError("--subscribers must be >= 1");
  std::vector<FanoutMode> modes;
  if (a.mode == "zero-copy" || a.mode == "both") modes.push_back(FanoutMode::kZeroCopy);
  if (a.mode == "copy" || a.mode == "both") modes.push_back(FanoutMode::kPerSubscriberCopy);

  std::cout << "n_subscribers,msg_size,mode,msgs_per_s,bytes_per_s\n";
  for (auto mode : modes) {
    for (auto n : counts) {
      const auto r = bench_throughput(n, a.size, mode, std::chrono::milliseconds(a.duration_ms));
      std::printf("%zu,%zu,%s,%.1f,%.1f\n", r.subscribers, r.msg_size, to_string(r.mode).c_str(), r.msgs_per_s,
                  r.bytes_per_s);
    }
  }
  return kOk;
}

// bus-serve ---------------------------------------------------------------------

std::atomic<bool> g_stop{false};

int run_serve(const std::string& addr, double seconds) {
  using namespace piedge::bus;
  const Address listen = addr.empty() ? address_from_env() : Address::parse(addr);
  Bus bus;
  TcpBusBridge bridge(bus, listen);
  std::cout << "listening on " << listen.host << ':' << bridge.port() << std::endl;

  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  while (!g_stop && (seconds <= 0 || std::chrono::steady_clock::now() < deadline))
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  bridge.stop();
  bus.shutdown();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pi-edge scheduling, offloading and bus toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a random ETC table as CSV");
  gen_cmd->add_option("--tasks", gen.tasks, "number of tasks")->required();
  gen_cmd->add_option("--cores", gen.cores, "number of cores")->required();
  gen_cmd->add_option("--low", gen.low, "lower bound (exclusive)");
  gen_cmd->add_option("--high", gen.high, "upper bound (exclusive)");
  gen_cmd->add_option("--kind", gen.kind)->check(CLI::IsMember({"continuous", "integer"}));
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out, "output CSV path")->required();

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("sched-compare", "compare heuristics over a task/core grid");
  cmp_cmd->add_option("--tasks", cmp.tasks)->delimiter(',');
  cmp_cmd->add_option("--cores", cmp.cores)->delimiter(',');
  cmp_cmd->add_option("--trials", cmp.trials);
  cmp_cmd->add_option("--seed", cmp.seed);
  cmp_cmd->add_option("--algorithms", cmp.algorithms)
      ->delimiter(',')
      ->check(CLI::IsMember({"min-min", "max-min", "diff-min", "optimal"}));
  cmp_cmd->add_option("--kind", cmp.kind)->check(CLI::IsMember({"continuous", "integer"}));
  cmp_cmd->add_option("--threads", cmp.threads)->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--out", cmp.out, "per-trial CSV path");

  std::string dag_path, dag_inner = "diff-min";
  auto* dag_cmd = app.add_subcommand("sched-dag", "layered scheduling of a DAG JSON file");
  dag_cmd->add_option("graph", dag_path)->required();
  dag_cmd->add_option("--inner", dag_inner)->check(CLI::IsMember({"min-min", "diff-min"}));

  std::string scenario_path, offload_out;
  bool no_coverage = false;
  auto* off_cmd = app.add_subcommand("offload", "choose an edge node for a scenario JSON file");
  off_cmd->add_option("scenario", scenario_path)->required();
  off_cmd->add_flag("--no-coverage-check", no_coverage, "skip the offload-within-dwell gate");
  off_cmd->add_option("--out", offload_out, "write the report here instead of stdout");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bus-bench", "bus throughput and latency benchmarks");
  bench_cmd->add_option("--subscribers", bench.subscribers);
  bench_cmd->add_option("--sweep-subscribers", bench.sweep)->delimiter(',');
  bench_cmd->add_option("--size", bench.size, "payload bytes");
  bench_cmd->add_option("--mode", bench.mode)->check(CLI::IsMember({"zero-copy", "copy", "both"}));
  bench_cmd->add_option("--duration-ms", bench.duration_ms)->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--latency", bench.latency, "run the latency benchmark instead");
  bench_cmd->add_option("--sizes", bench.sizes)->delimiter(',');
  bench_cmd->add_option("--transport", bench.transport)->check(CLI::IsMember({"inproc", "tcp"}));
  bench_cmd->add_option("--samples", bench.samples);

  std::string serve_addr;
  double serve_seconds = 0;
  auto* serve_cmd = app.add_subcommand("bus-serve", "run a TCP bus endpoint");
  serve_cmd->add_option("--addr", serve_addr, "host:port (default $PIEDGE_BUS_ADDR or 127.0.0.1:7400)");
  serve_cmd->add_option("--seconds", serve_seconds, "stop after this long (0 = until interrupted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*cmp_cmd) return run_compare(cmp);
    if (*dag_cmd) return run_dag(dag_path, dag_inner);
    if (*off_cmd) return run_offload(scenario_path, !no_coverage, offload_out);
    if (*bench_cmd) return run_bench(bench);
    if (*serve_cmd) return run_serve(serve_addr, serve_seconds);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const piedge::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const piedge::ParseError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const piedge::GraphError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const piedge::bus::BusError& e) {
    std::cerr << "bus error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}
