// Runs the piedge binary end to end.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(PIEDGE_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("piedge_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

TEST_F(Cli, GenWritesDeterministicCsv) {
  auto r = run("gen --tasks 10 --cores 3 --seed 7 --out " + path("a.csv"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("a.csv"), std::string::npos);
  ASSERT_EQ(run("gen --tasks 10 --cores 3 --seed 7 --out " + path("b.csv")).code, 0);
  const auto a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 11);
  EXPECT_EQ(a.substr(0, a.find('\n')), "task,core_0,core_1,core_2");
}

TEST_F(Cli, GenRejectsZeroTasks) {
  EXPECT_EQ(run("gen --tasks 0 --cores 3 --out " + path("x.csv")).code, 1);
  EXPECT_EQ(run("gen --cores 3").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST_F(Cli, SchedCompareIsByteIdentical) {
  const std::string args = " --tasks 10 --cores 3 --trials 1 --seed 5 --algorithms min-min,max-min,diff-min";
  auto a = run("sched-compare" + args + " --out " + path("a.csv"));
  auto b = run("sched-compare" + args + " --threads 3 --out " + path("b.csv"));
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.csv")).substr(0, 56), "tasks,cores,trial,algorithm,makespan,normalized_makespan");
}

TEST_F(Cli, SchedCompareOptimalOutsideCapIsValidationError) {
  EXPECT_EQ(run("sched-compare --tasks 30 --cores 3 --trials 1 --algorithms optimal --out " + path("o.csv")).code, 2);
  EXPECT_EQ(run("sched-compare --trials 1 --out /nonexistent-dir/x.csv").code, 3);
}

const char* kScenario = R"({
  "vehicle": {"x": 0, "y": 0, "v": 10, "theta": 1.5707963267948966},
  "params": {"w": 2e9, "f_l": 1e9, "alpha": 1, "beta": 1e-27, "eta": 0.5,
             "d_in": 4e6, "d_out": 1e6, "p_in": 2, "p_out": 1},
  "nodes": [%NODES%]})";

std::string scenario(const std::string& nodes) {
  std::string s = kScenario;
  s.replace(s.find("%NODES%"), 7, nodes);
  return s;
}

TEST_F(Cli, OffloadChoosesLongestDwell) {
  write("s.json", scenario(
      R"({"id": "a", "x": -60, "y": 0, "r_range": 100, "f_off": 4e9, "w_avail": 1e10, "bandwidth": 1e7},
         {"id": "b", "x": 0, "y": 0, "r_range": 100, "f_off": 4e9, "w_avail": 1e10, "bandwidth": 1e7})"));
  const auto a = run("offload " + path("s.json"));
  ASSERT_EQ(a.code, 0);
  EXPECT_NE(a.out.find(R"("choice": "b")"), std::string::npos);
  EXPECT_EQ(a.out, run("offload " + path("s.json")).out);
}

TEST_F(Cli, OffloadEmptyAndInvalid) {
  write("empty.json", scenario(""));
  const auto e = run("offload " + path("empty.json"));
  ASSERT_EQ(e.code, 0);
  EXPECT_NE(e.out.find(R"("choice": "local")"), std::string::npos);

  write("bad.json", scenario(
      R"({"id": "a", "x": 0, "y": 0, "r_range": 100, "f_off": 4e9, "w_avail": 1e10, "bandwidth": -1})"));
  const std::string cmd = std::string(PIEDGE_CLI) + " offload " + path("bad.json") + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  char buf[512] = {};
  const std::size_t got = std::fread(buf, 1, sizeof buf - 1, pipe);
  EXPECT_GT(got, 0u);
  const int status = ::pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), 2);
  EXPECT_NE(std::string(buf).find("bandwidth"), std::string::npos);

  EXPECT_EQ(run("offload " + path("missing.json")).code, 3);
}

TEST_F(Cli, SchedDag) {
  write("g.json", R"({"cores": 2, "tasks": [{"id": "A", "etc": [1, 2]}, {"id": "B", "etc": [1, 2]},
      {"id": "C", "etc": [1, 2]}, {"id": "D", "etc": [1, 2]}],
      "edges": [{"from": "A", "to": "B"}, {"from": "A", "to": "C"}, {"from": "B", "to": "D"}, {"from": "C", "to": "D"}]})");
  const auto r = run("sched-dag " + path("g.json") + " --inner min-min");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(R"("total_makespan": 4.0)"), std::string::npos);

  write("cyc.json", R"({"cores": 1, "tasks": [{"id": "A", "etc": [1]}, {"id": "B", "etc": [1]}],
      "edges": [{"from": "A", "to": "B"}, {"from": "B", "to": "A"}]})");
  EXPECT_EQ(run("sched-dag " + path("cyc.json")).code, 2);
}

TEST_F(Cli, BusBenchRows) {
  const auto t = run("bus-bench --sweep-subscribers 1,2,4,8 --size 65536 --mode both --duration-ms 50");
  ASSERT_EQ(t.code, 0);
  EXPECT_EQ(std::count(t.out.begin(), t.out.end(), '\n'), 9);
  EXPECT_EQ(t.out.substr(0, t.out.find('\n')), "n_subscribers,msg_size,mode,msgs_per_s,bytes_per_s");

  const auto l = run("bus-bench --latency --sizes 1024,1048576 --transport inproc --samples 100");
  ASSERT_EQ(l.code, 0);
  EXPECT_EQ(std::count(l.out.begin(), l.out.end(), '\n'), 3);

  EXPECT_EQ(run("bus-bench --subscribers 0").code, 1);
}

TEST_F(Cli, BusServeStartsAndStops) {
  const auto r = run("bus-serve --addr 127.0.0.1:0 --seconds 0.2");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("listening on 127.0.0.1:"), std::string::npos);
}

}  // namespace
