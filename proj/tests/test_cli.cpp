#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  if (const char* p = std::getenv("FTBO_CLI_PATH")) return p;
#ifdef FTBO_CLI_PATH
  return FTBO_CLI_PATH;  // baked in by the build for ctest runs
#else
  REQUIRE_MESSAGE(false, "FTBO_CLI_PATH must point at the CLI binary");
  return "";
#endif
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("ftbo_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const fs::path log =
      fs::temp_directory_path() /
      ("ftbo_cli_log_" + std::to_string(::getpid()) + ".txt");
  const std::string cmd =
      env + (env.empty() ? "" : " ") + cli_path() + " " + args + " > " +
      log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// parsed trace: per config, max step seen; plus total row count
struct TraceStats {
  int rows = 0;
  std::map<int, int> frontier;
};

TraceStats parse_trace(const fs::path& csv) {
  TraceStats st;
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int iter, id, step;
    double y, inc;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%d,%lg,%lg", &iter, &id, &step,
                        &y, &inc) == 5);
    ++st.rows;
    st.frontier[id] = std::max(st.frontier[id], step);
  }
  return st;
}

// Generates a small benchmark directory once per tag.
fs::path gen_tasks(const std::string& tag, const std::string& extra) {
  const fs::path dir = fresh_dir(tag);
  const CliResult r = run_cli("gen-tasks --seed 3 --out " +
                              (dir / "tasks").string() + " " + extra);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  return dir / "tasks";
}

}  // namespace

TEST_CASE("gen-tasks writes a deterministic, byte-identical tree") {
  const fs::path a = fresh_dir("gen_a");
  const fs::path b = fresh_dir("gen_b");
  const std::string args =
      "gen-tasks --n-tasks 3 --n-configs 6 --dims 2 "
      "--b-max-lo 4 --b-max-hi 8 --seed 11 --out ";
  REQUIRE(run_cli(args + a.string()).code == 0);
  REQUIRE(run_cli(args + b.string()).code == 0);
  for (int i = 0; i < 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "task_%04d.json", i);
    REQUIRE_MESSAGE(fs::exists(a / name), name);
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(fs::exists(a / "resolved_config.json"));
}

TEST_CASE("gen-tasks rejects out-of-range dims with exit code 2") {
  const fs::path dir = fresh_dir("gen_bad");
  const CliResult r =
      run_cli("gen-tasks --dims 0 --out " + (dir / "t").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("1..10") != std::string::npos);
}

TEST_CASE("run-hpo rs spends the budget on whole curves") {
  const fs::path tasks = gen_tasks(
      "rs", "--n-tasks 1 --n-configs 30 --dims 1 --b-max-lo 25 --b-max-hi 25");
  const fs::path out = fresh_dir("rs_out") / "traces";
  const CliResult r =
      run_cli("run-hpo --task " + tasks.string() + " --algo rs --budget 500" +
              " --seed 5 --out " + out.string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const fs::path csv = out / "task_0000__rs__rep0.csv";
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(out / "task_0000__rs__rep0.json"));
  const TraceStats st = parse_trace(csv);
  CHECK(st.rows == 500);
  int full = 0;
  for (const auto& [id, f] : st.frontier) {
    CHECK(f == 25);  // random search only trains whole curves
    ++full;
  }
  CHECK(full == 20);
}

TEST_CASE("run-hpo rejects unknown algorithms, listing the registry") {
  const fs::path tasks = gen_tasks(
      "unk", "--n-tasks 1 --n-configs 4 --dims 1 --b-max-lo 3 --b-max-hi 3");
  const fs::path out = fresh_dir("unk_out");
  const CliResult r = run_cli("run-hpo --task " + tasks.string() +
                              " --algo sgd --out " + (out / "t").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("unknown algorithm 'sgd'") != std::string::npos);
  CHECK(r.output.find("hyperband") != std::string::npos);
  CHECK(r.output.find("mfpi-random") != std::string::npos);
}

TEST_CASE("run-hpo validates samples, unit step, and the task path") {
  const fs::path tasks = gen_tasks(
      "val", "--n-tasks 1 --n-configs 4 --dims 1 --b-max-lo 3 --b-max-hi 3");
  const fs::path out = fresh_dir("val_out");
  CliResult r = run_cli("run-hpo --task " + tasks.string() +
                        " --samples 8 --out " + (out / "a").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("--samples") != std::string::npos);

  r = run_cli("run-hpo --task " + tasks.string() + " --unit-step 2 --out " +
              (out / "b").string());
  CHECK(r.code == 2);

  const fs::path empty = fresh_dir("val_empty");
  r = run_cli("run-hpo --task " + empty.string() + " --out " +
              (out / "c").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("no benchmark files found") != std::string::npos);
}

TEST_CASE("ifbo alias runs freeze-thaw with the mfpi-random label") {
  const fs::path tasks = gen_tasks(
      "ifbo", "--n-tasks 1 --n-configs 5 --dims 1 --b-max-lo 4 --b-max-hi 4");
  const fs::path out = fresh_dir("ifbo_out") / "traces";
  const CliResult r = run_cli("run-hpo --task " + tasks.string() +
                              " --algo ifbo --budget 8 --samples 32" +
                              " --seed 1 --out " + out.string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const fs::path csv = out / "task_0000__ifbo__rep0.csv";
  REQUIRE(fs::exists(csv));
  CHECK(parse_trace(csv).rows == 8);
  // sidecar carries the resolved acquisition
  const std::string side = slurp(out / "task_0000__ifbo__rep0.json");
  CHECK(side.find("mfpi-random") != std::string::npos);
}

TEST_CASE("compare aggregates a full grid into rank and regret curves") {
  const fs::path tasks = gen_tasks(
      "cmp", "--n-tasks 2 --n-configs 8 --dims 1 --b-max-lo 5 --b-max-hi 5");
  const fs::path traces = fresh_dir("cmp_traces") / "traces";
  for (const std::string algo : {"rs", "hyperband"}) {
    const CliResult r = run_cli("run-hpo --task " + tasks.string() +
                                " --algo " + algo +
                                " --budget 15 --reps 2 --seed 4 --out " +
                                traces.string());
    REQUIRE_MESSAGE(r.code == 0, r.output);
  }
  const fs::path out1 = fresh_dir("cmp_out1");
  const fs::path out2 = fresh_dir("cmp_out2");
  CliResult r = run_cli("compare --traces " + traces.string() + " --out " +
                        out1.string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  REQUIRE(run_cli("compare --traces " + traces.string() + " --out " +
                  out2.string())
              .code == 0);

  const std::string body = slurp(out1 / "regret_rank.csv");
  CHECK(body.rfind("step,algorithm,avg_rank,mean_regret\n", 0) == 0);
  CHECK(body == slurp(out2 / "regret_rank.csv"));  // deterministic

  // rank-sum identity per step for two algorithms: 1+2 = 3
  std::istringstream in(body);
  std::string line;
  std::getline(in, line);
  std::map<int, double> rank_sum;
  while (std::getline(in, line)) {
    int step;
    char algo[64];
    double rank, regret;
    REQUIRE(std::sscanf(line.c_str(), "%d,%63[^,],%lg,%lg", &step, algo,
                        &rank, &regret) == 4);
    rank_sum[step] += rank;
    CHECK(regret >= 0.0);
    CHECK(regret <= 1.0);
  }
  REQUIRE(rank_sum.size() == 15);  // horizon: every trace has 15 steps
  for (const auto& [step, s] : rank_sum) CHECK(s == doctest::Approx(3.0));
}

TEST_CASE("config overlay fills defaults but never overrides CLI flags") {
  const fs::path dir = fresh_dir("overlay");
  const fs::path cfg = dir / "cfg.json";
  {
    std::ofstream out(cfg);
    out << "{\"n-tasks\": 3, \"n-configs\": 4, \"dims\": \"1\","
           " \"b-max-lo\": 3, \"b-max-hi\": 3}\n";
  }
  // config only: 3 tasks
  const fs::path o1 = dir / "o1";
  REQUIRE(run_cli("gen-tasks --config " + cfg.string() + " --out " +
                  o1.string())
              .code == 0);
  CHECK(fs::exists(o1 / "task_0002.json"));
  CHECK_FALSE(fs::exists(o1 / "task_0003.json"));

  // CLI flag wins over the config value
  const fs::path o2 = dir / "o2";
  REQUIRE(run_cli("gen-tasks --config " + cfg.string() + " --n-tasks 2" +
                  " --out " + o2.string())
              .code == 0);
  CHECK(fs::exists(o2 / "task_0001.json"));
  CHECK_FALSE(fs::exists(o2 / "task_0002.json"));
}

TEST_CASE("relative output paths resolve under FTBO_OUT_ROOT") {
  const fs::path root = fresh_dir("outroot");
  const CliResult r = run_cli(
      "gen-tasks --n-tasks 1 --n-configs 3 --dims 1 --b-max-lo 2"
      " --b-max-hi 2 --out nested/tasks",
      "FTBO_OUT_ROOT=" + root.string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(fs::exists(root / "nested" / "tasks" / "task_0000.json"));
}
