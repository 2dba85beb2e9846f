// ftbo: freeze-thaw hyperparameter-optimization toolkit.
//
// Subcommands:
//   gen-tasks      generate synthetic learning-curve benchmarks
//   run-hpo        run an HPO algorithm on benchmark files, writing traces
//   eval-surrogate prediction-quality protocol over a task directory
//   compare        aggregate traces into average-rank / regret curves
//
// Exit codes: 0 success, 2 validation failure, 3 runtime failure.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ftbo/bench_io.hpp"
#include "ftbo/engine.hpp"
#include "ftbo/evalkit.hpp"
#include "ftbo/task_sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_root() {
  const char* env = std::getenv("FTBO_OUT_ROOT");
  return env ? env : ".";
}

// Resolves --out against FTBO_OUT_ROOT unless it is already absolute.
fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_absolute()) return p;
  return fs::path(default_out_root()) / p;
}

// Applies a JSON config file to options the user did not pass on the command
// line, so explicit flags always win over the file.
void apply_config_overlay(CLI::App* cmd, const std::string& config_path) {
  if (config_path.empty()) return;
  std::ifstream in(config_path);
  if (!in) throw ValidationError("cannot open config file " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config file " + config_path +
                          ": invalid JSON: " + e.what());
  }
  if (!j.is_object())
    throw ValidationError("config file " + config_path +
                          ": top level must be an object");
  for (const auto& [key, value] : j.items()) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt)
      throw ValidationError("config file " + config_path +
                            ": unknown option '" + key + "'");
    if (opt->count() > 0) continue;  // command line wins
    if (value.is_array()) {
      for (const auto& item : value)
        opt->add_result(item.is_string() ? item.get<std::string>()
                                         : item.dump());
    } else {
      opt->add_result(value.is_string() ? value.get<std::string>()
                                        : value.dump());
    }
    opt->run_callback();
  }
}

// The resolved configuration is written next to the outputs so any run can be
// reproduced from its artifacts alone.
void write_resolved_config(const json& cfg, const fs::path& dir) {
  std::ofstream out(dir / "resolved_config.json");
  if (!out)
    throw std::runtime_error("cannot write " +
                             (dir / "resolved_config.json").string());
  out << cfg.dump(2) << "\n";
}

// Parses "--dims k" or "--dims lo:hi" into an inclusive range in 1..10.
std::pair<int, int> parse_dims(const std::string& dims) {
  int lo = 0, hi = 0;
  const auto colon = dims.find(':');
  try {
    if (colon == std::string::npos) {
      lo = hi = std::stoi(dims);
    } else {
      lo = std::stoi(dims.substr(0, colon));
      hi = std::stoi(dims.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw ValidationError("--dims: expected an integer or lo:hi, got '" +
                          dims + "'");
  }
  if (lo < 1 || hi > ftbo::kMaxHpDim || lo > hi)
    throw ValidationError("--dims: valid range 1..10 (got '" + dims + "')");
  return {lo, hi};
}

// Simple fan-out over independent jobs; results/errors surface via exceptions
// captured per worker.
void run_jobs(const std::vector<std::function<void()>>& jobs, int workers) {
  if (workers < 1) workers = 1;
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        jobs[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (workers == 1 || jobs.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

// --- gen-tasks ---------------------------------------------------------------

struct GenTasksOpts {
  int n_tasks = 10;
  int n_configs = 50;
  std::string dims = "1:10";
  int b_max_lo = 1;
  int b_max_hi = 1000;
  std::uint64_t seed = 0;
  std::string out = "tasks";
};

int cmd_gen_tasks(const GenTasksOpts& o) {
  const auto [dim_lo, dim_hi] = parse_dims(o.dims);
  if (o.n_tasks < 1) throw ValidationError("--n-tasks must be >= 1");
  if (o.n_configs < 1 || o.n_configs > ftbo::kMaxConfigs)
    throw ValidationError("--n-configs must be in 1..1000");
  if (o.b_max_lo < 1 || o.b_max_hi < o.b_max_lo)
    throw ValidationError("--b-max-lo/--b-max-hi must form a range with lo >= 1");

  const fs::path out_dir = resolve_out(o.out);
  fs::create_directories(out_dir);

  for (int i = 0; i < o.n_tasks; ++i) {
    ftbo::Rng rng(ftbo::Rng::mix({o.seed, ftbo::Rng::hash_str("gen-tasks"),
                                  static_cast<std::uint64_t>(i)}));
    ftbo::SyntheticTask task = ftbo::sample_task(rng, o.n_configs, dim_lo,
                                                 dim_hi, o.b_max_lo, o.b_max_hi);
    char name[32];
    std::snprintf(name, sizeof(name), "task_%04d", i);
    task.id = name;
    task.seed = o.seed;
    const ftbo::TabularBenchmark bench = ftbo::from_synthetic(task, name);
    ftbo::write_benchmark(bench, (out_dir / (std::string(name) + ".json")).string());
  }

  json cfg = {{"command", "gen-tasks"}, {"n_tasks", o.n_tasks},
              {"n_configs", o.n_configs}, {"dims", o.dims},
              {"b_max_lo", o.b_max_lo},   {"b_max_hi", o.b_max_hi},
              {"seed", o.seed},           {"out", out_dir.string()}};
  write_resolved_config(cfg, out_dir);
  std::cout << "wrote " << o.n_tasks << " task(s) to " << out_dir.string()
            << "\n";
  return 0;
}

// --- run-hpo -----------------------------------------------------------------

struct RunHpoOpts {
  std::string task;  // benchmark file or directory of *.json benchmarks
  std::string algo = "ifbo";
  int budget = 0;  // 0 = N * b_max
  std::uint64_t seed = 0;
  int reps = 1;
  int jobs = 1;
  int samples = 512;
  int eta = 3;
  int unit_step = 1;
  std::string acquisition;  // resolved from --algo when empty
  bool clamp_median = false;
  double clamp_upper = std::numeric_limits<double>::quiet_NaN();
  std::string out = "traces";
};

ftbo::LoadOptions load_options(bool clamp_median, double clamp_upper) {
  ftbo::LoadOptions opts;
  opts.clamp = clamp_median || !std::isnan(clamp_upper);
  opts.clamp_upper = clamp_upper;
  if (clamp_median && !std::isnan(clamp_upper))
    throw ValidationError("--clamp-median and --clamp-upper are exclusive");
  return opts;
}

struct ResolvedAlgo {
  std::string kind;         // ftbo | rs | hyperband
  std::string acquisition;  // for ftbo
  std::string label;        // name used in filenames and reports
};

ResolvedAlgo resolve_algo(const std::string& algo,
                          const std::string& acquisition_flag) {
  ResolvedAlgo r;
  if (algo == "rs" || algo == "hyperband") {
    r.kind = algo;
    r.label = algo;
    return r;
  }
  if (algo == "ifbo") {
    r.kind = "ftbo";
    r.acquisition =
        acquisition_flag.empty() ? "mfpi-random" : acquisition_flag;
  } else if (algo == "ftbo") {
    r.kind = "ftbo";
    r.acquisition =
        acquisition_flag.empty() ? "mfpi-random" : acquisition_flag;
  } else {
    // Allow an acquisition name directly as the algorithm.
    bool known = false;
    for (const auto& n : ftbo::registered_acquisitions())
      if (n == algo || (n == "mfpi-h<k>" && algo.rfind("mfpi-h", 0) == 0))
        known = true;
    if (!known) {
      std::string msg = "unknown algorithm '" + algo +
                        "'; registered: ifbo ftbo rs hyperband";
      for (const auto& n : ftbo::registered_acquisitions()) msg += " " + n;
      throw ValidationError(msg);
    }
    r.kind = "ftbo";
    r.acquisition = algo;
  }
  // Validate the acquisition name eagerly for a clean exit code.
  try {
    (void)ftbo::parse_acquisition(r.acquisition);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  r.label = r.acquisition == "mfpi-random" && algo == "ifbo"
                ? "ifbo"
                : (r.kind == "ftbo" ? r.acquisition : r.kind);
  return r;
}

std::vector<fs::path> collect_tasks(const std::string& task_arg) {
  const fs::path p(task_arg);
  std::vector<fs::path> tasks;
  if (fs::is_directory(p)) {
    for (const auto& entry : fs::directory_iterator(p)) {
      const auto& f = entry.path();
      if (f.extension() == ".json" &&
          f.filename().string().find("manifest") == std::string::npos &&
          f.filename() != "resolved_config.json")
        tasks.push_back(f);
    }
    std::sort(tasks.begin(), tasks.end());
  } else if (fs::exists(p)) {
    tasks.push_back(p);
  }
  if (tasks.empty())
    throw ValidationError("no benchmark files found at " + task_arg);
  return tasks;
}

int cmd_run_hpo(const RunHpoOpts& o) {
  if (o.reps < 1) throw ValidationError("--reps must be >= 1");
  if (o.unit_step != 1)
    throw ValidationError("--unit-step: only unit step 1 is supported");
  if (o.samples < 16) throw ValidationError("--samples must be >= 16");
  if (o.eta < 2) throw ValidationError("--eta must be >= 2");
  const ResolvedAlgo algo = resolve_algo(o.algo, o.acquisition);
  const ftbo::LoadOptions load_opts = load_options(o.clamp_median, o.clamp_upper);
  const std::vector<fs::path> tasks = collect_tasks(o.task);

  const fs::path out_dir = resolve_out(o.out);
  fs::create_directories(out_dir);

  std::vector<std::function<void()>> work;
  for (const auto& task_path : tasks) {
    for (int rep = 0; rep < o.reps; ++rep) {
      work.push_back([&, task_path, rep]() {
        const ftbo::TabularBenchmark bench =
            ftbo::load_benchmark(task_path.string(), load_opts);
        const ftbo::MatrixOracle oracle(bench.curves, bench.configs);
        const int budget =
            o.budget > 0 ? o.budget : oracle.n_configs() * oracle.b_max();
        const std::uint64_t run_seed = ftbo::Rng::mix(
            {o.seed, ftbo::Rng::hash_str(bench.name),
             ftbo::Rng::hash_str(algo.label), static_cast<std::uint64_t>(rep)});

        ftbo::RunTrace trace;
        if (algo.kind == "rs") {
          trace = ftbo::run_random_search(oracle, budget, run_seed);
        } else if (algo.kind == "hyperband") {
          trace = ftbo::run_hyperband(oracle, budget, o.eta, run_seed);
        } else {
          ftbo::FtboOptions opts;
          opts.acquisition = ftbo::parse_acquisition(algo.acquisition);
          opts.inference.n_samples = o.samples;
          trace = ftbo::run_ftbo(oracle, opts, budget, run_seed);
        }
        trace.params["task"] = bench.name;
        trace.params["label"] = algo.label;
        trace.params["rep"] = rep;

        const std::string stem = bench.name + "__" + algo.label + "__rep" +
                                 std::to_string(rep);
        ftbo::write_trace_csv(trace, (out_dir / (stem + ".csv")).string());
        ftbo::write_trace_sidecar(trace,
                                  (out_dir / (stem + ".json")).string());
      });
    }
  }
  run_jobs(work, o.jobs);

  json cfg = {{"command", "run-hpo"}, {"task", o.task},
              {"algo", o.algo},       {"budget", o.budget},
              {"seed", o.seed},       {"reps", o.reps},
              {"samples", o.samples}, {"eta", o.eta},
              {"unit_step", o.unit_step},
              {"acquisition", algo.acquisition},
              {"out", out_dir.string()}};
  write_resolved_config(cfg, out_dir);
  std::cout << "wrote " << work.size() << " trace(s) to " << out_dir.string()
            << "\n";
  return 0;
}

// --- eval-surrogate ----------------------------------------------------------

struct EvalOpts {
  std::string tasks;
  std::vector<int> contexts = {20, 40, 80};
  int samples = 512;
  int test_size = 50;
  std::uint64_t seed = 0;
  std::string out = "eval";
};

// Rebuilds a SyntheticTask view from a benchmark file: the curves and config
// space are all the protocol needs.
ftbo::SyntheticTask task_from_benchmark(const ftbo::TabularBenchmark& bench) {
  ftbo::SyntheticTask task;
  task.id = bench.name;
  task.m = static_cast<int>(bench.hps.size());
  task.latents.b_max = bench.b_max;
  if (bench.synthetic) {
    task.seed = bench.synthetic->seed;
    task.latents.u1 = bench.synthetic->u1;
    task.latents.u2 = bench.synthetic->u2;
    task.latents.u3 = bench.synthetic->u3;
    task.latents.y0 = bench.synthetic->y0;
    task.latents.y_max = bench.synthetic->y_max;
  }
  task.lambdas = bench.configs;
  task.curves = bench.curves;
  task.mean_curves = bench.curves;
  return task;
}

int cmd_eval_surrogate(const EvalOpts& o) {
  if (o.samples < 16) throw ValidationError("--samples must be >= 16");
  if (o.test_size < 1) throw ValidationError("--test-size must be >= 1");
  if (o.contexts.empty()) throw ValidationError("--contexts must be nonempty");
  for (int c : o.contexts)
    if (c < 0) throw ValidationError("--contexts entries must be >= 0");

  std::vector<ftbo::SyntheticTask> tasks;
  for (const auto& path : collect_tasks(o.tasks))
    tasks.push_back(task_from_benchmark(ftbo::load_benchmark(path.string())));

  const fs::path out_dir = resolve_out(o.out);
  fs::create_directories(out_dir);

  ftbo::InferenceConfig icfg;
  icfg.n_samples = o.samples;
  ftbo::Rng rng(ftbo::Rng::mix({o.seed, ftbo::Rng::hash_str("eval-surrogate")}));
  const ftbo::PredictionReport report = ftbo::eval_prediction_quality(
      tasks, ftbo::mc_surrogate_factory(icfg), o.contexts, o.test_size, rng);
  ftbo::write_prediction_report(report,
                                (out_dir / "prediction_report.csv").string());
  if (report.skipped > 0)
    std::cerr << "warning: " << report.skipped
              << " (task, context) cell(s) skipped on infeasible splits\n";

  json cfg = {{"command", "eval-surrogate"}, {"tasks", o.tasks},
              {"contexts", o.contexts},      {"samples", o.samples},
              {"test_size", o.test_size},    {"seed", o.seed},
              {"out", out_dir.string()}};
  write_resolved_config(cfg, out_dir);
  std::cout << "wrote " << (out_dir / "prediction_report.csv").string() << "\n";
  return 0;
}

// --- compare -----------------------------------------------------------------

struct CompareOpts {
  std::string traces;
  std::string out = "compare";
};

int cmd_compare(const CompareOpts& o) {
  const fs::path dir(o.traces);
  if (!fs::is_directory(dir))
    throw ValidationError("--traces: not a directory: " + o.traces);

  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") csvs.push_back(entry.path());
  std::sort(csvs.begin(), csvs.end());
  if (csvs.empty())
    throw ValidationError("no trace CSV files found in " + o.traces);

  std::vector<std::pair<ftbo::TraceKey, ftbo::RunTrace>> runs;
  for (const auto& csv : csvs) {
    fs::path sidecar = csv;
    sidecar.replace_extension(".json");
    if (!fs::exists(sidecar))
      throw ValidationError("missing sidecar for " + csv.string());
    ftbo::RunTrace trace = ftbo::load_trace(csv.string(), sidecar.string());
    ftbo::TraceKey key;
    key.task = trace.params.value("task", csv.stem().string());
    key.algorithm = trace.params.value("label", trace.algorithm);
    // The grid cell is the repetition; algorithms within a cell share it.
    key.seed = trace.params.value("rep", trace.seed);
    runs.emplace_back(std::move(key), std::move(trace));
  }

  ftbo::RankReport report;
  try {
    report = ftbo::compare_traces(runs);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }

  const fs::path out_dir = resolve_out(o.out);
  fs::create_directories(out_dir);
  ftbo::write_rank_report(report, (out_dir / "regret_rank.csv").string());

  json cfg = {{"command", "compare"},
              {"traces", o.traces},
              {"out", out_dir.string()}};
  write_resolved_config(cfg, out_dir);
  std::cout << "wrote " << (out_dir / "regret_rank.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"freeze-thaw Bayesian-optimization toolkit"};
  app.require_subcommand(1);

  std::string config_path;

  GenTasksOpts gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-tasks", "generate synthetic benchmarks");
  gen_cmd->add_option("--n-tasks", gen.n_tasks, "number of tasks");
  gen_cmd->add_option("--n-configs", gen.n_configs, "configs per task");
  gen_cmd->add_option("--dims", gen.dims, "hyperparameter dims: k or lo:hi");
  gen_cmd->add_option("--b-max-lo", gen.b_max_lo, "b_max range low");
  gen_cmd->add_option("--b-max-hi", gen.b_max_hi, "b_max range high");
  gen_cmd->add_option("--seed", gen.seed, "master seed");
  gen_cmd->add_option("--out", gen.out, "output directory");
  gen_cmd->add_option("--config", config_path, "JSON config overlay");

  RunHpoOpts hpo;
  CLI::App* hpo_cmd = app.add_subcommand("run-hpo", "run an HPO algorithm");
  hpo_cmd->add_option("--task", hpo.task, "benchmark file or directory")
      ->required();
  hpo_cmd->add_option("--algo", hpo.algo,
                      "ifbo | ftbo | rs | hyperband | <acquisition>");
  hpo_cmd->add_option("--budget", hpo.budget, "budget in unit steps (0: full)");
  hpo_cmd->add_option("--seed", hpo.seed, "master seed");
  hpo_cmd->add_option("--reps", hpo.reps, "repetitions per task");
  hpo_cmd->add_option("--jobs", hpo.jobs, "worker pool size");
  hpo_cmd->add_option("--samples", hpo.samples, "surrogate MC samples S");
  hpo_cmd->add_option("--eta", hpo.eta, "hyperband halving rate");
  hpo_cmd->add_option("--unit-step", hpo.unit_step, "budget unit step");
  hpo_cmd->add_option("--acquisition", hpo.acquisition,
                      "acquisition for ftbo/ifbo");
  hpo_cmd->add_flag("--clamp-median", hpo.clamp_median,
                    "clamp raw losses at the step-1 median before ingestion");
  hpo_cmd->add_option("--clamp-upper", hpo.clamp_upper,
                      "clamp raw losses at this bound before ingestion");
  hpo_cmd->add_option("--out", hpo.out, "output directory");
  hpo_cmd->add_option("--config", config_path, "JSON config overlay");

  EvalOpts ev;
  CLI::App* ev_cmd =
      app.add_subcommand("eval-surrogate", "prediction-quality protocol");
  ev_cmd->add_option("--tasks", ev.tasks, "task directory or file")->required();
  ev_cmd->add_option("--contexts", ev.contexts, "context sizes");
  ev_cmd->add_option("--samples", ev.samples, "surrogate MC samples S");
  ev_cmd->add_option("--test-size", ev.test_size, "test points per cell");
  ev_cmd->add_option("--seed", ev.seed, "master seed");
  ev_cmd->add_option("--out", ev.out, "output directory");
  ev_cmd->add_option("--config", config_path, "JSON config overlay");

  CompareOpts cmp;
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "aggregate traces into rank/regret");
  cmp_cmd->add_option("--traces", cmp.traces, "trace directory")->required();
  cmp_cmd->add_option("--out", cmp.out, "output directory");
  cmp_cmd->add_option("--config", config_path, "JSON config overlay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_config_overlay(active, config_path);
    if (active == gen_cmd) return cmd_gen_tasks(gen);
    if (active == hpo_cmd) return cmd_run_hpo(hpo);
    if (active == ev_cmd) return cmd_eval_surrogate(ev);
    if (active == cmp_cmd) return cmd_compare(cmp);
    std::cerr << "error: no subcommand\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ftbo::BenchParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
