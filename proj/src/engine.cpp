#include "ftbo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ftbo {

namespace {

using nlohmann::json;

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  /// Config to thaw by one unit step, or -1 when nothing can be advanced.
  virtual int next(const std::vector<int>& frontier,
                   const std::vector<TraceStep>& steps, Rng& rng) = 0;
  virtual json state() const = 0;
  virtual void restore(const json& state) = 0;
};

History history_from_steps(const std::vector<TraceStep>& steps) {
  History h;
  h.entries.reserve(steps.size());
  for (const auto& s : steps) h.entries.push_back({s.config_id, s.step, s.y});
  return h;
}

class FtboScheduler : public Scheduler {
 public:
  FtboScheduler(const TaskOracle& oracle, const FtboOptions& options)
      : oracle_(oracle), options_(options),
        surrogate_(oracle.lambdas(), oracle.b_max(), options.inference) {}

  int next(const std::vector<int>& frontier,
           const std::vector<TraceStep>& steps, Rng& rng) override {
    if (!started_) {
      started_ = true;
      return static_cast<int>(rng.uniform_int(0, oracle_.n_configs() - 1));
    }
    std::vector<Candidate> candidates;
    for (int i = 0; i < oracle_.n_configs(); ++i)
      if (frontier[i] < oracle_.b_max()) candidates.push_back({i, frontier[i]});
    if (candidates.empty()) return -1;
    const History h = history_from_steps(steps);
    return generalized_af(options_.acquisition, candidates, surrogate_, h,
                          oracle_.b_max(), rng);
  }

  json state() const override { return json{{"started", started_}}; }
  void restore(const json& s) override { started_ = s.at("started"); }

 private:
  const TaskOracle& oracle_;
  FtboOptions options_;
  McSurrogate surrogate_;
  bool started_ = false;
};

class RandomSearchScheduler : public Scheduler {
 public:
  explicit RandomSearchScheduler(const TaskOracle& oracle) : oracle_(oracle) {}

  int next(const std::vector<int>& frontier,
           const std::vector<TraceStep>& /*steps*/, Rng& rng) override {
    if (current_ >= 0 && frontier[current_] < oracle_.b_max())
      return current_;
    std::vector<int> unseen;
    for (int i = 0; i < oracle_.n_configs(); ++i)
      if (frontier[i] == 0) unseen.push_back(i);
    if (unseen.empty()) return -1;
    current_ = unseen[rng.uniform_int(
        0, static_cast<std::int64_t>(unseen.size()) - 1)];
    return current_;
  }

  json state() const override { return json{{"current", current_}}; }
  void restore(const json& s) override { current_ = s.at("current"); }

 private:
  const TaskOracle& oracle_;
  int current_ = -1;
};

class HyperbandScheduler : public Scheduler {
 public:
  HyperbandScheduler(const TaskOracle& oracle, int eta)
      : oracle_(oracle), eta_(eta) {
    if (eta_ < 2) throw std::invalid_argument("hyperband: eta must be >= 2");
    const int R = oracle_.b_max();
    s_max_ = 0;
    for (long long r = eta_; r <= R; r *= eta_) ++s_max_;
    s_counter_ = s_max_;
  }

  int next(const std::vector<int>& frontier,
           const std::vector<TraceStep>& steps, Rng& rng) override {
    for (int guard = 0; guard < 4 * (s_max_ + 2); ++guard) {
      if (!active_) {
        if (!start_bracket(frontier, rng)) return -1;
      }
      while (rung_idx_ < static_cast<int>(rung_targets_.size())) {
        const int target = rung_targets_[rung_idx_];
        while (cursor_ < static_cast<int>(cohort_.size())) {
          const int id = cohort_[cursor_];
          if (frontier[id] < target && frontier[id] < oracle_.b_max())
            return id;
          ++cursor_;
        }
        if (rung_idx_ + 1 >= static_cast<int>(rung_targets_.size())) break;
        promote(steps, target);
      }
      active_ = false;
    }
    return -1;
  }

  json state() const override {
    return json{{"active", active_},       {"s_counter", s_counter_},
                {"cohort", cohort_},       {"rung_targets", rung_targets_},
                {"rung_sizes", rung_sizes_}, {"rung_idx", rung_idx_},
                {"cursor", cursor_}};
  }

  void restore(const json& s) override {
    active_ = s.at("active");
    s_counter_ = s.at("s_counter");
    cohort_ = s.at("cohort").get<std::vector<int>>();
    rung_targets_ = s.at("rung_targets").get<std::vector<int>>();
    rung_sizes_ = s.at("rung_sizes").get<std::vector<int>>();
    rung_idx_ = s.at("rung_idx");
    cursor_ = s.at("cursor");
  }

 private:
  bool start_bracket(const std::vector<int>& frontier, Rng& rng) {
    std::vector<int> pool;
    for (int i = 0; i < oracle_.n_configs(); ++i)
      if (frontier[i] < oracle_.b_max()) pool.push_back(i);
    if (pool.empty()) return false;

    const int s = s_counter_;
    s_counter_ = s_counter_ > 0 ? s_counter_ - 1 : s_max_;
    const int R = oracle_.b_max();
    const double eta_s = std::pow(static_cast<double>(eta_), s);
    int n = static_cast<int>(
        std::ceil(static_cast<double>(s_max_ + 1) / (s + 1) * eta_s));
    n = std::min<int>(n, static_cast<int>(pool.size()));
    const double r0 = R / eta_s;

    rung_targets_.clear();
    rung_sizes_.clear();
    for (int j = 0; j <= s; ++j) {
      int r = static_cast<int>(std::lround(r0 * std::pow(eta_, j)));
      r = std::min(std::max(r, 1), R);
      if (!rung_targets_.empty()) r = std::max(r, rung_targets_.back());
      rung_targets_.push_back(r);
      rung_sizes_.push_back(std::max(
          1, static_cast<int>(n / std::pow(static_cast<double>(eta_), j))));
    }
    rung_targets_.back() = R;

    // Uniform sample of n distinct configs from the pool.
    cohort_.clear();
    for (int k = 0; k < n; ++k) {
      const auto idx = rng.uniform_int(
          0, static_cast<std::int64_t>(pool.size()) - 1);
      cohort_.push_back(pool[idx]);
      pool.erase(pool.begin() + idx);
    }
    rung_idx_ = 0;
    cursor_ = 0;
    active_ = true;
    return true;
  }

  void promote(const std::vector<TraceStep>& steps, int target) {
    // Keep the top 1/eta by observed y at the rung step; ties by lower id.
    std::vector<std::pair<double, int>> scored;
    for (int id : cohort_) {
      double y = 0.0;
      for (const auto& st : steps)
        if (st.config_id == id && st.step == target) {
          y = st.y;
          break;
        }
      scored.emplace_back(y, id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const int keep = std::min<int>(rung_sizes_[rung_idx_ + 1],
                                   static_cast<int>(scored.size()));
    cohort_.clear();
    for (int i = 0; i < keep; ++i) cohort_.push_back(scored[i].second);
    ++rung_idx_;
    cursor_ = 0;
  }

  const TaskOracle& oracle_;
  int eta_;
  int s_max_ = 0;
  // serialized state
  bool active_ = false;
  int s_counter_ = 0;
  std::vector<int> cohort_;
  std::vector<int> rung_targets_;
  std::vector<int> rung_sizes_;
  int rung_idx_ = 0;
  int cursor_ = 0;
};

RunTrace run_loop(const TaskOracle& oracle, Scheduler& scheduler,
                  RunTrace trace, int target_budget, Rng& rng) {
  std::vector<int> frontier(oracle.n_configs(), 0);
  double incumbent = 0.0;
  for (const auto& s : trace.steps) {
    frontier[s.config_id] = std::max(frontier[s.config_id], s.step);
    incumbent = std::max(incumbent, s.y);
  }
  while (static_cast<int>(trace.steps.size()) < target_budget) {
    const int id = scheduler.next(frontier, trace.steps, rng);
    if (id < 0) {
      trace.truncated = true;
      break;
    }
    const int b = frontier[id] + 1;
    const double y = oracle.evaluate(id, b);
    frontier[id] = b;
    incumbent = std::max(incumbent, y);
    trace.steps.push_back({static_cast<int>(trace.steps.size()) + 1, id, b, y,
                           incumbent});
  }
  trace.budget = target_budget;
  trace.rng_state = rng.state_hex();
  trace.scheduler_state = scheduler.state();
  return trace;
}

std::unique_ptr<Scheduler> make_scheduler(const TaskOracle& oracle,
                                          const std::string& algorithm,
                                          const json& params) {
  if (algorithm == "ftbo") {
    FtboOptions opt;
    opt.inference.n_samples = params.at("n_samples");
    opt.inference.extra_cal = params.at("extra_cal");
    opt.inference.min_ess_fraction = params.at("min_ess_fraction");
    opt.inference.no_hps = params.at("no_hps");
    opt.inference.seed = params.at("surrogate_seed").get<std::uint64_t>();
    opt.acquisition = parse_acquisition(params.at("acquisition"));
    return std::make_unique<FtboScheduler>(oracle, opt);
  }
  if (algorithm == "rs") return std::make_unique<RandomSearchScheduler>(oracle);
  if (algorithm == "hyperband")
    return std::make_unique<HyperbandScheduler>(oracle,
                                                params.at("eta").get<int>());
  throw std::invalid_argument("unknown algorithm '" + algorithm + "'");
}

}  // namespace

TraceStep RunTrace::best() const {
  if (steps.empty()) throw std::runtime_error("trace: empty");
  TraceStep best = steps.front();
  for (const auto& s : steps) {
    if (s.y > best.y ||
        (s.y == best.y &&
         (s.step > best.step ||
          (s.step == best.step && s.config_id < best.config_id))))
      best = s;
  }
  return best;
}

RunTrace run_ftbo(const TaskOracle& oracle, const FtboOptions& options,
                  int budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("run_ftbo: budget must be >= 1");
  const long long capacity =
      static_cast<long long>(oracle.n_configs()) * oracle.b_max();
  if (budget > capacity)
    throw std::invalid_argument("run_ftbo: budget exceeds N * b_max");

  FtboOptions resolved = options;
  if (resolved.inference.seed == 0)
    resolved.inference.seed = Rng::mix({seed, 0xf7b0u});

  RunTrace trace;
  trace.algorithm = "ftbo";
  trace.seed = seed;
  trace.params = {{"acquisition", resolved.acquisition.name()},
                  {"n_samples", resolved.inference.n_samples},
                  {"extra_cal", resolved.inference.extra_cal},
                  {"min_ess_fraction", resolved.inference.min_ess_fraction},
                  {"no_hps", resolved.inference.no_hps},
                  {"surrogate_seed", resolved.inference.seed}};
  FtboScheduler scheduler(oracle, resolved);
  Rng rng(Rng::mix({seed, Rng::hash_str("ftbo")}));
  return run_loop(oracle, scheduler, std::move(trace), budget, rng);
}

RunTrace run_random_search(const TaskOracle& oracle, int budget,
                           std::uint64_t seed) {
  if (budget < oracle.b_max())
    throw std::invalid_argument("run_random_search: budget must be >= b_max");
  RunTrace trace;
  trace.algorithm = "rs";
  trace.seed = seed;
  trace.params = json::object();
  RandomSearchScheduler scheduler(oracle);
  Rng rng(Rng::mix({seed, Rng::hash_str("rs")}));
  return run_loop(oracle, scheduler, std::move(trace), budget, rng);
}

RunTrace run_hyperband(const TaskOracle& oracle, int budget, int eta,
                       std::uint64_t seed) {
  if (budget < 1)
    throw std::invalid_argument("run_hyperband: budget must be >= 1");
  RunTrace trace;
  trace.algorithm = "hyperband";
  trace.seed = seed;
  trace.params = {{"eta", eta}};
  HyperbandScheduler scheduler(oracle, eta);
  Rng rng(Rng::mix({seed, Rng::hash_str("hyperband")}));
  return run_loop(oracle, scheduler, std::move(trace), budget, rng);
}

RunTrace continue_run(const TaskOracle& oracle, const RunTrace& trace,
                      int additional_budget) {
  if (trace.engine_version != kEngineVersion)
    throw std::runtime_error("continue_run: refusing trace from engine "
                             "version '" + trace.engine_version + "'");
  if (additional_budget < 0)
    throw std::invalid_argument("continue_run: negative additional budget");
  Rng rng(0);
  try {
    rng.set_state_hex(trace.rng_state);
  } catch (const std::exception&) {
    throw std::runtime_error("continue_run: refusing trace with corrupted "
                             "RNG state");
  }
  auto scheduler = make_scheduler(oracle, trace.algorithm, trace.params);
  scheduler->restore(trace.scheduler_state);
  RunTrace resumed = trace;
  return run_loop(oracle, *scheduler, std::move(resumed),
                  trace.budget + additional_budget, rng);
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "iter,config_id,step,y,incumbent\n";
  char buf[128];
  for (const auto& s : trace.steps) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.9g,%.9g\n", s.iter,
                  s.config_id, s.step, s.y, s.incumbent);
    out << buf;
  }
}

void write_trace_sidecar(const RunTrace& trace, const std::string& path) {
  json j = {{"algorithm", trace.algorithm},
            {"seed", trace.seed},
            {"budget", trace.budget},
            {"unit_step", trace.unit_step},
            {"truncated", trace.truncated},
            {"rng_state", trace.rng_state},
            {"scheduler_state", trace.scheduler_state},
            {"params", trace.params},
            {"engine_version", trace.engine_version}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

RunTrace load_trace(const std::string& csv_path,
                    const std::string& sidecar_path) {
  RunTrace trace;
  std::ifstream side(sidecar_path);
  if (!side) throw std::runtime_error("cannot open " + sidecar_path);
  json j = json::parse(side);
  trace.algorithm = j.at("algorithm");
  trace.seed = j.at("seed").get<std::uint64_t>();
  trace.budget = j.at("budget");
  trace.unit_step = j.at("unit_step");
  trace.truncated = j.at("truncated");
  trace.rng_state = j.at("rng_state");
  trace.scheduler_state = j.at("scheduler_state");
  trace.params = j.at("params");
  trace.engine_version = j.at("engine_version");

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    TraceStep s;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lg,%lg", &s.iter, &s.config_id,
                    &s.step, &s.y, &s.incumbent) != 5)
      throw std::runtime_error("trace csv: malformed line: " + line);
    trace.steps.push_back(s);
  }
  return trace;
}

}  // namespace ftbo
