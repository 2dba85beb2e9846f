#include "ftbo/evalkit.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ftbo/mathutil.hpp"

namespace ftbo {

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

SurrogateFactory mc_surrogate_factory(const InferenceConfig& cfg) {
  return [cfg](const SyntheticTask& task,
               std::uint64_t seed) -> std::unique_ptr<Surrogate> {
    InferenceConfig c = cfg;
    c.seed = seed;
    return std::make_unique<McSurrogate>(task.lambdas, task.latents.b_max, c);
  };
}

PredictionReport eval_prediction_quality(const std::vector<SyntheticTask>& tasks,
                                         const SurrogateFactory& factory,
                                         const std::vector<int>& context_sizes,
                                         int test_size, Rng& rng) {
  if (test_size < 1)
    throw std::invalid_argument("eval_prediction_quality: test_size >= 1");
  PredictionReport report;

  for (int context : context_sizes) {
    std::vector<double> task_ll, task_mse, task_ms;
    for (const auto& task : tasks) {
      const int n = static_cast<int>(task.lambdas.size());
      const int b_max = task.latents.b_max;
      ContextSplit split;
      try {
        split = sample_context_split(n, b_max, context, test_size, rng);
      } catch (const std::invalid_argument&) {
        ++report.skipped;
        continue;
      }

      History history;
      for (int i = 0; i < n; ++i)
        for (int b = 1; b <= split.train_budgets[i]; ++b)
          history.entries.push_back({i, b, task.curves[i][b - 1]});

      std::vector<Query> queries;
      queries.reserve(split.test.size());
      for (const auto& [cfg, step] : split.test) queries.push_back({cfg, step});

      const std::uint64_t seed = rng.next_u64();
      const auto surrogate = factory(task, seed);
      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<Ppd> ppds = surrogate->infer(history, queries);
      const auto t1 = std::chrono::steady_clock::now();
      const double wall_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();

      std::vector<double> lls, ses;
      lls.reserve(queries.size());
      ses.reserve(queries.size());
      for (std::size_t q = 0; q < queries.size(); ++q) {
        const double y = task.curves[queries[q].config_id][queries[q].step - 1];
        lls.push_back(ppds[q].log_likelihood(y));
        const double d = ppds[q].mean() - y;
        ses.push_back(d * d);
      }

      PredictionRow row;
      row.task = task.id;
      row.context = context;
      row.loglik_median = median(lls);
      row.mse_median = median(ses);
      row.wall_ms = wall_ms;
      report.rows.push_back(row);
      task_ll.push_back(row.loglik_median);
      task_mse.push_back(row.mse_median);
      task_ms.push_back(row.wall_ms);
    }
    if (!task_ll.empty()) {
      PredictionRow med;
      med.task = "median";
      med.context = context;
      med.loglik_median = median(task_ll);
      med.mse_median = median(task_mse);
      med.wall_ms = median(task_ms);
      report.medians.push_back(med);
    }
  }
  return report;
}

void write_prediction_report(const PredictionReport& report,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "task,context,loglik_median,mse_median,wall_ms\n";
  for (const auto& r : report.rows)
    out << r.task << ',' << r.context << ',' << fmt9(r.loglik_median) << ','
        << fmt9(r.mse_median) << ',' << fmt9(r.wall_ms) << '\n';
  for (const auto& r : report.medians)
    out << r.task << ',' << r.context << ',' << fmt9(r.loglik_median) << ','
        << fmt9(r.mse_median) << ',' << fmt9(r.wall_ms) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<double> normalized_regret(const RunTrace& trace, double best_ref,
                                      double worst_ref) {
  if (!(worst_ref > best_ref))
    throw std::invalid_argument(
        "normalized_regret: worst_ref must exceed best_ref");
  std::vector<double> out;
  out.reserve(trace.steps.size());
  const double span = worst_ref - best_ref;
  for (const auto& s : trace.steps) {
    const double err = 1.0 - s.incumbent;
    out.push_back(clamp01((err - best_ref) / span));
  }
  return out;
}

std::vector<double> fractional_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Ranks are 1-based; a tie block spanning ranks i+1..j+1 gets the mean.
    const double r = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

RankReport compare_traces(
    const std::vector<std::pair<TraceKey, RunTrace>>& runs) {
  if (runs.empty()) throw std::invalid_argument("compare_traces: no traces");

  std::set<std::string> algo_set;
  for (const auto& [key, trace] : runs) algo_set.insert(key.algorithm);
  RankReport report;
  report.algorithms.assign(algo_set.begin(), algo_set.end());
  const int n_algos = static_cast<int>(report.algorithms.size());
  auto algo_index = [&](const std::string& a) {
    return static_cast<int>(std::lower_bound(report.algorithms.begin(),
                                             report.algorithms.end(), a) -
                            report.algorithms.begin());
  };

  // Grid check: every algorithm present on every observed (task, seed).
  std::map<std::pair<std::string, std::uint64_t>,
           std::map<std::string, const RunTrace*>>
      grid;
  for (const auto& [key, trace] : runs) {
    auto& cell = grid[{key.task, key.seed}][key.algorithm];
    if (cell != nullptr)
      throw std::invalid_argument("compare_traces: duplicate trace for task '" +
                                  key.task + "', seed " +
                                  std::to_string(key.seed) + ", algorithm '" +
                                  key.algorithm + "'");
    cell = &trace;
  }
  std::ostringstream missing;
  for (const auto& [ts, by_algo] : grid)
    for (const auto& algo : report.algorithms)
      if (!by_algo.count(algo))
        missing << " (task '" << ts.first << "', seed " << ts.second
                << ", algo '" << algo << "')";
  if (!missing.str().empty())
    throw std::invalid_argument("compare_traces: missing traces:" +
                                missing.str());

  int horizon = INT_MAX;
  for (const auto& [key, trace] : runs)
    horizon = std::min(horizon, static_cast<int>(trace.steps.size()));
  if (horizon < 1)
    throw std::invalid_argument("compare_traces: a trace has no steps");
  report.horizon = horizon;

  // Regret references pooled per task over every observed error.
  std::map<std::string, std::pair<double, double>> refs;  // task -> (best, worst)
  for (const auto& [key, trace] : runs) {
    auto it = refs.emplace(key.task, std::make_pair(1e300, -1e300)).first;
    for (const auto& s : trace.steps) {
      const double err = 1.0 - s.y;
      it->second.first = std::min(it->second.first, err);
      it->second.second = std::max(it->second.second, err);
    }
  }

  report.ranks.assign(n_algos, std::vector<double>(horizon, 0.0));
  report.regret.assign(n_algos, std::vector<double>(horizon, 0.0));
  const double cells = static_cast<double>(grid.size());

  for (const auto& [ts, by_algo] : grid) {
    const auto [best_ref, worst_ref] = refs.at(ts.first);
    const bool degenerate_refs = !(worst_ref > best_ref + 1e-15);
    for (int t = 0; t < horizon; ++t) {
      std::vector<double> errors(n_algos);
      for (const auto& [algo, trace] : by_algo)
        errors[algo_index(algo)] = 1.0 - trace->steps[t].incumbent;
      const auto r = fractional_ranks(errors);
      for (int a = 0; a < n_algos; ++a) {
        report.ranks[a][t] += r[a] / cells;
        const double reg =
            degenerate_refs
                ? 0.0
                : clamp01((errors[a] - best_ref) / (worst_ref - best_ref));
        report.regret[a][t] += reg / cells;
      }
    }
  }
  return report;
}

void write_rank_report(const RankReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "step,algorithm,avg_rank,mean_regret\n";
  for (int t = 0; t < report.horizon; ++t)
    for (std::size_t a = 0; a < report.algorithms.size(); ++a)
      out << (t + 1) << ',' << report.algorithms[a] << ','
          << fmt9(report.ranks[a][t]) << ',' << fmt9(report.regret[a][t])
          << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace ftbo
