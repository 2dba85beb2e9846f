#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ftbo/engine.hpp"
#include "ftbo/surrogate.hpp"
#include "ftbo/task_sampler.hpp"

namespace ftbo {

/// One (task, context size) cell of the prediction-quality protocol.
struct PredictionRow {
  std::string task;
  int context = 0;
  double loglik_median = 0.0;  // median over test points
  double mse_median = 0.0;     // median over test points
  double wall_ms = 0.0;        // inference wall time for the cell
};

struct PredictionReport {
  std::vector<PredictionRow> rows;  // per (task, context)
  std::vector<PredictionRow> medians;  // per context, median over tasks
  int skipped = 0;  // tasks skipped on infeasible splits
};

/// Builds the surrogate used for one task; injectable so the protocol can be
/// tested against stub surrogates with known scores.
using SurrogateFactory = std::function<std::unique_ptr<Surrogate>(
    const SyntheticTask& task, std::uint64_t seed)>;

/// Makes the default Monte-Carlo surrogate over the task's config space.
SurrogateFactory mc_surrogate_factory(const InferenceConfig& cfg);

/// Prediction-quality protocol: per task and context size, draw a train/test
/// split, condition the surrogate on the noisy training prefixes, and score
/// log-likelihood of the noisy test observations and squared error of the
/// PPD mean against them. Cell statistics are medians over test points;
/// per-context summary rows are medians over tasks.
PredictionReport eval_prediction_quality(const std::vector<SyntheticTask>& tasks,
                                         const SurrogateFactory& factory,
                                         const std::vector<int>& context_sizes,
                                         int test_size, Rng& rng);

void write_prediction_report(const PredictionReport& report,
                             const std::string& path);

/// Normalized regret per trace step: (best_ref - incumbent-error)-relative
/// position between the best (lowest) and worst (highest) recorded errors.
/// Error scale means error = 1 - y. Requires worst_ref > best_ref.
std::vector<double> normalized_regret(const RunTrace& trace, double best_ref,
                                      double worst_ref);

/// Key identifying one run within a comparison.
struct TraceKey {
  std::string task;
  std::string algorithm;
  std::uint64_t seed = 0;
};

struct RankReport {
  std::vector<std::string> algorithms;  // sorted
  // ranks[a][t]: average fractional rank of algorithm a at step t+1.
  std::vector<std::vector<double>> ranks;
  // regret[a][t]: mean normalized regret of algorithm a at step t+1.
  std::vector<std::vector<double>> regret;
  int horizon = 0;
};

/// Average-rank / normalized-regret comparison over a grid of traces. Every
/// algorithm must be present for every (task, seed) pair; missing cells are
/// an error listing the absent combination. Regret references are pooled per
/// task across all algorithms and seeds.
RankReport compare_traces(const std::vector<std::pair<TraceKey, RunTrace>>& runs);

void write_rank_report(const RankReport& report, const std::string& path);

/// Fractional ranks of `values` in ascending order (rank 1 = smallest);
/// ties receive the mean of the ranks they span.
std::vector<double> fractional_ranks(const std::vector<double>& values);

}  // namespace ftbo
