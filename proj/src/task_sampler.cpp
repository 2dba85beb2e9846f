#include "ftbo/task_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ftbo/mathutil.hpp"

namespace ftbo {

SyntheticTask sample_task(Rng& rng, int n_configs, int dim_lo, int dim_hi,
                          int b_max_lo, int b_max_hi) {
  if (n_configs < 1 || n_configs > kMaxConfigs)
    throw std::invalid_argument("sample_task: n_configs must be in 1..1000");
  if (dim_lo < 1 || dim_hi > kMaxHpDim || dim_lo > dim_hi)
    throw std::invalid_argument(
        "sample_task: dim range must be a nonempty subrange of [1, 10]");

  SyntheticTask task;
  task.m = static_cast<int>(rng.uniform_int(dim_lo, dim_hi));
  task.latents = sample_task_latents(rng, b_max_lo, b_max_hi);
  task.network = init_network(rng, task.m);

  task.lambdas.resize(n_configs);
  for (auto& lam : task.lambdas) {
    lam.resize(task.m);
    for (double& x : lam) x = rng.uniform01();
  }
  task.configs =
      config_to_curve(task.latents, task.network, task.lambdas, 128, rng);

  const int b_max = task.latents.b_max;
  task.mean_curves.assign(n_configs, std::vector<double>(b_max));
  task.curves.assign(n_configs, std::vector<double>(b_max));
  for (int i = 0; i < n_configs; ++i) {
    const auto& cfg = task.configs[i];
    for (int b = 1; b <= b_max; ++b) {
      const double t = static_cast<double>(b) / b_max;
      const double mu = curve_mean(t, cfg, task.latents.y0);
      task.mean_curves[i][b - 1] = mu;
      task.curves[i][b - 1] = clamp01(mu + cfg.sigma * rng.normal());
    }
  }
  return task;
}

std::vector<int> allocate_budgets(const std::vector<double>& weights,
                                  int draws, const std::vector<int>* caps,
                                  Rng& rng) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("allocate_budgets: no configs");
  if (caps) {
    long long capacity = 0;
    for (int c : *caps) capacity += c;
    if (draws > capacity)
      throw std::invalid_argument("allocate_budgets: draws exceed capacity");
  }

  std::vector<int> counts(n, 0);
  // Prefix sums over the currently eligible (uncapped) configs; rebuilt
  // whenever a config hits its cap.
  std::vector<double> prefix;
  std::vector<std::size_t> eligible;
  auto rebuild = [&]() {
    eligible.clear();
    prefix.clear();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (caps && counts[i] >= (*caps)[i]) continue;
      acc += weights[i];
      eligible.push_back(i);
      prefix.push_back(acc);
    }
  };
  rebuild();
  for (int d = 0; d < draws; ++d) {
    if (eligible.empty())
      throw std::runtime_error("allocate_budgets: no eligible configs left");
    const double total = prefix.back();
    std::size_t idx;
    if (total <= 0.0) {
      // All remaining weight mass is capped out; fall back to uniform.
      idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(eligible.size()) - 1));
    } else {
      const double u = rng.uniform01() * total;
      idx = static_cast<std::size_t>(
          std::lower_bound(prefix.begin(), prefix.end(), u) - prefix.begin());
      if (idx >= eligible.size()) idx = eligible.size() - 1;
    }
    const std::size_t cfg = eligible[idx];
    ++counts[cfg];
    if (caps && counts[cfg] >= (*caps)[cfg]) rebuild();
  }
  return counts;
}

ContextSplit sample_context_split(int n_configs, int b_max, int train_size,
                                  int test_size, Rng& rng) {
  const long long capacity = static_cast<long long>(n_configs) * b_max;
  if (train_size + test_size > capacity || train_size < 0 || test_size < 0)
    throw std::invalid_argument("sample_context_split: infeasible sizes");

  ContextSplit split;
  const double log_alpha = rng.uniform(-4.0, -1.0);
  split.dirichlet_alpha = std::pow(10.0, log_alpha);
  const auto w = rng.dirichlet_symmetric(split.dirichlet_alpha,
                                         static_cast<std::size_t>(n_configs));
  std::vector<int> caps(n_configs, b_max);
  split.train_budgets = allocate_budgets(w, train_size, &caps, rng);

  const auto test_counts = allocate_budgets(w, test_size, nullptr, rng);
  for (int i = 0; i < n_configs; ++i) {
    const int b_lambda = split.train_budgets[i];
    const int lo = b_lambda == 0 ? 1 : b_lambda;
    for (int t = 0; t < test_counts[i]; ++t)
      split.test.emplace_back(
          i, static_cast<int>(rng.uniform_int(lo, b_max)));
  }
  return split;
}

}  // namespace ftbo
