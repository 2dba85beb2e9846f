#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftbo/config_prior.hpp"
#include "ftbo/curve_prior.hpp"
#include "ftbo/rng.hpp"

namespace ftbo {

inline constexpr int kMaxConfigs = 1000;

/// Fully materialized synthetic task: latents, network, config space, and
/// both the noise-free curves and one noisy realization per config.
/// Metric direction is maximize; all values lie in [0,1].
struct SyntheticTask {
  std::string id;
  std::uint64_t seed = 0;
  int m = 1;
  TaskLatents latents;
  PriorNetwork network;
  std::vector<std::vector<double>> lambdas;     // N x m
  std::vector<CurveConfig> configs;             // N
  std::vector<std::vector<double>> mean_curves; // N x b_max, noiseless
  std::vector<std::vector<double>> curves;      // N x b_max, noisy realization
};

SyntheticTask sample_task(Rng& rng, int n_configs, int dim_lo, int dim_hi,
                          int b_max_lo, int b_max_hi);

/// Multinomial allocation of `draws` unit budgets over `weights`, optionally
/// capped per config (overflow is re-drawn among uncapped configs). Throws
/// if draws exceeds the total capacity.
std::vector<int> allocate_budgets(const std::vector<double>& weights,
                                  int draws, const std::vector<int>* caps,
                                  Rng& rng);

/// Train/test split in the freeze-thaw observation model: train budgets are
/// learning-curve prefixes 1..b_lambda, test targets lie in [b_lambda, b_max]
/// per config ({1..b_max} when b_lambda = 0).
struct ContextSplit {
  std::vector<int> train_budgets;            // b_lambda per config
  std::vector<std::pair<int, int>> test;     // (config index, target step)
  double dirichlet_alpha = 1.0;
};

ContextSplit sample_context_split(int n_configs, int b_max, int train_size,
                                  int test_size, Rng& rng);

}  // namespace ftbo
