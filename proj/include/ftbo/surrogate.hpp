#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ftbo/config_prior.hpp"
#include "ftbo/curve_prior.hpp"
#include "ftbo/ppd.hpp"
#include "ftbo/rng.hpp"

namespace ftbo {

/// One observation of a partial learning curve.
struct Observation {
  int config_id = 0;
  int step = 1;       // >= 1
  double y = 0.0;     // in [0,1]
};

/// Multiset of observations seen so far. Per config, observed steps form the
/// prefix 1..b_lambda.
struct History {
  std::vector<Observation> entries;

  /// Per-config frontier b_lambda; validates the prefix property.
  std::vector<int> frontiers(int n_configs) const;

  double best_y() const;  // 0 when empty
};

struct Query {
  int config_id = 0;
  int step = 1;
};

struct InferenceConfig {
  int n_samples = 512;          // S, >= 16
  int extra_cal = 128;
  double min_ess_fraction = 0.02;
  bool no_hps = false;
  std::uint64_t seed = 0;
};

struct InferDiagnostics {
  double ess = 0.0;  // smallest per-config 1/sum(w^2); S when history is empty
  int s_used = 0;
  bool degenerate = false;  // some config's weights all underflowed
  bool low_ess = false;     // ess < min_ess_fraction * S
};

/// Probabilistic surrogate interface: per query, the discretized posterior
/// predictive distribution given the history. Implementations must be pure
/// functions of (history, queries, seed) — no state mutates between calls.
class Surrogate {
 public:
  virtual ~Surrogate() = default;

  virtual std::vector<Ppd> infer(const History& history,
                                 const std::vector<Query>& queries,
                                 InferDiagnostics* diag = nullptr) const = 0;

  /// P(Y > T) per query. Default routes through infer + Ppd::exceedance;
  /// implementations may use an exact closed form.
  virtual std::vector<double> exceedance_scores(
      const History& history, const std::vector<Query>& queries,
      double T) const;

  /// E[max(0, Y - incumbent)] per query, defaulting likewise.
  virtual std::vector<double> ei_scores(const History& history,
                                        const std::vector<Query>& queries,
                                        double incumbent) const;
};

/// One sampled task hypothesis: a curve (and noise level) per config.
struct TaskHypothesis {
  double y0 = 0.0;
  std::vector<CurveConfig> configs;
};

/// Exact Monte-Carlo in-context surrogate: per query, the predictive is the
/// self-normalized importance-weighted mixture of per-hypothesis clipped
/// Gaussians, with hypotheses drawn once from the prior (seeded). Mixture
/// weights for a query condition on the observations of that query's config
/// only (a sub-sigma-algebra of the history), which keeps the estimator a
/// valid Bayesian predictive while avoiding the weight collapse a joint
/// full-history likelihood suffers at practical ensemble sizes. There is no
/// fitting; repeated calls with a grown history reuse the same ensemble.
class McSurrogate : public Surrogate {
 public:
  /// Prior mode: hypotheses are sampled from the synthetic-task prior over
  /// the given config space.
  McSurrogate(std::vector<std::vector<double>> lambdas, int b_max,
              InferenceConfig cfg);

  /// Fixed-set mode (degenerate discretized prior): hypotheses are drawn
  /// uniformly with replacement from the given finite set.
  McSurrogate(std::vector<TaskHypothesis> hypothesis_set, std::size_t n_configs,
              int b_max, InferenceConfig cfg);

  std::vector<Ppd> infer(const History& history,
                         const std::vector<Query>& queries,
                         InferDiagnostics* diag = nullptr) const override;

  std::vector<double> exceedance_scores(const History& history,
                                        const std::vector<Query>& queries,
                                        double T) const override;

  std::vector<double> ei_scores(const History& history,
                                const std::vector<Query>& queries,
                                double incumbent) const override;

  int b_max() const { return b_max_; }
  const InferenceConfig& config() const { return cfg_; }

 private:
  struct Sample {
    double y0;
    std::vector<CurveConfig> configs;
    std::vector<double> means;  // n_configs x b_max table, row-major
  };

  Sample draw_sample(Rng& rng) const;
  std::vector<Sample> build_ensemble(std::uint64_t seed, int count) const;

  /// Conditional mixture weights: each config's weight vector conditions only
  /// on that config's own observations, so untouched configs keep the exact
  /// prior predictive. Escalated samples live in `extra` and are referenced
  /// by `samples`; weight vectors span `samples`.
  struct Posterior {
    std::vector<Sample> extra;
    std::vector<const Sample*> samples;
    std::vector<double> prior_weights;      // uniform over the base ensemble
    std::vector<std::vector<double>> cond;  // one vector per observed config
    std::vector<int> cond_index;            // config id -> index in cond, -1

    const std::vector<double>& weights_for(int config_id) const {
      const int k = cond_index[config_id];
      return k >= 0 ? cond[k] : prior_weights;
    }
  };

  Posterior posterior_weights(const History& history,
                              InferDiagnostics* diag) const;
  double sample_mean(const Sample& s, int config_id, int step) const;

  std::vector<std::vector<double>> lambdas_;
  int b_max_;
  std::size_t n_configs_;
  InferenceConfig cfg_;
  std::vector<TaskHypothesis> fixed_set_;  // empty in prior mode
  std::vector<Sample> ensemble_;
};

}  // namespace ftbo
