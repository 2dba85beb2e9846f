#include "ftbo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ftbo/mathutil.hpp"

namespace ftbo {

std::vector<int> History::frontiers(int n_configs) const {
  std::vector<int> front(n_configs, 0);
  std::vector<std::vector<char>> seen(n_configs);
  for (const auto& obs : entries) {
    if (obs.config_id < 0 || obs.config_id >= n_configs)
      throw std::invalid_argument("history: config id out of range");
    if (obs.step < 1) throw std::invalid_argument("history: step must be >= 1");
    if (!(obs.y >= 0.0 && obs.y <= 1.0))
      throw std::invalid_argument("history: y must lie in [0,1]");
    auto& s = seen[obs.config_id];
    if (obs.step > static_cast<int>(s.size())) s.resize(obs.step, 0);
    s[obs.step - 1] = 1;
    front[obs.config_id] = std::max(front[obs.config_id], obs.step);
  }
  for (int i = 0; i < n_configs; ++i)
    for (int b = 0; b < front[i]; ++b)
      if (!seen[i][b])
        throw std::invalid_argument(
            "history: observations must form step prefixes 1..b_lambda");
  return front;
}

double History::best_y() const {
  double best = 0.0;
  for (const auto& obs : entries) best = std::max(best, obs.y);
  return best;
}

std::vector<double> Surrogate::exceedance_scores(
    const History& history, const std::vector<Query>& queries,
    double T) const {
  const auto ppds = infer(history, queries);
  std::vector<double> out(ppds.size());
  for (std::size_t i = 0; i < ppds.size(); ++i) out[i] = ppds[i].exceedance(T);
  return out;
}

std::vector<double> Surrogate::ei_scores(const History& history,
                                         const std::vector<Query>& queries,
                                         double incumbent) const {
  const auto ppds = infer(history, queries);
  std::vector<double> out(ppds.size());
  for (std::size_t i = 0; i < ppds.size(); ++i)
    out[i] = ppds[i].expected_improvement(incumbent);
  return out;
}

McSurrogate::McSurrogate(std::vector<std::vector<double>> lambdas, int b_max,
                         InferenceConfig cfg)
    : lambdas_(std::move(lambdas)), b_max_(b_max),
      n_configs_(lambdas_.size()), cfg_(cfg) {
  if (cfg_.n_samples < 16)
    throw std::invalid_argument("inference: n_samples must be >= 16");
  if (lambdas_.empty())
    throw std::invalid_argument("surrogate: empty config space");
  if (b_max_ < 1) throw std::invalid_argument("surrogate: b_max must be >= 1");
  ensemble_ = build_ensemble(cfg_.seed, cfg_.n_samples);
}

McSurrogate::McSurrogate(std::vector<TaskHypothesis> hypothesis_set,
                         std::size_t n_configs, int b_max, InferenceConfig cfg)
    : b_max_(b_max), n_configs_(n_configs), cfg_(cfg),
      fixed_set_(std::move(hypothesis_set)) {
  if (cfg_.n_samples < 16)
    throw std::invalid_argument("inference: n_samples must be >= 16");
  if (fixed_set_.empty())
    throw std::invalid_argument("surrogate: empty hypothesis set");
  ensemble_ = build_ensemble(cfg_.seed, cfg_.n_samples);
}

McSurrogate::Sample McSurrogate::draw_sample(Rng& rng) const {
  Sample s;
  if (!fixed_set_.empty()) {
    const auto& h = fixed_set_[rng.uniform_int(
        0, static_cast<std::int64_t>(fixed_set_.size()) - 1)];
    s.y0 = h.y0;
    s.configs = h.configs;
  } else {
    TaskLatents latents = sample_task_latents(rng, 1, 1);
    latents.b_max = b_max_;
    s.y0 = latents.y0;
    if (cfg_.no_hps) {
      s.configs = config_to_curve(latents, PriorNetwork{}, lambdas_,
                                  cfg_.extra_cal, rng, /*no_hps=*/true);
    } else {
      const int m = static_cast<int>(lambdas_.front().size());
      const PriorNetwork net = init_network(rng, m);
      s.configs =
          config_to_curve(latents, net, lambdas_, cfg_.extra_cal, rng);
    }
  }
  // Memoize the mean-curve table when it is small enough; otherwise means
  // are evaluated on demand.
  const std::size_t cells = n_configs_ * static_cast<std::size_t>(b_max_);
  if (cells <= 200000) {
    s.means.resize(cells);
    for (std::size_t i = 0; i < n_configs_; ++i)
      for (int b = 1; b <= b_max_; ++b)
        s.means[i * b_max_ + (b - 1)] =
            curve_mean(static_cast<double>(b) / b_max_, s.configs[i], s.y0);
  }
  return s;
}

std::vector<McSurrogate::Sample> McSurrogate::build_ensemble(
    std::uint64_t seed, int count) const {
  std::vector<Sample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    // Independent stream per sample: ensemble order never affects bits.
    Rng rng(Rng::mix({seed, 0x5a11edu, static_cast<std::uint64_t>(i)}));
    out.push_back(draw_sample(rng));
  }
  return out;
}

double McSurrogate::sample_mean(const Sample& s, int config_id,
                                int step) const {
  if (!s.means.empty())
    return s.means[static_cast<std::size_t>(config_id) * b_max_ + (step - 1)];
  return curve_mean(static_cast<double>(step) / b_max_, s.configs[config_id],
                    s.y0);
}

McSurrogate::Posterior McSurrogate::posterior_weights(
    const History& history, InferDiagnostics* diag) const {
  for (const auto& obs : history.entries) {
    if (obs.config_id < 0 ||
        static_cast<std::size_t>(obs.config_id) >= n_configs_)
      throw std::invalid_argument("infer: history config id out of range");
    if (obs.step > b_max_)
      throw std::invalid_argument("infer: history step exceeds b_max");
  }

  Posterior post;
  post.cond_index.assign(n_configs_, -1);
  for (const auto& s : ensemble_) post.samples.push_back(&s);

  // Group observations by config: each observed config gets its own
  // conditional weight vector; unobserved configs keep the prior predictive.
  std::vector<std::vector<const Observation*>> obs_of;
  std::vector<int> observed;  // config ids, ascending
  {
    std::vector<std::vector<const Observation*>> tmp(n_configs_);
    for (const auto& obs : history.entries)
      tmp[obs.config_id].push_back(&obs);
    for (std::size_t c = 0; c < n_configs_; ++c)
      if (!tmp[c].empty()) {
        post.cond_index[c] = static_cast<int>(observed.size());
        observed.push_back(static_cast<int>(c));
        obs_of.push_back(std::move(tmp[c]));
      }
  }

  auto log_weights_of = [&](const std::vector<const Observation*>& obs_list) {
    std::vector<double> lw(post.samples.size(), 0.0);
    for (std::size_t i = 0; i < post.samples.size(); ++i) {
      const Sample& s = *post.samples[i];
      double acc = 0.0;
      for (const Observation* obs : obs_list)
        acc += clipped_gaussian_logpdf(
            obs->y, sample_mean(s, obs->config_id, obs->step),
            s.configs[obs->config_id].sigma);
      lw[i] = acc;
    }
    return lw;
  };

  std::vector<std::vector<double>> lw(observed.size());
  std::vector<double> lse(observed.size());
  auto recompute = [&] {
    bool all_finite = true;
    for (std::size_t k = 0; k < observed.size(); ++k) {
      lw[k] = log_weights_of(obs_of[k]);
      lse[k] = logsumexp(lw[k]);
      all_finite = all_finite && std::isfinite(lse[k]);
    }
    return all_finite;
  };

  int escalation = 0;
  while (!recompute() && escalation < 3) {
    // Some config's weights all underflowed: double the ensemble
    // (deterministic derived streams) and retry, up to 8x.
    ++escalation;
    const int add = cfg_.n_samples * (1 << (escalation - 1));
    auto more = build_ensemble(
        Rng::mix({cfg_.seed, 0xe5caul, static_cast<std::uint64_t>(escalation)}),
        add);
    post.extra.insert(post.extra.end(), std::make_move_iterator(more.begin()),
                      std::make_move_iterator(more.end()));
    post.samples.clear();
    for (const auto& s : ensemble_) post.samples.push_back(&s);
    for (const auto& s : post.extra) post.samples.push_back(&s);
  }

  post.prior_weights.assign(post.samples.size(), 0.0);
  for (std::size_t i = 0; i < ensemble_.size(); ++i)
    post.prior_weights[i] = 1.0 / ensemble_.size();

  InferDiagnostics d;
  d.ess = static_cast<double>(cfg_.n_samples);
  post.cond.resize(observed.size());
  for (std::size_t k = 0; k < observed.size(); ++k) {
    auto& w = post.cond[k];
    if (!std::isfinite(lse[k])) {
      // Degenerate evidence for this config: fall back to its prior
      // predictive.
      d.degenerate = true;
      w = post.prior_weights;
    } else {
      w.assign(post.samples.size(), 0.0);
      for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::exp(lw[k][i] - lse[k]);
    }
    double sq = 0.0;
    for (double v : w) sq += v * v;
    const double ess = sq > 0.0 ? 1.0 / sq : 0.0;
    if (k == 0 || ess < d.ess) d.ess = ess;
  }
  d.s_used = static_cast<int>(post.samples.size());
  d.low_ess = d.ess < cfg_.min_ess_fraction * cfg_.n_samples;
  if (diag) *diag = d;
  return post;
}

std::vector<Ppd> McSurrogate::infer(const History& history,
                                    const std::vector<Query>& queries,
                                    InferDiagnostics* diag) const {
  for (const auto& q : queries) {
    if (q.config_id < 0 || static_cast<std::size_t>(q.config_id) >= n_configs_)
      throw std::invalid_argument("infer: query config id out of range");
    if (q.step < 1 || q.step > b_max_)
      throw std::invalid_argument("infer: query step out of range");
  }
  const Posterior post = posterior_weights(history, diag);

  std::vector<Ppd> out(queries.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& weights = post.weights_for(queries[qi].config_id);
    Ppd& ppd = out[qi];
    for (std::size_t i = 0; i < post.samples.size(); ++i) {
      const Sample& s = *post.samples[i];
      if (weights[i] == 0.0) continue;
      ppd.accumulate_clipped_gaussian(
          weights[i], sample_mean(s, queries[qi].config_id, queries[qi].step),
          s.configs[queries[qi].config_id].sigma);
    }
    ppd.normalize();
  }
  return out;
}

std::vector<double> McSurrogate::exceedance_scores(
    const History& history, const std::vector<Query>& queries,
    double T) const {
  const Posterior post = posterior_weights(history, nullptr);
  std::vector<double> out(queries.size(), 0.0);
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    if (T >= 1.0) continue;
    if (T < 0.0) {
      out[qi] = 1.0;
      continue;
    }
    const auto& weights = post.weights_for(queries[qi].config_id);
    double acc = 0.0;
    for (std::size_t i = 0; i < post.samples.size(); ++i) {
      const Sample& s = *post.samples[i];
      if (weights[i] == 0.0) continue;
      const double mu =
          sample_mean(s, queries[qi].config_id, queries[qi].step);
      acc += weights[i] *
             norm_cdf((mu - T) / s.configs[queries[qi].config_id].sigma);
    }
    out[qi] = acc;
  }
  return out;
}

std::vector<double> McSurrogate::ei_scores(const History& history,
                                           const std::vector<Query>& queries,
                                           double incumbent) const {
  const Posterior post = posterior_weights(history, nullptr);
  const double inc = clamp01(incumbent);
  std::vector<double> out(queries.size(), 0.0);
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& weights = post.weights_for(queries[qi].config_id);
    double acc = 0.0;
    for (std::size_t i = 0; i < post.samples.size(); ++i) {
      const Sample& s = *post.samples[i];
      if (weights[i] == 0.0) continue;
      const double sigma = s.configs[queries[qi].config_id].sigma;
      const double mu =
          sample_mean(s, queries[qi].config_id, queries[qi].step);
      // E[max(0, clip(X) - inc)] for X ~ N(mu, sigma^2) clipped to [0,1].
      const double zi = (inc - mu) / sigma;
      const double z1 = (1.0 - mu) / sigma;
      const double ei = (mu - inc) * (norm_cdf(z1) - norm_cdf(zi)) +
                        sigma * (norm_pdf(zi) - norm_pdf(z1)) +
                        (1.0 - inc) * (1.0 - norm_cdf(z1));
      acc += weights[i] * std::max(0.0, ei);
    }
    out[qi] = acc;
  }
  return out;
}

}  // namespace ftbo
