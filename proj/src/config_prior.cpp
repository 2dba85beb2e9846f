#include "ftbo/config_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ftbo {

std::vector<std::array<double, kNumCurveParams>> PriorNetwork::forward(
    const std::vector<std::vector<double>>& points) const {
  std::vector<std::array<double, kNumCurveParams>> out(points.size());
  std::vector<double> cur, next;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& x = points[p];
    if (static_cast<int>(x.size()) != input_dim)
      throw std::invalid_argument("forward: point dimension mismatch");
    cur.assign(x.begin(), x.end());
    for (std::size_t l = 0; l < widths.size(); ++l) {
      const int n_out = widths[l];
      const int n_in = static_cast<int>(cur.size());
      next.assign(n_out, 0.0);
      const auto& W = weights[l];
      const auto& b = biases[l];
      for (int i = 0; i < n_out; ++i) {
        double s = b[i];
        const double* row = &W[static_cast<std::size_t>(i) * n_in];
        for (int j = 0; j < n_in; ++j) s += row[j] * cur[j];
        switch (activation) {
          case Activation::Tanh:
            next[i] = std::tanh(s);
            break;
          case Activation::Sine:
            next[i] = std::sin(s);
            break;
          case Activation::LeakyRamp:
            next[i] = s > 0.0 ? s : 0.01 * s;
            break;
        }
      }
      cur.swap(next);
    }
    // linear output layer
    const std::size_t L = widths.size();
    const auto& W = weights[L];
    const auto& b = biases[L];
    const int n_in = static_cast<int>(cur.size());
    for (int i = 0; i < kNumCurveParams; ++i) {
      double s = b[i];
      const double* row = &W[static_cast<std::size_t>(i) * n_in];
      for (int j = 0; j < n_in; ++j) s += row[j] * cur[j];
      out[p][i] = s;
    }
  }
  return out;
}

PriorNetwork init_network(Rng& rng, int m) {
  if (m < 1 || m > kMaxHpDim)
    throw std::invalid_argument(
        "init_network: input dimension must be in 1..10");
  PriorNetwork net;
  net.input_dim = m;
  const int depth = static_cast<int>(rng.uniform_int(2, 3));
  static const int kWidthChoices[3] = {16, 32, 64};
  for (int l = 0; l < depth; ++l)
    net.widths.push_back(kWidthChoices[rng.uniform_int(0, 2)]);
  net.activation =
      static_cast<PriorNetwork::Activation>(rng.uniform_int(0, 2));
  net.gain = rng.log_uniform(0.5, 4.0);

  std::vector<int> dims;
  dims.push_back(m);
  for (int w : net.widths) dims.push_back(w);
  dims.push_back(kNumCurveParams);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int n_in = dims[l], n_out = dims[l + 1];
    const double sd = net.gain / std::sqrt(static_cast<double>(n_in));
    std::vector<double> W(static_cast<std::size_t>(n_out) * n_in);
    std::vector<double> b(n_out);
    for (auto& w : W) w = rng.normal(0.0, sd);
    for (auto& v : b) v = rng.normal(0.0, 0.5);
    net.weights.push_back(std::move(W));
    net.biases.push_back(std::move(b));
  }
  return net;
}

CalibrationResult calibrate_marginals(
    const std::vector<std::array<double, kNumCurveParams>>& raw,
    const std::array<Marginal, kNumCurveParams>& specs) {
  const std::size_t n = raw.size();
  if (n < 16)
    throw std::invalid_argument("calibrate_marginals: need at least 16 rows");
  CalibrationResult res;
  res.columns.resize(n);

  std::vector<std::size_t> order(n);
  std::vector<double> col(n);
  for (int c = 0; c < kNumCurveParams; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = raw[i][c];
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
    // Midpoint rank for tie blocks: u = (#less + #equal/2) / n. A fully
    // constant column lands on u = 0.5, the target median.
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && col[order[j]] == col[order[i]]) ++j;
      const double u = (static_cast<double>(i) +
                        0.5 * static_cast<double>(j - i)) /
                       static_cast<double>(n);
      const double v = specs[c].icdf(u);
      for (std::size_t t = i; t < j; ++t) res.columns[order[t]][c] = v;
      i = j;
    }
  }

  res.normalized = res.columns;
  for (auto& row : res.normalized) {
    double wsum = 0.0;
    for (int k = 0; k < kNumBasis; ++k) wsum += row[2 + k];
    for (int k = 0; k < kNumBasis; ++k)
      row[2 + k] = wsum > 0.0 ? row[2 + k] / wsum : 1.0 / kNumBasis;
  }
  return res;
}

std::vector<CurveConfig> config_to_curve(
    const TaskLatents& latents, const PriorNetwork& network,
    const std::vector<std::vector<double>>& lambdas, int extra_cal, Rng& rng,
    bool no_hps) {
  const auto specs = build_marginals(latents.y0, latents.y_max);
  std::vector<CurveConfig> out;
  out.reserve(lambdas.size());

  if (no_hps) {
    // Input-deprived variant: parameters i.i.d. from the targets, shared
    // task latents only.
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      std::array<double, kNumCurveParams> v;
      for (int c = 0; c < kNumCurveParams; ++c)
        v[c] = specs[c].icdf(rng.uniform01());
      out.push_back(assemble_curve_config(v));
    }
    return out;
  }

  const int m = network.input_dim;
  for (const auto& lam : lambdas) {
    if (static_cast<int>(lam.size()) != m)
      throw std::invalid_argument("config_to_curve: lambda dimension mismatch");
    for (double x : lam)
      if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument(
            "config_to_curve: lambda components must lie in [0,1]");
  }

  std::vector<std::vector<double>> points = lambdas;
  for (int i = 0; i < extra_cal; ++i) {
    std::vector<double> f(m);
    for (double& x : f) x = rng.uniform01();
    points.push_back(std::move(f));
  }
  const auto raw = network.forward(points);
  const auto cal = calibrate_marginals(raw, specs);
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    out.push_back(assemble_curve_config(cal.columns[i]));
  return out;
}

}  // namespace ftbo
