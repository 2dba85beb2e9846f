#pragma once

#include <array>
#include <vector>

#include "ftbo/curve_prior.hpp"
#include "ftbo/rng.hpp"

namespace ftbo {

inline constexpr int kMaxHpDim = 10;

/// Randomly initialized MLP mapping a hyperparameter vector in [0,1]^m to 22
/// raw curve-parameter outputs. Never trained; the random weights represent
/// one task's hyperparameter-to-curve relationship.
struct PriorNetwork {
  enum class Activation { Tanh, Sine, LeakyRamp };

  int input_dim = 0;
  std::vector<int> widths;  // hidden layer widths
  Activation activation = Activation::Tanh;
  double gain = 1.0;
  // weights[l] is row-major (out x in); biases[l] has out entries.
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  /// Raw outputs for a batch of points, one 22-vector per row.
  std::vector<std::array<double, kNumCurveParams>> forward(
      const std::vector<std::vector<double>>& points) const;
};

/// Samples architecture and weights: depth ~ U{2,3}, widths ~ U{16,32,64},
/// activation ~ U{tanh, sine, leaky-ramp}, W ~ N(0, g^2/fan_in) with
/// log g ~ U(log 0.5, log 4). Deterministic given the rng state.
PriorNetwork init_network(Rng& rng, int m);

struct CalibrationResult {
  /// Per-column icdf-calibrated values (weight columns are still Gamma draws).
  std::vector<std::array<double, kNumCurveParams>> columns;
  /// Same but with the 4 weight columns normalized by their row sum.
  std::vector<std::array<double, kNumCurveParams>> normalized;
};

/// ECDF marginal calibration: per column, rank-transform to (0,1) with
/// midpoint tie handling, apply the target icdf, then normalize the weight
/// group per row. A constant column maps everywhere to the target median.
CalibrationResult calibrate_marginals(
    const std::vector<std::array<double, kNumCurveParams>>& raw,
    const std::array<Marginal, kNumCurveParams>& specs);

/// Curve parameters for the requested configs under one task hypothesis.
/// extra_cal uniform filler configs are appended for ECDF stability and
/// dropped from the result. With no_hps the network is skipped and each
/// config's parameters are drawn i.i.d. from the target marginals.
std::vector<CurveConfig> config_to_curve(
    const TaskLatents& latents, const PriorNetwork& network,
    const std::vector<std::vector<double>>& lambdas, int extra_cal, Rng& rng,
    bool no_hps = false);

}  // namespace ftbo
