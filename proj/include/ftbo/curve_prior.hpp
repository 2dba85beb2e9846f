#pragma once

#include <array>
#include <vector>

#include "ftbo/rng.hpp"

namespace ftbo {

inline constexpr int kNumBasis = 4;
inline constexpr int kNumCurveParams = 22;  // sigma, y_inf, 4 weights, 4x4 basis

/// Per-basis break-point parameterization. r_sat may be negative (divergence);
/// r_sat = 1 continues the pre-break trajectory unchanged.
struct BasisParams {
  double alpha;  // skew, > 0
  double x_sat;  // break location on the normalized time axis, in [0,1]
  double y_sat;  // anchor value at the break, in [0,1]
  double r_sat;  // post-break rate multiplier, finite, may be negative
};

/// Full per-configuration curve parameterization (y_inf, weights, basis
/// params) plus the observation-noise std sigma.
struct CurveConfig {
  double y_inf = 0.0;
  std::array<double, kNumBasis> weights{};  // nonnegative, sum to 1
  std::array<BasisParams, kNumBasis> basis{};
  double sigma = 1e-3;
};

/// Task-level latent state shared by all configurations of one task.
struct TaskLatents {
  double u1 = 0, u2 = 0, u3 = 0;
  double y0 = 0;     // min(u1, u2)
  double y_max = 1;  // max(u1, u2) if u3 <= 0.25 else 1.0
  int b_max = 1;     // per-configuration step cap, log-uniform draw
};

/// Latent draw: u1,u2,u3 ~ U(0,1), b_max log-uniform on [lo, hi] rounded to
/// the nearest integer >= 1. Throws on an empty range.
TaskLatents sample_task_latents(Rng& rng, int b_max_lo, int b_max_hi);

/// Piecewise-linear time warp: identity up to x_sat, slope r_sat after.
double saturation_transform(double t, double x_sat, double r_sat);

/// Value of basis family k (0..3) at the already-transformed coordinate x.
/// Each family is a bounded monotone growth curve with f(0)=0, sup f <= 1,
/// whose internal rate is anchored so that f(x_sat)=y_sat. Negative x maps
/// to 0 (constant continuation); x > 1 follows the closed form.
double basis_value(int k, double x, const BasisParams& p);

/// Noise-free curve model: y0 + (y_inf-y0) * sum_k w_k f_k(warp(t)), clamped
/// to [0,1].
double curve_mean(double t, const CurveConfig& cfg, double y0);

/// One observation: N(curve_mean, sigma^2) clipped to [0,1].
double sample_observation(double t, const CurveConfig& cfg, double y0,
                          Rng& rng);

/// Exact log density of the clipped-Gaussian observation model. Boundary
/// values (y == 0 or y == 1) are point masses equal to the Gaussian tail
/// probability; interior values use the untruncated Gaussian density.
double clipped_gaussian_logpdf(double y, double mean, double sigma);

// --- target marginals -------------------------------------------------------

/// Target marginal distribution for one of the 22 curve parameters.
struct Marginal {
  enum class Kind { Uniform, LogUniform, LogNormal, Gamma };
  Kind kind = Kind::Uniform;
  double a = 0.0;  // Uniform/LogUniform: low; LogNormal: mu; Gamma: shape
  double b = 1.0;  // Uniform/LogUniform: high; LogNormal: sd; Gamma: rate

  double icdf(double u) const;
  double cdf(double x) const;
};

/// The 22 per-column targets, in the canonical column order
/// [sigma, y_inf, w1..w4, (alpha, x_sat, y_sat, r_sat) x 4].
/// The weight columns carry the Gamma(1,1) calibration target; the joint
/// Dirichlet arises from group normalization downstream.
std::array<Marginal, kNumCurveParams> build_marginals(double y0, double y_max);

/// Assembles a CurveConfig from one calibrated 22-vector: normalizes the
/// weight group (Gamma draws / sum) and clamps sigma to [1e-6, 0.25].
CurveConfig assemble_curve_config(const std::array<double, kNumCurveParams>& v);

inline constexpr double kSigmaMin = 1e-6;
inline constexpr double kSigmaMax = 0.25;

}  // namespace ftbo
