#include "ftbo/curve_prior.hpp"

#include <cmath>
#include <stdexcept>

#include "ftbo/mathutil.hpp"

namespace ftbo {

TaskLatents sample_task_latents(Rng& rng, int b_max_lo, int b_max_hi) {
  if (b_max_lo < 1 || b_max_hi > 1000 || b_max_lo > b_max_hi)
    throw std::invalid_argument("sample_task_latents: b_max range must be a "
                                "nonempty subrange of [1, 1000]");
  TaskLatents tl;
  tl.u1 = rng.uniform01();
  tl.u2 = rng.uniform01();
  tl.u3 = rng.uniform01();
  tl.y0 = std::min(tl.u1, tl.u2);
  tl.y_max = tl.u3 <= 0.25 ? std::max(tl.u1, tl.u2) : 1.0;
  const double b = rng.log_uniform(static_cast<double>(b_max_lo),
                                   static_cast<double>(b_max_hi));
  tl.b_max = std::max(1, static_cast<int>(std::lround(b)));
  return tl;
}

double saturation_transform(double t, double x_sat, double r_sat) {
  return t <= x_sat ? t : r_sat * (t - x_sat) + x_sat;
}

namespace {

// Anchor solve inputs are clamped away from the degenerate corners where the
// rate would be 0 or infinite.
inline void clamp_anchor(double& xs, double& ys) {
  xs = std::min(std::max(xs, 0.01), 1.0);
  ys = std::min(std::max(ys, 1e-3), 1.0 - 1e-3);
}

}  // namespace

double basis_value(int k, double x, const BasisParams& p) {
  if (x <= 0.0) return 0.0;
  double xs = p.x_sat, ys = p.y_sat;
  clamp_anchor(xs, ys);
  const double a = p.alpha;
  double v;
  switch (k) {
    case 0: {  // power law: 1 - (1 + c x)^-a
      const double c = (std::pow(1.0 - ys, -1.0 / a) - 1.0) / xs;
      v = 1.0 - std::pow(1.0 + c * x, -a);
      break;
    }
    case 1: {  // stretched exponential: 1 - exp(-c x^a)
      const double c = -std::log(1.0 - ys) / std::pow(xs, a);
      v = -std::expm1(-c * std::pow(x, a));
      break;
    }
    case 2: {  // shifted logistic: 2 / (1 + exp(-c x^a)) - 1
      const double c = std::log((1.0 + ys) / (1.0 - ys)) / std::pow(xs, a);
      v = 2.0 / (1.0 + std::exp(-c * std::pow(x, a))) - 1.0;
      break;
    }
    case 3: {  // Hill: x^a / (c + x^a)
      const double c = std::pow(xs, a) * (1.0 - ys) / ys;
      const double xa = std::pow(x, a);
      v = xa / (c + xa);
      break;
    }
    default:
      throw std::invalid_argument("basis_value: k must be in 0..3");
  }
  return clamp01(v);
}

double curve_mean(double t, const CurveConfig& cfg, double y0) {
  double acc = 0.0;
  for (int k = 0; k < kNumBasis; ++k) {
    const auto& bp = cfg.basis[k];
    const double x = saturation_transform(t, bp.x_sat, bp.r_sat);
    acc += cfg.weights[k] * basis_value(k, x, bp);
  }
  return clamp01(y0 + (cfg.y_inf - y0) * acc);
}

double sample_observation(double t, const CurveConfig& cfg, double y0,
                          Rng& rng) {
  const double mu = curve_mean(t, cfg, y0);
  return clamp01(mu + cfg.sigma * rng.normal());
}

double clipped_gaussian_logpdf(double y, double mean, double sigma) {
  if (y <= 0.0) return log_norm_cdf((0.0 - mean) / sigma);
  if (y >= 1.0) return log_norm_cdf((mean - 1.0) / sigma);
  const double z = (y - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * kLog2Pi;
}

double Marginal::icdf(double u) const {
  switch (kind) {
    case Kind::Uniform:
      return a + (b - a) * u;
    case Kind::LogUniform:
      return std::exp(std::log(a) + (std::log(b) - std::log(a)) * u);
    case Kind::LogNormal:
      return std::exp(a + b * norm_icdf(u));
    case Kind::Gamma:
      // shape 1 only (exponential); rate b
      return -std::log1p(-u) / b;
  }
  return 0.0;
}

double Marginal::cdf(double x) const {
  switch (kind) {
    case Kind::Uniform:
      return clamp01((x - a) / (b - a));
    case Kind::LogUniform:
      if (x <= a) return 0.0;
      if (x >= b) return 1.0;
      return (std::log(x) - std::log(a)) / (std::log(b) - std::log(a));
    case Kind::LogNormal:
      if (x <= 0.0) return 0.0;
      return norm_cdf((std::log(x) - a) / b);
    case Kind::Gamma:
      return x <= 0.0 ? 0.0 : -std::expm1(-b * x);
  }
  return 0.0;
}

std::array<Marginal, kNumCurveParams> build_marginals(double y0,
                                                      double y_max) {
  std::array<Marginal, kNumCurveParams> m;
  m[0] = {Marginal::Kind::LogNormal, -5.0, 1.0};  // sigma
  m[1] = {Marginal::Kind::Uniform, y0, y_max};    // y_inf
  for (int k = 0; k < kNumBasis; ++k)
    m[2 + k] = {Marginal::Kind::Gamma, 1.0, 1.0};  // weight (pre-normalize)
  for (int k = 0; k < kNumBasis; ++k) {
    const int base = 6 + 4 * k;
    m[base + 0] = {Marginal::Kind::LogUniform, 0.25, 4.0};  // alpha
    m[base + 1] = {Marginal::Kind::Uniform, 0.0, 1.0};      // x_sat
    m[base + 2] = {Marginal::Kind::Uniform, 0.0, 1.0};      // y_sat
    m[base + 3] = {Marginal::Kind::Uniform, -0.5, 1.0};     // r_sat
  }
  return m;
}

CurveConfig assemble_curve_config(
    const std::array<double, kNumCurveParams>& v) {
  CurveConfig cfg;
  cfg.sigma = std::min(std::max(v[0], kSigmaMin), kSigmaMax);
  cfg.y_inf = clamp01(v[1]);
  double wsum = 0.0;
  for (int k = 0; k < kNumBasis; ++k) wsum += v[2 + k];
  for (int k = 0; k < kNumBasis; ++k)
    cfg.weights[k] = wsum > 0.0 ? v[2 + k] / wsum : 1.0 / kNumBasis;
  for (int k = 0; k < kNumBasis; ++k) {
    const int base = 6 + 4 * k;
    cfg.basis[k] = {v[base + 0], clamp01(v[base + 1]), clamp01(v[base + 2]),
                    v[base + 3]};
  }
  return cfg;
}

}  // namespace ftbo
