#pragma once

#include <vector>

namespace ftbo {

inline constexpr int kPpdBins = 1000;

/// Discretized predictive distribution over performance in [0,1]: 1000
/// uniform bins, probabilities summing to 1. Boundary point masses from the
/// clipped observation model are folded into the end bins.
struct Ppd {
  std::vector<double> p;  // kPpdBins entries

  Ppd() : p(kPpdBins, 0.0) {}

  static int bin_of(double y);

  void normalize();

  /// log density under the piecewise-constant distribution, log(p_bin * 1000),
  /// floored at log(1e-12). Throws if y is outside [0,1].
  double log_likelihood(double y) const;

  /// P(Y > T), linear interpolation inside T's bin; 1 for T < 0, 0 for T >= 1.
  double exceedance(double T) const;

  double mean() const;

  double quantile(double q) const;

  /// E[max(0, Y - incumbent)] over bin midpoints.
  double expected_improvement(double incumbent) const;

  /// Adds the mass of weight * N(mu, sigma^2) clipped to [0,1].
  void accumulate_clipped_gaussian(double weight, double mu, double sigma);
};

}  // namespace ftbo
