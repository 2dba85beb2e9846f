#include "ftbo/ppd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ftbo/mathutil.hpp"

namespace ftbo {

namespace {
constexpr double kBinWidth = 1.0 / kPpdBins;
constexpr double kDensityFloor = 1e-12;
}  // namespace

int Ppd::bin_of(double y) {
  int b = static_cast<int>(y * kPpdBins);
  return std::min(std::max(b, 0), kPpdBins - 1);
}

void Ppd::normalize() {
  double s = 0.0;
  for (double v : p) s += v;
  if (s <= 0.0) {
    for (double& v : p) v = kBinWidth;  // uniform fallback
    return;
  }
  for (double& v : p) v /= s;
}

double Ppd::log_likelihood(double y) const {
  if (!(y >= 0.0 && y <= 1.0))
    throw std::invalid_argument("ppd_log_likelihood: y must lie in [0,1]");
  const double density = p[bin_of(y)] * kPpdBins;
  return std::log(std::max(density, kDensityFloor));
}

double Ppd::exceedance(double T) const {
  if (T < 0.0) return 1.0;
  if (T >= 1.0) return 0.0;
  const int b = bin_of(T);
  double below = 0.0;
  for (int i = 0; i < b; ++i) below += p[i];
  const double frac = (T - b * kBinWidth) / kBinWidth;
  below += p[b] * frac;
  return std::max(0.0, 1.0 - below);
}

double Ppd::mean() const {
  double s = 0.0;
  for (int i = 0; i < kPpdBins; ++i) s += p[i] * (i + 0.5) * kBinWidth;
  return s;
}

double Ppd::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("ppd_quantile: q must be in (0,1)");
  double cum = 0.0;
  for (int i = 0; i < kPpdBins; ++i) {
    if (cum + p[i] >= q) {
      const double frac = p[i] > 0.0 ? (q - cum) / p[i] : 0.5;
      return (i + frac) * kBinWidth;
    }
    cum += p[i];
  }
  return 1.0;
}

double Ppd::expected_improvement(double incumbent) const {
  double s = 0.0;
  for (int i = 0; i < kPpdBins; ++i) {
    const double mid = (i + 0.5) * kBinWidth;
    if (mid > incumbent) s += p[i] * (mid - incumbent);
  }
  return s;
}

void Ppd::accumulate_clipped_gaussian(double weight, double mu, double sigma) {
  if (weight <= 0.0) return;
  // Clip point masses land in the end bins.
  const double tail_lo = norm_cdf((0.0 - mu) / sigma);
  const double tail_hi = norm_cdf((mu - 1.0) / sigma);
  p[0] += weight * tail_lo;
  p[kPpdBins - 1] += weight * tail_hi;
  const double interior = 1.0 - tail_lo - tail_hi;
  if (interior <= 0.0) return;

  const double span = 8.0 * sigma;
  const int lo = std::max(0, static_cast<int>((mu - span) * kPpdBins));
  const int hi =
      std::min(kPpdBins - 1, static_cast<int>((mu + span) * kPpdBins));
  double cdf_prev = norm_cdf((lo * kBinWidth - mu) / sigma);
  // Interior mass below the window is folded into its first bin so the total
  // stays exact.
  double below_window = cdf_prev - tail_lo;
  for (int i = lo; i <= hi; ++i) {
    const double cdf_next = norm_cdf(((i + 1) * kBinWidth - mu) / sigma);
    double m = cdf_next - cdf_prev;
    if (i == lo) m += below_window;
    p[i] += weight * m;
    cdf_prev = cdf_next;
  }
  const double above_window = (1.0 - tail_hi) - cdf_prev;
  if (above_window > 0.0) p[hi] += weight * above_window;
}

}  // namespace ftbo
