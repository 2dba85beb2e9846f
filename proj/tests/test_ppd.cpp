#include <doctest.h>

#include <cmath>

#include "ftbo/mathutil.hpp"
#include "ftbo/ppd.hpp"
#include "ftbo/rng.hpp"

using namespace ftbo;

namespace {

Ppd uniform_ppd() {
  Ppd ppd;
  for (double& v : ppd.p) v = 1.0 / kPpdBins;
  return ppd;
}

Ppd point_mass(double y) {
  Ppd ppd;
  ppd.p[Ppd::bin_of(y)] = 1.0;
  return ppd;
}

}  // namespace

TEST_CASE("normalize produces a unit distribution, uniform on zero mass") {
  Ppd ppd;
  ppd.p[3] = 2.0;
  ppd.p[700] = 6.0;
  ppd.normalize();
  double s = 0.0;
  for (double v : ppd.p) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ppd.p[700] == doctest::Approx(0.75));

  Ppd zero;
  zero.normalize();
  CHECK(zero.p[0] == doctest::Approx(1.0 / kPpdBins));
  CHECK(zero.p[kPpdBins - 1] == doctest::Approx(1.0 / kPpdBins));
}

TEST_CASE("log_likelihood: uniform 0, point mass log(1000), floor elsewhere") {
  const Ppd uni = uniform_ppd();
  CHECK(uni.log_likelihood(0.37) == doctest::Approx(0.0).epsilon(1e-9));

  const Ppd pm = point_mass(0.5005);
  CHECK(pm.log_likelihood(0.5005) ==
        doctest::Approx(std::log(1000.0)).epsilon(1e-12));
  CHECK(pm.log_likelihood(0.1) == doctest::Approx(std::log(1e-12)));

  CHECK_THROWS_AS(uni.log_likelihood(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(uni.log_likelihood(1.1), std::invalid_argument);
}

TEST_CASE("exceedance: uniform complement, bounds, and cdf complement") {
  const Ppd uni = uniform_ppd();
  CHECK(uni.exceedance(0.25) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(uni.exceedance(-0.5) == 1.0);
  CHECK(uni.exceedance(1.0) == 0.0);
  CHECK(uni.exceedance(2.0) == 0.0);

  Rng rng(401);
  Ppd rand;
  for (double& v : rand.p) v = rng.uniform01();
  rand.normalize();
  for (double T : {0.001, 0.2, 0.5, 0.77, 0.9995}) {
    // complement: P(Y > T) + P(Y <= T) = 1, interpolated identically
    const int b = Ppd::bin_of(T);
    double below = 0.0;
    for (int i = 0; i < b; ++i) below += rand.p[i];
    below += rand.p[b] * (T - b / 1000.0) * 1000.0;
    CHECK(rand.exceedance(T) + below == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mean, quantile, and EI over bin midpoints") {
  const Ppd uni = uniform_ppd();
  CHECK(std::fabs(uni.mean() - 0.5) < 5e-4);
  CHECK(std::fabs(uni.quantile(0.5) - 0.5) < 2e-3);

  const Ppd pm = point_mass(0.7005);
  CHECK(pm.expected_improvement(0.5) == doctest::Approx(0.2).epsilon(1e-2));
  CHECK(pm.expected_improvement(0.9) == 0.0);
  CHECK(pm.mean() == doctest::Approx(0.7005).epsilon(1e-6));

  // Symmetric two-point distribution about 0.5.
  Ppd sym;
  sym.p[Ppd::bin_of(0.3)] = 0.5;
  sym.p[Ppd::bin_of(0.7)] = 0.5;
  CHECK(std::fabs(sym.quantile(0.5) - 0.5) < 0.21);  // inside the flat region
  CHECK(sym.mean() == doctest::Approx(0.5).epsilon(1e-2));

  CHECK_THROWS_AS(uni.quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(uni.quantile(1.0), std::invalid_argument);
}

TEST_CASE("accumulate_clipped_gaussian deposits exact component mass") {
  for (double mu : {0.05, 0.4, 0.97}) {
    for (double sigma : {1e-5, 0.01, 0.2}) {
      Ppd ppd;
      ppd.accumulate_clipped_gaussian(0.6, mu, sigma);
      double total = 0.0;
      for (double v : ppd.p) total += v;
      CHECK(total == doctest::Approx(0.6).epsilon(1e-9));
      // Boundary point masses agree with the Gaussian tails.
      CHECK(ppd.p[0] >= 0.6 * norm_cdf((0.0 - mu) / sigma) - 1e-12);
      CHECK(ppd.p[kPpdBins - 1] >= 0.6 * norm_cdf((mu - 1.0) / sigma) - 1e-12);
    }
  }
}

TEST_CASE("accumulated mixture matches clipped-Gaussian moments") {
  Ppd ppd;
  ppd.accumulate_clipped_gaussian(0.5, 0.3, 0.02);
  ppd.accumulate_clipped_gaussian(0.5, 0.8, 0.05);
  ppd.normalize();
  // Interior Gaussians: negligible clipping, mean = mixture mean.
  CHECK(ppd.mean() == doctest::Approx(0.55).epsilon(1e-3));
  CHECK(ppd.exceedance(0.5) == doctest::Approx(0.5).epsilon(1e-3));
  // Exceedance at a component center splits that component's mass.
  CHECK(ppd.exceedance(0.8) == doctest::Approx(0.25).epsilon(2e-3));
}
