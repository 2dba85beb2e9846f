#include <doctest.h>

#include <cmath>

#include "ftbo/config_prior.hpp"
#include "test_util.hpp"

using namespace ftbo;

TEST_CASE("init_network is deterministic and shape-correct") {
  Rng a(201), b(201);
  const PriorNetwork na = init_network(a, 3);
  const PriorNetwork nb = init_network(b, 3);
  CHECK(na.widths == nb.widths);
  CHECK(na.weights == nb.weights);
  CHECK(na.biases == nb.biases);
  CHECK(na.activation == nb.activation);
  CHECK(na.gain == nb.gain);

  // First weight matrix has 3 input columns.
  CHECK(na.input_dim == 3);
  CHECK(na.weights[0].size() == static_cast<std::size_t>(na.widths[0]) * 3);
  // Output layer emits 22 values.
  CHECK(na.weights.back().size() ==
        static_cast<std::size_t>(kNumCurveParams) * na.widths.back());

  Rng c(202);
  CHECK_THROWS_AS(init_network(c, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_network(c, 11), std::invalid_argument);
}

TEST_CASE("network sampler hits its declared architecture distribution") {
  Rng rng(203);
  int depth2 = 0, depth3 = 0;
  int act_counts[3] = {0, 0, 0};
  for (int i = 0; i < 1000; ++i) {
    const PriorNetwork net = init_network(rng, 2);
    const int depth = static_cast<int>(net.widths.size());
    REQUIRE((depth == 2 || depth == 3));
    (depth == 2 ? depth2 : depth3)++;
    act_counts[static_cast<int>(net.activation)]++;
    for (int w : net.widths) REQUIRE((w == 16 || w == 32 || w == 64));
    REQUIRE(net.gain >= 0.5);
    REQUIRE(net.gain <= 4.0);
  }
  // Binomial(1000, 1/2): +-4 sigma around 500.
  CHECK(depth2 > 430);
  CHECK(depth2 < 570);
  CHECK(depth3 == 1000 - depth2);
  // Each activation ~ 333 +- 4 sigma (~60).
  for (int c : act_counts) {
    CHECK(c > 270);
    CHECK(c < 400);
  }
}

TEST_CASE("forward is deterministic and rejects dimension mismatch") {
  Rng rng(205);
  const PriorNetwork net = init_network(rng, 2);
  const std::vector<std::vector<double>> pts = {{0.1, 0.9}, {0.5, 0.5}};
  const auto o1 = net.forward(pts);
  const auto o2 = net.forward(pts);
  CHECK(o1 == o2);
  CHECK(o1.size() == 2);
  CHECK_THROWS_AS(net.forward({{0.1}}), std::invalid_argument);
}

TEST_CASE("calibrated columns pass KS against their targets") {
  Rng rng(207);
  const PriorNetwork net = init_network(rng, 3);
  std::vector<std::vector<double>> pts(512, std::vector<double>(3));
  for (auto& p : pts)
    for (double& x : p) x = rng.uniform01();
  const auto raw = net.forward(pts);
  const auto specs = build_marginals(0.2, 0.9);
  const auto cal = calibrate_marginals(raw, specs);

  for (int c = 0; c < kNumCurveParams; ++c) {
    std::vector<double> col(cal.columns.size());
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = cal.columns[i][c];
    const double d = testutil::ks_statistic(
        col, [&](double x) { return specs[c].cdf(x); });
    CHECK(d < testutil::ks_critical(col.size(), 0.01));
  }
  // Weight rows of the normalized view form a simplex.
  for (const auto& row : cal.normalized) {
    double sum = 0.0;
    for (int k = 0; k < kNumBasis; ++k) sum += row[2 + k];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("constant columns calibrate to the target median") {
  std::vector<std::array<double, kNumCurveParams>> raw(
      32, std::array<double, kNumCurveParams>{});
  for (auto& row : raw) row.fill(3.14);
  const auto specs = build_marginals(0.1, 1.0);
  const auto cal = calibrate_marginals(raw, specs);
  for (int c = 0; c < kNumCurveParams; ++c)
    for (const auto& row : cal.columns)
      CHECK(row[c] == doctest::Approx(specs[c].icdf(0.5)).epsilon(1e-12));
}

TEST_CASE("calibration preserves the ordering of a monotone raw column") {
  Rng rng(209);
  std::vector<std::array<double, kNumCurveParams>> raw(
      64, std::array<double, kNumCurveParams>{});
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (int c = 0; c < kNumCurveParams; ++c)
      raw[i][c] = static_cast<double>(i) + 0.1 * c;
  const auto specs = build_marginals(0.0, 1.0);
  const auto cal = calibrate_marginals(raw, specs);
  for (int c = 0; c < kNumCurveParams; ++c)
    for (std::size_t i = 1; i < raw.size(); ++i)
      REQUIRE(cal.columns[i][c] > cal.columns[i - 1][c]);
}

TEST_CASE("calibration requires at least 16 rows") {
  std::vector<std::array<double, kNumCurveParams>> raw(
      15, std::array<double, kNumCurveParams>{});
  CHECK_THROWS_AS(calibrate_marginals(raw, build_marginals(0.0, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("config_to_curve: identical lambdas produce identical parameters") {
  Rng rng(211);
  const TaskLatents tl{0.3, 0.8, 0.1, 0.3, 0.8, 20};
  const PriorNetwork net = init_network(rng, 2);
  const std::vector<std::vector<double>> lams = {
      {0.4, 0.6}, {0.4, 0.6}, {0.9, 0.1}};
  const auto cfgs = config_to_curve(tl, net, lams, 64, rng);
  REQUIRE(cfgs.size() == 3);
  CHECK(cfgs[0].y_inf == cfgs[1].y_inf);
  CHECK(cfgs[0].sigma == cfgs[1].sigma);
  CHECK(cfgs[0].weights == cfgs[1].weights);
  CHECK(cfgs[0].y_inf != cfgs[2].y_inf);
}

TEST_CASE("config_to_curve validates lambda bounds and dimension") {
  Rng rng(213);
  const TaskLatents tl{0.3, 0.8, 0.1, 0.3, 0.8, 20};
  const PriorNetwork net = init_network(rng, 2);
  CHECK_THROWS_AS(config_to_curve(tl, net, {{0.5, 1.5}}, 64, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_to_curve(tl, net, {{-0.1, 0.5}}, 64, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_to_curve(tl, net, {{0.5}}, 64, rng),
                  std::invalid_argument);
}

TEST_CASE("y_inf marginal matches U(y0, y_max) across configs") {
  Rng rng(217);
  const TaskLatents tl{0.25, 0.85, 0.1, 0.25, 0.85, 20};
  const PriorNetwork net = init_network(rng, 2);
  std::vector<std::vector<double>> lams(512, std::vector<double>(2));
  for (auto& l : lams)
    for (double& x : l) x = rng.uniform01();
  const auto cfgs = config_to_curve(tl, net, lams, 128, rng);
  std::vector<double> yinf(cfgs.size());
  for (std::size_t i = 0; i < cfgs.size(); ++i) yinf[i] = cfgs[i].y_inf;
  const double d = testutil::ks_statistic(yinf, [&](double x) {
    return std::min(1.0, std::max(0.0, (x - tl.y0) / (tl.y_max - tl.y0)));
  });
  CHECK(d < testutil::ks_critical(yinf.size(), 0.01));
}

TEST_CASE("nearby lambdas get closer curve parameters than random pairs") {
  Rng rng(219);
  const TaskLatents tl{0.2, 0.9, 0.1, 0.2, 0.9, 20};
  const PriorNetwork net = init_network(rng, 2);

  auto param_vec = [](const CurveConfig& c) {
    std::vector<double> v{c.sigma, c.y_inf};
    for (double w : c.weights) v.push_back(w);
    for (const auto& b : c.basis) {
      v.push_back(b.alpha);
      v.push_back(b.x_sat);
      v.push_back(b.y_sat);
      v.push_back(b.r_sat);
    }
    return v;
  };
  auto dist = [&](const CurveConfig& a, const CurveConfig& b) {
    const auto va = param_vec(a), vb = param_vec(b);
    double s = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i)
      s += (va[i] - vb[i]) * (va[i] - vb[i]);
    return std::sqrt(s);
  };

  double near_sum = 0.0, far_sum = 0.0;
  const int trials = 1000;
  std::vector<std::vector<double>> lams;
  lams.reserve(4 * trials);
  for (int i = 0; i < trials; ++i) {
    const double x0 = rng.uniform(0.01, 0.99), y0 = rng.uniform(0.01, 0.99);
    lams.push_back({x0, y0});
    lams.push_back({x0 + 5e-4, y0 + 5e-4});
    lams.push_back({rng.uniform01(), rng.uniform01()});
    lams.push_back({rng.uniform01(), rng.uniform01()});
  }
  const auto cfgs = config_to_curve(tl, net, lams, 128, rng);
  for (int i = 0; i < trials; ++i) {
    near_sum += dist(cfgs[4 * i], cfgs[4 * i + 1]);
    far_sum += dist(cfgs[4 * i + 2], cfgs[4 * i + 3]);
  }
  CHECK(near_sum < 0.5 * far_sum);
}

TEST_CASE("no-HPs variant draws parameters from the targets directly") {
  Rng rng(223);
  const TaskLatents tl{0.3, 0.7, 0.05, 0.3, 0.7, 20};
  const PriorNetwork net = init_network(rng, 2);
  std::vector<std::vector<double>> lams(400, std::vector<double>(2, 0.5));
  const auto cfgs = config_to_curve(tl, net, lams, 0, rng, /*no_hps=*/true);
  REQUIRE(cfgs.size() == 400);
  // Identical lambdas now produce distinct configs: lambda carries no signal.
  CHECK(cfgs[0].y_inf != cfgs[1].y_inf);
  std::vector<double> yinf;
  for (const auto& c : cfgs) {
    yinf.push_back(c.y_inf);
    REQUIRE(c.y_inf >= tl.y0);
    REQUIRE(c.y_inf <= tl.y_max);
    REQUIRE(c.sigma >= kSigmaMin);
    REQUIRE(c.sigma <= kSigmaMax);
  }
  const double d = testutil::ks_statistic(yinf, [&](double x) {
    return std::min(1.0, std::max(0.0, (x - tl.y0) / (tl.y_max - tl.y0)));
  });
  CHECK(d < testutil::ks_critical(yinf.size(), 0.01));
}
