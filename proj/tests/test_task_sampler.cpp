#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ftbo/task_sampler.hpp"
#include "test_util.hpp"

using namespace ftbo;

TEST_CASE("sample_task is deterministic given the seed") {
  Rng a(301), b(301);
  const SyntheticTask ta = sample_task(a, 20, 1, 5, 10, 50);
  const SyntheticTask tb = sample_task(b, 20, 1, 5, 10, 50);
  CHECK(ta.m == tb.m);
  CHECK(ta.latents.b_max == tb.latents.b_max);
  CHECK(ta.lambdas == tb.lambdas);
  CHECK(ta.curves == tb.curves);
  CHECK(ta.mean_curves == tb.mean_curves);
}

TEST_CASE("sample_task produces a bounded rectangular curve matrix") {
  Rng rng(303);
  const SyntheticTask t = sample_task(rng, 50, 2, 2, 25, 25);
  REQUIRE(t.curves.size() == 50);
  REQUIRE(t.latents.b_max == 25);
  for (const auto& row : t.curves) {
    REQUIRE(row.size() == 25);
    for (double y : row) {
      REQUIRE(y >= 0.0);
      REQUIRE(y <= 1.0);
    }
  }
  for (const auto& lam : t.lambdas) {
    REQUIRE(lam.size() == 2);
    for (double x : lam) {
      REQUIRE(x >= 0.0);
      REQUIRE(x <= 1.0);
    }
  }
}

TEST_CASE("sample_task validates its ranges") {
  Rng rng(305);
  CHECK_THROWS_AS(sample_task(rng, 0, 1, 2, 10, 20), std::invalid_argument);
  CHECK_THROWS_AS(sample_task(rng, 1001, 1, 2, 10, 20), std::invalid_argument);
  CHECK_THROWS_AS(sample_task(rng, 10, 0, 2, 10, 20), std::invalid_argument);
  CHECK_THROWS_AS(sample_task(rng, 10, 1, 11, 10, 20), std::invalid_argument);
}

TEST_CASE("task b_max follows the log-uniform marginal") {
  Rng rng(307);
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i)
    xs.push_back(
        static_cast<double>(sample_task(rng, 2, 1, 1, 1, 1000).latents.b_max));
  const double d = testutil::ks_statistic(xs, [](double x) {
    const double hi = std::min(x + 0.5, 1000.0);
    return std::log(std::max(hi, 1.0)) / std::log(1000.0);
  });
  CHECK(d < testutil::ks_critical(xs.size(), 0.01));
}

TEST_CASE("allocate_budgets conserves the draw count") {
  Rng rng(311);
  SUBCASE("single config receives everything") {
    const auto counts = allocate_budgets({1.0}, 7, nullptr, rng);
    CHECK(counts == std::vector<int>{7});
  }
  SUBCASE("uniform weights concentrate multinomially") {
    const std::vector<double> w(4, 0.25);
    const auto counts = allocate_budgets(w, 40000, nullptr, rng);
    int total = 0;
    for (int c : counts) {
      total += c;
      // 10^4 +- 3 sigma, sigma = sqrt(4e4 * 0.25 * 0.75) ~ 86.6
      CHECK(c > 10000 - 260);
      CHECK(c < 10000 + 260);
    }
    CHECK(total == 40000);
  }
  SUBCASE("caps are respected and capacity overflow throws") {
    const std::vector<double> w = {0.9, 0.05, 0.05};
    const std::vector<int> caps = {2, 5, 5};
    const auto counts = allocate_budgets(w, 10, &caps, rng);
    int total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      total += counts[i];
      CHECK(counts[i] <= caps[i]);
    }
    CHECK(total == 10);
    CHECK_THROWS_AS(allocate_budgets(w, 13, &caps, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("tiny Dirichlet concentration yields depth-first allocations") {
  Rng rng(313);
  std::vector<double> nonzero_counts;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto w = rng.dirichlet_symmetric(1e-4, 50);
    const auto counts = allocate_budgets(w, 100, nullptr, rng);
    int nz = 0;
    for (int c : counts) nz += c > 0 ? 1 : 0;
    nonzero_counts.push_back(static_cast<double>(nz));
  }
  std::nth_element(nonzero_counts.begin(),
                   nonzero_counts.begin() + nonzero_counts.size() / 2,
                   nonzero_counts.end());
  CHECK(nonzero_counts[nonzero_counts.size() / 2] <= 5.0);
}

TEST_CASE("context splits satisfy budget conservation and target bounds") {
  Rng rng(317);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 20, b_max = 15;
    const int train = static_cast<int>(rng.uniform_int(0, 100));
    const int test = static_cast<int>(rng.uniform_int(1, 30));
    const ContextSplit split = sample_context_split(n, b_max, train, test, rng);
    REQUIRE(split.train_budgets.size() == static_cast<std::size_t>(n));
    CHECK(std::accumulate(split.train_budgets.begin(),
                          split.train_budgets.end(), 0) == train);
    REQUIRE(split.test.size() == static_cast<std::size_t>(test));
    for (const auto& [cfg, step] : split.test) {
      REQUIRE(cfg >= 0);
      REQUIRE(cfg < n);
      const int b_lambda = split.train_budgets[cfg];
      REQUIRE(step >= std::max(1, b_lambda));
      REQUIRE(step <= b_max);
    }
    CHECK(split.dirichlet_alpha >= 1e-4);
    CHECK(split.dirichlet_alpha <= 1e-1);
  }
}

TEST_CASE("cold-start split: empty train, targets across the full range") {
  Rng rng(319);
  const ContextSplit split = sample_context_split(10, 12, 0, 40, rng);
  for (int b : split.train_budgets) CHECK(b == 0);
  for (const auto& [cfg, step] : split.test) {
    CHECK(step >= 1);
    CHECK(step <= 12);
  }
}

TEST_CASE("infeasible split sizes are rejected") {
  Rng rng(323);
  CHECK_THROWS_AS(sample_context_split(2, 3, 5, 2, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_context_split(2, 3, -1, 2, rng),
                  std::invalid_argument);
}

TEST_CASE("test targets are uniform on {b_lambda..b_max}") {
  Rng rng(329);
  // One config forces b_lambda = 5; targets must be uniform on {5..10}.
  std::vector<double> counts(6, 0.0);
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    const ContextSplit split = sample_context_split(1, 10, 5, 1, rng);
    REQUIRE(split.train_budgets[0] == 5);
    const int step = split.test[0].second;
    REQUIRE(step >= 5);
    REQUIRE(step <= 10);
    counts[step - 5] += 1.0;
  }
  const std::vector<double> expected(6, trials / 6.0);
  // chi-square(5) critical value at 0.99
  CHECK(testutil::chi_square(counts, expected) < 15.09);
}
