#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ftbo/rng.hpp"
#include "ftbo/surrogate.hpp"

namespace ftbo {

/// One generalized multi-fidelity acquisition parameterization. The named
/// portfolio (mfpi-random, ei-one-step, ei-max, pi-max, mfpi-h<k>,
/// pi-random-horizon, pi-max-random-t) is expressed through these rules.
struct AcquisitionSpec {
  enum class Base { PI, EI };
  enum class Horizon { OneStep, AtMax, Fixed, Random };
  enum class Threshold { Incumbent, RandomScaled, Fixed };

  Base base = Base::PI;
  Horizon horizon = Horizon::Random;
  int fixed_horizon = 1;
  Threshold threshold = Threshold::RandomScaled;
  double fixed_threshold = 0.0;

  std::string name() const;
};

/// Random-scaled improvement threshold: T = f_best + 10^tau * (1 - f_best).
inline double mfpi_threshold(double f_best, double tau) {
  return f_best + std::pow(10.0, tau) * (1.0 - f_best);
}

/// Parses a registered acquisition name; throws std::invalid_argument with
/// the list of registered names on an unknown one.
AcquisitionSpec parse_acquisition(const std::string& name);

std::vector<std::string> registered_acquisitions();

/// A candidate configuration and its current learning-curve frontier.
struct Candidate {
  int config_id = 0;
  int frontier = 0;  // b_lambda, must be < b_max
};

/// Generalized multi-fidelity acquisition: draws horizon/threshold per the
/// spec's rules (once per call), scores every candidate at step
/// min(b_lambda + h, b_max) via PI (exceedance) or EI, and returns the
/// argmax candidate's config id with ties broken by lowest candidate index.
int generalized_af(const AcquisitionSpec& spec,
                   const std::vector<Candidate>& candidates,
                   const Surrogate& surrogate, const History& history,
                   int b_max, Rng& rng);

/// MFPI-random: PI with h ~ U{1..b_max} and T = f_best + 10^tau (1 - f_best),
/// tau ~ U(-4,-1), both drawn once per call.
int mfpi_random(const std::vector<Candidate>& candidates,
                const Surrogate& surrogate, const History& history, int b_max,
                Rng& rng);

}  // namespace ftbo
