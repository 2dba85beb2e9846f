#include "ftbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ftbo {

std::string AcquisitionSpec::name() const {
  if (base == Base::PI && horizon == Horizon::Random &&
      threshold == Threshold::RandomScaled)
    return "mfpi-random";
  if (base == Base::EI && horizon == Horizon::OneStep) return "ei-one-step";
  if (base == Base::EI && horizon == Horizon::AtMax) return "ei-max";
  if (base == Base::PI && horizon == Horizon::AtMax &&
      threshold == Threshold::Incumbent)
    return "pi-max";
  if (base == Base::PI && horizon == Horizon::Fixed &&
      threshold == Threshold::RandomScaled)
    return "mfpi-h" + std::to_string(fixed_horizon);
  if (base == Base::PI && horizon == Horizon::Random &&
      threshold == Threshold::Incumbent)
    return "pi-random-horizon";
  if (base == Base::PI && horizon == Horizon::AtMax &&
      threshold == Threshold::RandomScaled)
    return "pi-max-random-t";
  return "custom";
}

std::vector<std::string> registered_acquisitions() {
  return {"mfpi-random",       "ei-one-step",  "ei-max",         "pi-max",
          "mfpi-h<k>",         "pi-random-horizon", "pi-max-random-t"};
}

AcquisitionSpec parse_acquisition(const std::string& name) {
  AcquisitionSpec s;
  if (name == "mfpi-random") {
    s = {AcquisitionSpec::Base::PI, AcquisitionSpec::Horizon::Random, 1,
         AcquisitionSpec::Threshold::RandomScaled, 0.0};
  } else if (name == "ei-one-step") {
    s = {AcquisitionSpec::Base::EI, AcquisitionSpec::Horizon::OneStep, 1,
         AcquisitionSpec::Threshold::Incumbent, 0.0};
  } else if (name == "ei-max") {
    s = {AcquisitionSpec::Base::EI, AcquisitionSpec::Horizon::AtMax, 1,
         AcquisitionSpec::Threshold::Incumbent, 0.0};
  } else if (name == "pi-max") {
    s = {AcquisitionSpec::Base::PI, AcquisitionSpec::Horizon::AtMax, 1,
         AcquisitionSpec::Threshold::Incumbent, 0.0};
  } else if (name.rfind("mfpi-h", 0) == 0 && name.size() > 6) {
    int k = 0;
    try {
      k = std::stoi(name.substr(6));
    } catch (const std::exception&) {
      k = 0;
    }
    if (k < 1) {
      std::ostringstream oss;
      oss << "unknown acquisition '" << name << "'; registered:";
      for (const auto& n : registered_acquisitions()) oss << " " << n;
      throw std::invalid_argument(oss.str());
    }
    s = {AcquisitionSpec::Base::PI, AcquisitionSpec::Horizon::Fixed, k,
         AcquisitionSpec::Threshold::RandomScaled, 0.0};
  } else if (name == "pi-random-horizon") {
    s = {AcquisitionSpec::Base::PI, AcquisitionSpec::Horizon::Random, 1,
         AcquisitionSpec::Threshold::Incumbent, 0.0};
  } else if (name == "pi-max-random-t") {
    s = {AcquisitionSpec::Base::PI, AcquisitionSpec::Horizon::AtMax, 1,
         AcquisitionSpec::Threshold::RandomScaled, 0.0};
  } else {
    std::ostringstream oss;
    oss << "unknown acquisition '" << name << "'; registered:";
    for (const auto& n : registered_acquisitions()) oss << " " << n;
    throw std::invalid_argument(oss.str());
  }
  return s;
}

int generalized_af(const AcquisitionSpec& spec,
                   const std::vector<Candidate>& candidates,
                   const Surrogate& surrogate, const History& history,
                   int b_max, Rng& rng) {
  if (candidates.empty())
    throw std::invalid_argument("acquisition: empty candidate set");

  const double f_best = history.best_y();

  // Horizon and threshold are drawn once per call.
  int h = 1;
  bool at_max = false;
  switch (spec.horizon) {
    case AcquisitionSpec::Horizon::OneStep:
      h = 1;
      break;
    case AcquisitionSpec::Horizon::AtMax:
      at_max = true;
      break;
    case AcquisitionSpec::Horizon::Fixed:
      h = spec.fixed_horizon;
      break;
    case AcquisitionSpec::Horizon::Random:
      h = static_cast<int>(rng.uniform_int(1, b_max));
      break;
  }
  double T = f_best;
  switch (spec.threshold) {
    case AcquisitionSpec::Threshold::Incumbent:
      T = f_best;
      break;
    case AcquisitionSpec::Threshold::RandomScaled: {
      const double tau = rng.uniform(-4.0, -1.0);
      T = mfpi_threshold(f_best, tau);
      break;
    }
    case AcquisitionSpec::Threshold::Fixed:
      T = spec.fixed_threshold;
      break;
  }

  std::vector<Query> queries;
  queries.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.frontier >= b_max)
      throw std::invalid_argument(
          "acquisition: fully trained candidate cannot be thawed");
    const int step = at_max ? b_max : std::min(c.frontier + h, b_max);
    queries.push_back({c.config_id, step});
  }

  const std::vector<double> scores =
      spec.base == AcquisitionSpec::Base::PI
          ? surrogate.exceedance_scores(history, queries, T)
          : surrogate.ei_scores(history, queries, f_best);

  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return candidates[best].config_id;
}

int mfpi_random(const std::vector<Candidate>& candidates,
                const Surrogate& surrogate, const History& history, int b_max,
                Rng& rng) {
  return generalized_af(parse_acquisition("mfpi-random"), candidates,
                        surrogate, history, b_max, rng);
}

}  // namespace ftbo
