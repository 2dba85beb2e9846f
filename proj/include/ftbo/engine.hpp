#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftbo/acquisition.hpp"
#include "ftbo/surrogate.hpp"

namespace ftbo {

inline constexpr const char* kEngineVersion = "ftbo-engine/1";

/// Deterministic tabular evaluation surface: the same (config, step) always
/// yields the same value.
class TaskOracle {
 public:
  virtual ~TaskOracle() = default;
  virtual double evaluate(int config_id, int step) const = 0;
  virtual int b_max() const = 0;
  virtual int n_configs() const = 0;
  virtual const std::vector<std::vector<double>>& lambdas() const = 0;
};

/// Oracle over an in-memory curve matrix.
class MatrixOracle : public TaskOracle {
 public:
  MatrixOracle(std::vector<std::vector<double>> curves,
               std::vector<std::vector<double>> lambdas)
      : curves_(std::move(curves)), lambdas_(std::move(lambdas)) {}

  double evaluate(int config_id, int step) const override {
    return curves_.at(config_id).at(step - 1);
  }
  int b_max() const override {
    return curves_.empty() ? 0 : static_cast<int>(curves_.front().size());
  }
  int n_configs() const override { return static_cast<int>(curves_.size()); }
  const std::vector<std::vector<double>>& lambdas() const override {
    return lambdas_;
  }

 private:
  std::vector<std::vector<double>> curves_;
  std::vector<std::vector<double>> lambdas_;
};

struct TraceStep {
  int iter = 0;       // 1-based
  int config_id = 0;
  int step = 0;       // cumulative step b of that config
  double y = 0.0;
  double incumbent = 0.0;
};

/// Ordered record of one HPO run, with everything needed for exact resume:
/// final RNG state, scheduler state, and the resolved parameters.
struct RunTrace {
  std::string algorithm;
  std::uint64_t seed = 0;
  int budget = 0;
  int unit_step = 1;
  bool truncated = false;
  std::vector<TraceStep> steps;
  std::string rng_state;
  nlohmann::json scheduler_state;
  nlohmann::json params;  // algorithm parameters (eta, acquisition, ...)
  std::string engine_version = kEngineVersion;

  /// Best observed (config, step, y); ties prefer higher step, then lower id.
  TraceStep best() const;
};

struct FtboOptions {
  InferenceConfig inference;
  AcquisitionSpec acquisition = parse_acquisition("mfpi-random");
};

RunTrace run_ftbo(const TaskOracle& oracle, const FtboOptions& options,
                  int budget, std::uint64_t seed);

RunTrace run_random_search(const TaskOracle& oracle, int budget,
                           std::uint64_t seed);

RunTrace run_hyperband(const TaskOracle& oracle, int budget, int eta,
                       std::uint64_t seed);

/// Resumes a finished trace for additional_budget more steps. Bit-identical
/// to a fresh run with the combined budget and the same seed. Refuses traces
/// from a different engine version or with a corrupted RNG state field.
RunTrace continue_run(const TaskOracle& oracle, const RunTrace& trace,
                      int additional_budget);

// --- trace serialization ----------------------------------------------------

void write_trace_csv(const RunTrace& trace, const std::string& path);
void write_trace_sidecar(const RunTrace& trace, const std::string& path);
RunTrace load_trace(const std::string& csv_path,
                    const std::string& sidecar_path);

}  // namespace ftbo
