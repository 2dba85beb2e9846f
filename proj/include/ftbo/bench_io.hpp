#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ftbo/task_sampler.hpp"

namespace ftbo {

struct HpSpec {
  std::string name;
  double low = 0.0;
  double high = 1.0;
  bool log = false;  // min-max normalize in log space
};

/// Synthetic-task provenance carried through benchmark files so tasks
/// round-trip their seed and latents.
struct SyntheticMeta {
  std::uint64_t seed = 0;
  double u1 = 0, u2 = 0, u3 = 0;
  double y0 = 0, y_max = 1;
};

/// A tabular learning-curve benchmark. After ingestion all curve values lie
/// in [0,1] with direction maximize; raw values and bounds are kept for
/// round-tripping.
struct TabularBenchmark {
  std::string name;
  int b_max = 1;
  bool raw_maximize = true;  // declared direction of the raw metric
  double metric_low = 0.0;
  double metric_high = 1.0;
  std::vector<HpSpec> hps;
  std::vector<std::vector<double>> configs_raw;  // as stored in the file
  std::vector<std::vector<double>> configs;      // normalized to [0,1]
  std::vector<std::vector<double>> curves_raw;   // as stored in the file
  std::vector<std::vector<double>> curves;       // normalized, maximize
  std::optional<SyntheticMeta> synthetic;
};

/// Structured ingestion failure with file location context.
struct BenchParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ingestion-time clamping of unbounded losses. When enabled, raw curve
/// values are clamped before the metric-bound validation: non-finite values
/// and values above the bound are replaced by it. With no explicit upper
/// the default rule applies (median of step-1 values across configs).
struct LoadOptions {
  bool clamp = false;
  double clamp_upper = std::numeric_limits<double>::quiet_NaN();  // NaN: default rule
};

/// Loads a benchmark. JSON schema: {name, b_max, direction, metric:{low,high},
/// hps:[{name,low,high,log}], configs:[[...]], curves:[[...]]}. A ".csv" path
/// loads the row-per-(config_id,step,y) variant with a sibling
/// "<path>.manifest.json" carrying everything but the curves.
TabularBenchmark load_benchmark(const std::string& path,
                                const LoadOptions& options = {});

/// Canonical JSON writer: fixed key order, floats at 9 significant digits,
/// byte-identical for equal objects.
void write_benchmark(const TabularBenchmark& bench, const std::string& path);

/// Writes the CSV variant: `<path>` gets config_id,step,y rows and
/// `<path>.manifest.json` the manifest.
void write_benchmark_csv(const TabularBenchmark& bench,
                         const std::string& path);

TabularBenchmark from_synthetic(const SyntheticTask& task,
                                const std::string& name);

/// Replaces non-finite values and values above `upper` with `upper`,
/// in the raw (pre-normalization) curve matrix.
void clamp_unbounded_losses(std::vector<std::vector<double>>& curves,
                            double upper);

/// Default clamp bound: the median of step-1 values across configs.
double default_clamp_upper(const std::vector<std::vector<double>>& curves);

}  // namespace ftbo
