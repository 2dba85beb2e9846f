#include "ftbo/bench_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ftbo/mathutil.hpp"

namespace ftbo {

namespace {

using nlohmann::json;

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Canonical emitter: fixed key order and %.9g floats, so equal objects
// always serialize to identical bytes (nlohmann's float printing is
// shortest-round-trip, which is not stable across canonicalization passes).
class Emitter {
 public:
  explicit Emitter(std::ostream& os) : os_(os) {}

  void key(const std::string& k) {
    sep();
    os_ << '"' << k << "\":";
    fresh_ = true;
  }
  void begin_obj() { token("{"); }
  void end_obj() {
    os_ << '}';
    fresh_ = false;
  }
  void begin_arr() { token("["); }
  void end_arr() {
    os_ << ']';
    fresh_ = false;
  }
  void num(double v) {
    sep();
    os_ << fmt9(v);
  }
  void num(long long v) {
    sep();
    os_ << v;
  }
  void str(const std::string& s) {
    sep();
    os_ << '"';
    for (char c : s) {
      if (c == '"' || c == '\\') os_ << '\\';
      os_ << c;
    }
    os_ << '"';
  }
  void boolean(bool b) {
    sep();
    os_ << (b ? "true" : "false");
  }
  void row(const std::vector<double>& v) {
    begin_arr();
    for (double x : v) num(x);
    end_arr();
  }

 private:
  void token(const char* t) {
    sep();
    os_ << t;
    fresh_ = true;
  }
  void sep() {
    if (!fresh_) os_ << ',';
    fresh_ = false;
  }
  std::ostream& os_;
  bool fresh_ = true;
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw BenchParseError(path + ": " + what);
}

double require_number(const json& j, const std::string& path,
                      const std::string& where) {
  if (!j.is_number()) fail(path, where + ": expected a number");
  return j.get<double>();
}

void emit_manifest_body(Emitter& e, const TabularBenchmark& b) {
  e.key("b_max");
  e.num(static_cast<long long>(b.b_max));
  e.key("configs");
  e.begin_arr();
  for (const auto& row : b.configs_raw) e.row(row);
  e.end_arr();
  e.key("direction");
  e.str(b.raw_maximize ? "maximize" : "minimize");
  e.key("hps");
  e.begin_arr();
  for (const auto& hp : b.hps) {
    e.begin_obj();
    e.key("high");
    e.num(hp.high);
    e.key("log");
    e.boolean(hp.log);
    e.key("low");
    e.num(hp.low);
    e.key("name");
    e.str(hp.name);
    e.end_obj();
  }
  e.end_arr();
  e.key("metric");
  e.begin_obj();
  e.key("high");
  e.num(b.metric_high);
  e.key("low");
  e.num(b.metric_low);
  e.end_obj();
  e.key("name");
  e.str(b.name);
  if (b.synthetic) {
    const SyntheticMeta& s = *b.synthetic;
    e.key("synthetic");
    e.begin_obj();
    e.key("seed");
    e.num(static_cast<long long>(s.seed));
    e.key("u1");
    e.num(s.u1);
    e.key("u2");
    e.num(s.u2);
    e.key("u3");
    e.num(s.u3);
    e.key("y0");
    e.num(s.y0);
    e.key("y_max");
    e.num(s.y_max);
    e.end_obj();
  }
}

void parse_manifest(const json& j, const std::string& path,
                    TabularBenchmark& b) {
  if (!j.is_object()) fail(path, "top level must be an object");
  for (const char* k : {"name", "b_max", "direction", "metric", "hps",
                        "configs"})
    if (!j.contains(k)) fail(path, std::string("missing field '") + k + "'");

  b.name = j.at("name").get<std::string>();
  b.b_max = j.at("b_max").get<int>();
  if (b.b_max < 1) fail(path, "b_max must be >= 1");
  const std::string dir = j.at("direction").get<std::string>();
  if (dir == "maximize")
    b.raw_maximize = true;
  else if (dir == "minimize")
    b.raw_maximize = false;
  else
    fail(path, "direction must be 'maximize' or 'minimize', got '" + dir + "'");

  const json& metric = j.at("metric");
  if (!metric.is_object() || !metric.contains("low") ||
      !metric.contains("high"))
    fail(path, "metric must declare bounds {low, high}");
  b.metric_low = require_number(metric.at("low"), path, "metric.low");
  b.metric_high = require_number(metric.at("high"), path, "metric.high");
  if (!(b.metric_high > b.metric_low))
    fail(path, "metric bounds degenerate: high must exceed low");

  const json& hps = j.at("hps");
  if (!hps.is_array() || hps.empty()) fail(path, "hps must be a nonempty array");
  if (hps.size() > static_cast<std::size_t>(kMaxHpDim))
    fail(path, "more than " + std::to_string(kMaxHpDim) + " hyperparameters");
  for (std::size_t i = 0; i < hps.size(); ++i) {
    const json& h = hps[i];
    const std::string where = "hps[" + std::to_string(i) + "]";
    if (!h.is_object()) fail(path, where + ": expected an object");
    for (const char* k : {"name", "low", "high"})
      if (!h.contains(k))
        fail(path, where + ": missing bound field '" + k + "'");
    HpSpec spec;
    spec.name = h.at("name").get<std::string>();
    spec.low = require_number(h.at("low"), path, where + ".low");
    spec.high = require_number(h.at("high"), path, where + ".high");
    spec.log = h.value("log", false);
    if (!(spec.high > spec.low))
      fail(path, where + ": bounds degenerate (high <= low)");
    if (spec.log && spec.low <= 0.0)
      fail(path, where + ": log-scaled bounds must be positive");
    b.hps.push_back(spec);
  }

  const json& configs = j.at("configs");
  if (!configs.is_array()) fail(path, "configs must be an array");
  for (std::size_t r = 0; r < configs.size(); ++r) {
    const json& row = configs[r];
    if (!row.is_array() || row.size() != b.hps.size())
      fail(path, "configs row " + std::to_string(r) + ": expected " +
                     std::to_string(b.hps.size()) + " values");
    std::vector<double> vals(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      vals[c] = require_number(row[c], path,
                               "configs[" + std::to_string(r) + "][" +
                                   std::to_string(c) + "]");
      if (vals[c] < b.hps[c].low || vals[c] > b.hps[c].high)
        fail(path, "configs row " + std::to_string(r) + ", column " +
                       std::to_string(c) + " ('" + b.hps[c].name +
                       "'): value " + fmt9(vals[c]) +
                       " outside declared bounds [" + fmt9(b.hps[c].low) +
                       ", " + fmt9(b.hps[c].high) + "]");
    }
    b.configs_raw.push_back(std::move(vals));
  }

  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    SyntheticMeta m;
    m.seed = s.at("seed").get<std::uint64_t>();
    m.u1 = s.at("u1").get<double>();
    m.u2 = s.at("u2").get<double>();
    m.u3 = s.at("u3").get<double>();
    m.y0 = s.at("y0").get<double>();
    m.y_max = s.at("y_max").get<double>();
    b.synthetic = m;
  }
}

void apply_clamp(TabularBenchmark& b, const LoadOptions& options,
                 const std::string& path) {
  if (!options.clamp) return;
  double upper = options.clamp_upper;
  if (std::isnan(upper)) {
    try {
      upper = default_clamp_upper(b.curves_raw);
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  if (!std::isfinite(upper)) fail(path, "clamp bound must be finite");
  clamp_unbounded_losses(b.curves_raw, upper);
}

void check_and_normalize(TabularBenchmark& b, const std::string& path) {
  // Curve matrix must be rectangular |configs| x b_max with every value
  // inside the declared metric bounds.
  if (b.curves_raw.size() != b.configs_raw.size())
    fail(path, "curves has " + std::to_string(b.curves_raw.size()) +
                   " rows but configs has " +
                   std::to_string(b.configs_raw.size()));
  for (std::size_t r = 0; r < b.curves_raw.size(); ++r) {
    if (b.curves_raw[r].size() != static_cast<std::size_t>(b.b_max))
      fail(path, "curves row " + std::to_string(r) + ": expected b_max=" +
                     std::to_string(b.b_max) + " values, got " +
                     std::to_string(b.curves_raw[r].size()));
    for (std::size_t c = 0; c < b.curves_raw[r].size(); ++c) {
      const double y = b.curves_raw[r][c];
      if (!std::isfinite(y) || y < b.metric_low || y > b.metric_high)
        fail(path, "curves row " + std::to_string(r) + ", column " +
                       std::to_string(c) + ": value " + fmt9(y) +
                       " outside declared metric bounds [" +
                       fmt9(b.metric_low) + ", " + fmt9(b.metric_high) + "]");
    }
  }

  b.configs.clear();
  b.configs.reserve(b.configs_raw.size());
  for (const auto& raw : b.configs_raw) {
    std::vector<double> norm(raw.size());
    for (std::size_t c = 0; c < raw.size(); ++c) {
      const HpSpec& hp = b.hps[c];
      double v = raw[c], lo = hp.low, hi = hp.high;
      if (hp.log) {
        v = std::log(v);
        lo = std::log(hp.low);
        hi = std::log(hp.high);
      }
      norm[c] = clamp01((v - lo) / (hi - lo));
    }
    b.configs.push_back(std::move(norm));
  }

  const double span = b.metric_high - b.metric_low;
  b.curves.clear();
  b.curves.reserve(b.curves_raw.size());
  for (const auto& raw : b.curves_raw) {
    std::vector<double> norm(raw.size());
    for (std::size_t c = 0; c < raw.size(); ++c) {
      const double y = (raw[c] - b.metric_low) / span;
      norm[c] = clamp01(b.raw_maximize ? y : 1.0 - y);
    }
    b.curves.push_back(std::move(norm));
  }
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

TabularBenchmark load_json(const std::string& path,
                           const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(path, std::string("invalid JSON: ") + e.what());
  }
  TabularBenchmark b;
  parse_manifest(j, path, b);
  if (!j.contains("curves")) fail(path, "missing field 'curves'");
  const json& curves = j.at("curves");
  if (!curves.is_array()) fail(path, "curves must be an array");
  for (std::size_t r = 0; r < curves.size(); ++r) {
    const json& row = curves[r];
    if (!row.is_array())
      fail(path, "curves row " + std::to_string(r) + ": expected an array");
    std::vector<double> vals(row.size());
    for (std::size_t c = 0; c < row.size(); ++c)
      vals[c] = require_number(row[c], path,
                               "curves[" + std::to_string(r) + "][" +
                                   std::to_string(c) + "]");
    b.curves_raw.push_back(std::move(vals));
  }
  apply_clamp(b, options, path);
  check_and_normalize(b, path);
  return b;
}

TabularBenchmark load_csv(const std::string& path,
                          const LoadOptions& options) {
  const std::string manifest_path = path + ".manifest.json";
  std::ifstream min(manifest_path);
  if (!min) fail(manifest_path, "cannot open manifest file");
  json j;
  try {
    min >> j;
  } catch (const json::exception& e) {
    fail(manifest_path, std::string("invalid JSON: ") + e.what());
  }
  TabularBenchmark b;
  parse_manifest(j, manifest_path, b);

  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  b.curves_raw.assign(b.configs_raw.size(),
                      std::vector<double>(b.b_max,
                                          std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::vector<bool>> seen(
      b.configs_raw.size(), std::vector<bool>(b.b_max, false));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("config_id", 0) == 0) continue;
    int id = 0, step = 0;
    double y = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lg", &id, &step, &y) != 3)
      fail(path, "line " + std::to_string(line_no) + ": malformed row '" +
                     line + "'");
    if (id < 0 || id >= static_cast<int>(b.configs_raw.size()))
      fail(path, "line " + std::to_string(line_no) + ": config_id " +
                     std::to_string(id) + " out of range");
    if (step < 1 || step > b.b_max)
      fail(path, "line " + std::to_string(line_no) + ": step " +
                     std::to_string(step) + " outside 1.." +
                     std::to_string(b.b_max));
    if (seen[id][step - 1])
      fail(path, "line " + std::to_string(line_no) + ": duplicate (" +
                     std::to_string(id) + ", " + std::to_string(step) + ")");
    seen[id][step - 1] = true;
    b.curves_raw[id][step - 1] = y;
  }
  for (std::size_t r = 0; r < seen.size(); ++r)
    for (int c = 0; c < b.b_max; ++c)
      if (!seen[r][c])
        fail(path, "missing value for config " + std::to_string(r) +
                       ", step " + std::to_string(c + 1));
  apply_clamp(b, options, path);
  check_and_normalize(b, path);
  return b;
}

}  // namespace

TabularBenchmark load_benchmark(const std::string& path,
                                const LoadOptions& options) {
  if (has_suffix(path, ".csv")) return load_csv(path, options);
  return load_json(path, options);
}

void write_benchmark(const TabularBenchmark& bench, const std::string& path) {
  std::ostringstream body;
  Emitter e(body);
  e.begin_obj();
  emit_manifest_body(e, bench);
  e.key("curves");
  e.begin_arr();
  for (const auto& row : bench.curves_raw) e.row(row);
  e.end_arr();
  e.end_obj();
  body << '\n';
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body.str();
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_benchmark_csv(const TabularBenchmark& bench,
                         const std::string& path) {
  {
    std::ostringstream body;
    Emitter e(body);
    e.begin_obj();
    emit_manifest_body(e, bench);
    e.end_obj();
    body << '\n';
    std::ofstream out(path + ".manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path + ".manifest.json");
    out << body.str();
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "config_id,step,y\n";
  for (std::size_t r = 0; r < bench.curves_raw.size(); ++r)
    for (std::size_t c = 0; c < bench.curves_raw[r].size(); ++c)
      out << r << ',' << (c + 1) << ',' << fmt9(bench.curves_raw[r][c])
          << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

TabularBenchmark from_synthetic(const SyntheticTask& task,
                                const std::string& name) {
  TabularBenchmark b;
  b.name = name;
  b.b_max = task.latents.b_max;
  b.raw_maximize = true;
  b.metric_low = 0.0;
  b.metric_high = 1.0;
  for (int d = 0; d < task.m; ++d)
    b.hps.push_back({"x" + std::to_string(d + 1), 0.0, 1.0, false});
  b.configs_raw = task.lambdas;
  b.curves_raw = task.curves;
  SyntheticMeta meta;
  meta.seed = task.seed;
  meta.u1 = task.latents.u1;
  meta.u2 = task.latents.u2;
  meta.u3 = task.latents.u3;
  meta.y0 = task.latents.y0;
  meta.y_max = task.latents.y_max;
  b.synthetic = meta;
  check_and_normalize(b, name);
  return b;
}

void clamp_unbounded_losses(std::vector<std::vector<double>>& curves,
                            double upper) {
  if (!std::isfinite(upper))
    throw std::invalid_argument("clamp bound must be finite");
  for (auto& row : curves)
    for (double& y : row)
      if (!std::isfinite(y) || y > upper) y = upper;
}

double default_clamp_upper(const std::vector<std::vector<double>>& curves) {
  std::vector<double> firsts;
  firsts.reserve(curves.size());
  for (const auto& row : curves)
    if (!row.empty() && std::isfinite(row.front()))
      firsts.push_back(row.front());
  if (firsts.empty())
    throw std::invalid_argument("no finite step-1 values to take a median of");
  return median(firsts);
}

}  // namespace ftbo
