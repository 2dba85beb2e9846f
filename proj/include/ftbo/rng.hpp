#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftbo {

/// Seeded, serializable random source (xoshiro256++ core).
///
/// All sampling in the project goes through this class so that results are
/// bit-stable across platforms and runs, and so RNG state can be embedded in
/// run traces for exact resume. std:: distributions are avoided on purpose:
/// their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
  }

  /// Stable mixing of several values into one seed (used to derive
  /// per-(task, algorithm, repetition) streams from a master seed).
  static std::uint64_t mix(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (std::uint64_t p : parts) {
      std::uint64_t x = p + h;
      h ^= splitmix64(x) + (h << 6) + (h >> 2);
    }
    return h;
  }

  static std::uint64_t hash_str(const std::string& s) {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0,1); never returns an exact endpoint.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer on [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    // Rejection sampling for an unbiased draw.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % span);
  }

  /// Log-uniform on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  /// Standard normal via Box-Muller; the companion value is discarded so the
  /// generator carries no hidden state across serialization.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential() { return -std::log1p(-uniform01()); }

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape >= 0.02 or so stays accurate.
  double gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// log of a Gamma(shape,1) draw; stays finite for shapes as small as 1e-4,
  /// where the draw itself underflows to zero.
  double log_gamma_draw(double shape) {
    if (shape >= 1.0) return std::log(gamma(shape));
    const double g = gamma(shape + 1.0);
    return std::log(g) + std::log(uniform01()) / shape;
  }

  /// Dirichlet(alpha, ..., alpha) over n categories; exact in log-space, so
  /// tiny concentrations (alpha ~ 1e-4) produce valid one-hot-like weights.
  std::vector<double> dirichlet_symmetric(double alpha, std::size_t n) {
    std::vector<double> lg(n);
    double mx = -1e300;
    for (auto& v : lg) {
      v = log_gamma_draw(alpha);
      mx = std::max(mx, v);
    }
    double sum = 0.0;
    for (auto& v : lg) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (auto& v : lg) v /= sum;
    return lg;
  }

  std::string state_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint64_t w : state_)
      for (int i = 15; i >= 0; --i) out.push_back(digits[(w >> (4 * i)) & 0xf]);
    return out;
  }

  void set_state_hex(const std::string& hex) {
    if (hex.size() != 64) throw std::invalid_argument("rng state: bad length");
    for (int w = 0; w < 4; ++w) {
      std::uint64_t v = 0;
      for (int i = 0; i < 16; ++i) {
        const char c = hex[16 * w + i];
        int d;
        if (c >= '0' && c <= '9')
          d = c - '0';
        else if (c >= 'a' && c <= 'f')
          d = c - 'a' + 10;
        else
          throw std::invalid_argument("rng state: bad hex digit");
        v = (v << 4) | static_cast<std::uint64_t>(d);
      }
      state_[w] = v;
    }
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace ftbo
