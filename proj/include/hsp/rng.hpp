#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hsp {

/// Seeded random stream. All samplers in the library draw through this type so
/// that a (seed, stream) pair fully determines every result, independent of the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x5eedu};
    engine_.seed(seq);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Marsaglia polar method).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// log of a Ga(shape, 1) draw. Marsaglia-Tsang squeeze with the
  /// U^{1/shape} boost for shape < 1, kept in log space so that draws from very
  /// small shapes do not underflow.
  double log_gamma(double shape) {
    const bool boost = shape < 1.0;
    const double a = boost ? shape + 1.0 : shape;
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    double v, z;
    for (;;) {
      do {
        z = normal();
        v = 1.0 + c * z;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * z * z * z * z) break;
      if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) break;
    }
    double out = std::log(d * v);
    if (boost) out += std::log(uniform()) / shape;
    return out;
  }

  /// Ga(shape, rate) draw.
  double gamma(double shape, double rate = 1.0) {
    return std::exp(log_gamma(shape)) / rate;
  }

  double beta(double a, double b) {
    const double la = log_gamma(a);
    const double lb = log_gamma(b);
    const double m = std::max(la, lb);
    return std::exp(la - m) / (std::exp(la - m) + std::exp(lb - m));
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hsp
