#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cylint {

// splitmix64 finalizer; stateless avalanche of a 64-bit word.
inline std::uint64_t hash64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based seed derivation: the child stream for a given
// (replica, step, coordinate) triple is independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = hash64(master);
  h = hash64(h ^ (a + 0xA0761D6478BD642Full));
  h = hash64(h ^ (b + 0xE7037ED1A0B428DBull));
  h = hash64(h ^ (c + 0x8EBC6AF09C88C6E3ull));
  return h;
}

// Small explicit-state generator (splitmix64 stream). All samplers below
// are written out by hand so that outputs are identical across platforms
// and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform on (0,1); never returns 0 or 1
  double uniform() {
    for (;;) {
      double x = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
      if (x > 0.0) return x;
    }
  }

  double exponential() { return -std::log(uniform()); }

  // Box-Muller; one gaussian per call, no state carried between calls
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // exact Poisson via Knuth's product method, chunked for large means
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 500.0) {
      total += poisson_knuth(500.0);
      mean -= 500.0;
    }
    return total + poisson_knuth(mean);
  }

  // symmetric alpha-stable, cf exp(-|u|^alpha), alpha in (0,2]
  // (Chambers-Mallows-Stuck)
  double symmetric_stable(double alpha) {
    double theta = std::numbers::pi * (uniform() - 0.5);
    if (std::abs(alpha - 1.0) < 1e-12) return std::tan(theta);
    if (std::abs(alpha - 2.0) < 1e-12) return 2.0 * gaussian() / std::sqrt(2.0);
    double w = exponential();
    double s = std::sin(alpha * theta) /
               std::pow(std::cos(theta), 1.0 / alpha);
    double t = std::pow(std::cos((1.0 - alpha) * theta) / w,
                        (1.0 - alpha) / alpha);
    return s * t;
  }

  // one-sided positive alpha-stable, Laplace transform exp(-s^alpha),
  // alpha in (0,1) (Kanter's representation)
  double positive_stable(double alpha) {
    double u = uniform();
    double w = exponential();
    double pu = std::numbers::pi * u;
    double a = std::sin((1.0 - alpha) * pu) *
               std::pow(std::sin(alpha * pu), alpha / (1.0 - alpha)) /
               std::pow(std::sin(pu), 1.0 / (1.0 - alpha));
    return std::pow(a / w, (1.0 - alpha) / alpha);
  }

 private:
  std::uint64_t poisson_knuth(double mean) {
    if (mean <= 0.0) return 0;
    double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::uint64_t state_;
};

}  // namespace cylint
