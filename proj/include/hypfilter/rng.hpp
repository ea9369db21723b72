#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hypf {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derive an independent stream seed from (master seed, stream index).
/// Parallel realizations each get their own stream; results are then
/// independent of scheduling.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// mt19937_64 with hand-rolled variate transforms, so that sequences are
/// reproducible bit-for-bit for a given seed independent of the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int n) {  // 0 .. n-1
    return static_cast<int>(uniform() * n) % n;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Von Mises variate with mean 0 on (-pi, pi], Best-Fisher rejection
  /// sampling. kappa = 0 degenerates to the uniform distribution.
  double von_mises(double kappa) {
    if (kappa < 1e-10) {
      return uniform(-M_PI, M_PI);
    }
    double b = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    double rho = (b - std::sqrt(2.0 * b)) / (2.0 * kappa);
    double r = (1.0 + rho * rho) / (2.0 * rho);
    while (true) {
      double u1 = uniform();
      double z = std::cos(M_PI * u1);
      double f = (1.0 + r * z) / (r + z);
      double c = kappa * (r - f);
      double u2 = uniform();
      if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
        double u3 = uniform();
        return (u3 < 0.5 ? -1.0 : 1.0) * std::acos(f);
      }
    }
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hypf
