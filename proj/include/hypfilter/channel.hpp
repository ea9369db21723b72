#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypfilter/geometry.hpp"
#include "hypfilter/maps.hpp"
#include "hypfilter/rng.hpp"

namespace hypf {

/// Modified Bessel I_0 by its power series sum_k (x/2)^{2k} / (k!)^2.
inline double bessel_i0(double x) {
  double half = 0.5 * x;
  double term = 1.0;
  double acc = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= (half / k) * (half / k);
    acc += term;
    if (term < acc * 1e-17) break;
  }
  return acc;
}

/// log I_0; switches to the asymptotic expansion e^x / sqrt(2 pi x) * (1 +
/// 1/(8x) + 9/(128 x^2) + ...) before the series can overflow.
inline double log_bessel_i0(double x) {
  if (x < 500.0) return std::log(bessel_i0(x));
  double ix = 1.0 / x;
  double corr = 1.0 + ix / 8.0 + 9.0 * ix * ix / 128.0 + 75.0 * ix * ix * ix / 1024.0;
  return x - 0.5 * std::log(2.0 * M_PI * x) + std::log(corr);
}

/// Memoryless von Mises observation channel on a subset of the chart's
/// angular coordinates. Observations live in radians; a chart coordinate u
/// in [0,1) is observed through the angle 2 pi u. The per-coordinate density
/// w.r.t. Lebesgue measure on [0, 2 pi) is
///   exp(kappa cos(y - 2 pi u)) / (2 pi I0(kappa)),
/// which is exactly log-Lipschitz in u with constant 2 pi kappa.
///
/// `scale` is a constant factor carried symbolically: it never enters the
/// evaluation used by the normalised filter, where it cancels, and only
/// shifts the accumulated log-normaliser. This keeps the posterior sequence
/// bit-identical under rescaling of the likelihood.
struct VonMisesChannel {
  std::vector<int> observed;   // chart coordinate indices
  std::vector<double> kappa;   // concentration per observed coordinate
  double scale = 1.0;

  int obs_dim() const { return static_cast<int>(observed.size()); }

  void validate() const {
    if (observed.size() != kappa.size()) {
      throw std::invalid_argument("VonMisesChannel: observed/kappa size mismatch");
    }
    for (double k : kappa) {
      if (k < 0.0) throw std::invalid_argument("VonMisesChannel: kappa must be >= 0");
    }
    if (!(scale > 0.0)) {
      throw std::invalid_argument("VonMisesChannel: scale must be > 0");
    }
  }
};

/// log g(y, x) without the constant scale factor.
inline double log_likelihood_base(const VonMisesChannel& ch,
                                  const std::vector<double>& y, const Pt& x) {
  double acc = 0.0;
  for (size_t i = 0; i < ch.observed.size(); ++i) {
    double k = ch.kappa[i];
    double ang = y[i] - 2.0 * M_PI * x[ch.observed[i]];
    acc += k * std::cos(ang) - std::log(2.0 * M_PI) - log_bessel_i0(k);
  }
  return acc;
}

inline double likelihood_eval(const VonMisesChannel& ch, const std::vector<double>& y,
                              const Pt& x) {
  return ch.scale * std::exp(log_likelihood_base(ch, y, x));
}

/// Certified log-Lipschitz constant of g(y, .) in the chart metric.
inline double lipschitz_bound(const VonMisesChannel& ch) {
  double acc = 0.0;
  for (double k : ch.kappa) acc += 2.0 * M_PI * k;
  return acc;
}

inline std::vector<double> sample_observation(const VonMisesChannel& ch, const Pt& x,
                                              Rng& rng) {
  std::vector<double> y(ch.observed.size());
  for (size_t i = 0; i < ch.observed.size(); ++i) {
    double mean = 2.0 * M_PI * wrap_unit(x[ch.observed[i]]);
    double th = mean + rng.von_mises(ch.kappa[i]);
    th = std::fmod(th, 2.0 * M_PI);
    if (th < 0.0) th += 2.0 * M_PI;
    y[i] = th;
  }
  return y;
}

/// Joint signal-observation realization: x_truth[k] = f^{k+1}(x0), and
/// y[k] drawn from the channel at x_truth[k]. Same seed, same bytes.
struct ObservationSequence {
  std::vector<std::vector<double>> y;
  std::vector<Pt> x_truth;
  uint64_t seed = 0;

  int size() const { return static_cast<int>(y.size()); }
};

inline ObservationSequence simulate_joint(const ChartMap& map, const VonMisesChannel& ch,
                                          const Pt& x0, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_joint: n must be >= 1");
  ch.validate();
  ObservationSequence out;
  out.seed = seed;
  out.y.reserve(static_cast<size_t>(n));
  out.x_truth.reserve(static_cast<size_t>(n));
  Rng rng(seed);
  Pt x = x0;
  for (int k = 0; k < n; ++k) {
    x = map.forward(x);
    out.x_truth.push_back(x);
    out.y.push_back(sample_observation(ch, x, rng));
  }
  return out;
}

}  // namespace hypf
