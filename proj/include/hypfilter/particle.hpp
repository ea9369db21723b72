#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hypfilter/channel.hpp"
#include "hypfilter/geometry.hpp"
#include "hypfilter/maps.hpp"
#include "hypfilter/rng.hpp"
#include "hypfilter/testfn.hpp"

namespace hypf {

/// Weighted particle representation of the posterior. Serves as an
/// independent oracle for the grid filter; the dynamics are deterministic so
/// the propagation step adds no proposal noise.
struct ParticleCloud {
  std::vector<Pt> particles;
  std::vector<double> weights;  // sums to 1

  int size() const { return static_cast<int>(particles.size()); }

  double ess() const {
    double acc = 0.0;
    for (double w : weights) acc += w * w;
    return acc > 0.0 ? 1.0 / acc : 0.0;
  }

  static ParticleCloud uniform_torus(int n, Rng& rng) {
    ParticleCloud c;
    c.particles.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      c.particles.push_back(make_pt(rng.uniform(), rng.uniform()));
    }
    c.weights.assign(static_cast<size_t>(n), 1.0 / n);
    return c;
  }

  /// Weighted draw from a grid density: pick a cell by mass, then a uniform
  /// point inside it.
  static ParticleCloud from_grid(const DensityGrid& g, int n, Rng& rng) {
    std::vector<double> cdf(g.v.size());
    double acc = 0.0;
    for (size_t i = 0; i < g.v.size(); ++i) {
      acc += g.v[i];
      cdf[i] = acc;
    }
    ParticleCloud c;
    c.particles.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      double u = rng.uniform() * acc;
      size_t lo = static_cast<size_t>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (lo >= cdf.size()) lo = cdf.size() - 1;
      Pt p = g.spec.center(static_cast<int>(lo));
      for (int ax = 0; ax < g.spec.dim(); ++ax) {
        double w = g.spec.axis_width(ax) / g.spec.res[static_cast<size_t>(ax)];
        p[ax] += (rng.uniform() - 0.5) * w;
      }
      c.particles.push_back(wrap_point(g.spec.chart, p));
    }
    c.weights.assign(static_cast<size_t>(n), 1.0 / n);
    return c;
  }
};

inline void systematic_resample(ParticleCloud& cloud, Rng& rng) {
  int n = cloud.size();
  std::vector<Pt> fresh;
  fresh.reserve(static_cast<size_t>(n));
  double u0 = rng.uniform() / n;
  double cum = cloud.weights[0];
  int i = 0;
  for (int k = 0; k < n; ++k) {
    double u = u0 + static_cast<double>(k) / n;
    while (u > cum && i + 1 < n) {
      ++i;
      cum += cloud.weights[static_cast<size_t>(i)];
    }
    fresh.push_back(cloud.particles[static_cast<size_t>(i)]);
  }
  cloud.particles = std::move(fresh);
  cloud.weights.assign(static_cast<size_t>(n), 1.0 / n);
}

/// Bootstrap step: deterministic propagation, likelihood reweighting,
/// systematic resampling once the effective sample size drops below
/// threshold * N.
inline ParticleCloud particle_filter_step(const ParticleCloud& cloud,
                                          const std::vector<double>& y,
                                          const ChartMap& map, const VonMisesChannel& ch,
                                          Rng& rng, double resample_threshold = 0.5) {
  if (cloud.size() == 0) {
    throw std::invalid_argument("particle_filter_step: empty cloud");
  }
  ParticleCloud out;
  out.particles.resize(cloud.particles.size());
  out.weights.resize(cloud.weights.size());
  double wsum = 0.0;
  for (size_t i = 0; i < cloud.particles.size(); ++i) {
    out.particles[i] = map.forward(cloud.particles[i]);
    double w = cloud.weights[i] * std::exp(log_likelihood_base(ch, y, out.particles[i]));
    out.weights[i] = w;
    wsum += w;
  }
  if (!(wsum > 0.0) || !std::isfinite(wsum)) {
    throw std::runtime_error("particle_filter_step: all weights vanished");
  }
  for (double& w : out.weights) w /= wsum;
  if (out.ess() < resample_threshold * out.size()) {
    systematic_resample(out, rng);
  }
  return out;
}

inline double particle_expectation(const ParticleCloud& cloud, const TestFunction& psi) {
  double acc = 0.0;
  for (size_t i = 0; i < cloud.particles.size(); ++i) {
    acc += cloud.weights[i] * psi(cloud.particles[i]);
  }
  return acc;
}

}  // namespace hypf
