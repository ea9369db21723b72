#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypfilter/channel.hpp"
#include "hypfilter/density.hpp"
#include "hypfilter/testfn.hpp"
#include "hypfilter/transfer.hpp"

namespace hypf {

/// The posterior collapsed under the grid: the likelihood annihilated all
/// remaining mass (or produced non-finite values).
struct filter_degenerate_error : std::runtime_error {
  int step;
  explicit filter_degenerate_error(int s)
      : std::runtime_error("filter degenerate at step " + std::to_string(s)), step(s) {}
};

/// Normalised filter state. The density always has mass 1; log_normalizer
/// accumulates the log of the pre-normalisation mass of each step, which is
/// the log-likelihood of the observation path under the model.
struct FilterState {
  DensityGrid density;
  double log_normalizer = 0.0;
  int step = 0;
};

/// One Bayes update: density <- g(y, .) * (transfer density), then normalise.
/// The channel's constant scale enters only the log-normaliser.
inline FilterState filter_step(const FilterState& state, const std::vector<double>& y,
                               const VonMisesChannel& ch, const TransferBackend& backend) {
  FilterState out;
  out.density = backend.apply(state.density);
  const GridSpec& spec = out.density.spec;
  for (int c = 0; c < spec.flat_count(); ++c) {
    double& v = out.density.v[static_cast<size_t>(c)];
    if (v != 0.0) {
      v *= std::exp(log_likelihood_base(ch, y, spec.center(c)));
    }
  }
  double pre_mass = out.density.mass();
  if (!(pre_mass > 0.0) || !std::isfinite(pre_mass)) {
    throw filter_degenerate_error(state.step + 1);
  }
  for (double& v : out.density.v) v /= pre_mass;
  out.log_normalizer = state.log_normalizer + std::log(pre_mass) + std::log(ch.scale);
  out.step = state.step + 1;
  return out;
}

/// Runs the recursion from the prior across the whole observation sequence.
/// Element k of the result is the state after k observations; element 0 is
/// the (normalised) prior itself.
inline std::vector<FilterState> filter_run(const DensityGrid& prior,
                                           const ObservationSequence& obs,
                                           const VonMisesChannel& ch,
                                           const TransferBackend& backend) {
  FilterState s;
  s.density = prior;
  s.density.normalize();
  std::vector<FilterState> states;
  states.reserve(static_cast<size_t>(obs.size()) + 1);
  states.push_back(s);
  for (int k = 0; k < obs.size(); ++k) {
    states.push_back(filter_step(states.back(), obs.y[static_cast<size_t>(k)], ch, backend));
  }
  return states;
}

/// Normalised pullback density: n filter steps driven by a past observation
/// window applied to the constant density. window[0] is the oldest
/// observation. n = 0 returns the uniform density.
inline FilterState pullback_run(const GridSpec& spec,
                                const std::vector<std::vector<double>>& window,
                                const VonMisesChannel& ch, const TransferBackend& backend) {
  FilterState s;
  s.density = DensityGrid::uniform(spec);
  s.density.normalize();
  for (const auto& y : window) {
    s = filter_step(s, y, ch, backend);
  }
  return s;
}

inline double posterior_expectation(const FilterState& s, const TestFunction& psi) {
  return integrate(psi.f, s.density);
}

/// Posterior mean in chart coordinates; torus axes use the circular mean.
inline Pt posterior_mean(const FilterState& s) {
  const GridSpec& spec = s.density.spec;
  Pt mean;
  for (int ax = 0; ax < spec.dim(); ++ax) {
    bool circular = ax == 0 || spec.chart == ChartKind::Torus2;
    if (circular) {
      double cs = 0.0, sn = 0.0;
      for (int c = 0; c < spec.flat_count(); ++c) {
        double w = s.density.v[static_cast<size_t>(c)];
        if (w == 0.0) continue;
        double a = 2.0 * M_PI * spec.center(c)[ax];
        cs += w * std::cos(a);
        sn += w * std::sin(a);
      }
      double ang = std::atan2(sn, cs) / (2.0 * M_PI);
      mean[ax] = wrap_unit(ang);
    } else {
      double acc = 0.0;
      for (int c = 0; c < spec.flat_count(); ++c) {
        acc += s.density.v[static_cast<size_t>(c)] * spec.center(c)[ax];
      }
      mean[ax] = acc * spec.cell_volume();
    }
  }
  if (spec.chart == ChartKind::Torus2) return mean;
  // disk coordinates: plain mean, computed above only for non-circular axes
  for (int ax = 1; ax < spec.dim(); ++ax) {
    double acc = 0.0;
    for (int c = 0; c < spec.flat_count(); ++c) {
      acc += s.density.v[static_cast<size_t>(c)] * spec.center(c)[ax];
    }
    mean[ax] = acc * spec.cell_volume();
  }
  return mean;
}

}  // namespace hypf
