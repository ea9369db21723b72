#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypfilter/density.hpp"
#include "hypfilter/geometry.hpp"
#include "hypfilter/rng.hpp"

namespace hypf {

/// Scalar observable on the chart, optionally with a Hoelder certificate
/// (constant k, exponent nu) in the chart metric.
struct TestFunction {
  std::string name;
  std::function<double(const Pt&)> f;
  std::optional<std::pair<double, double>> hoelder;  // (k, nu)

  double operator()(const Pt& p) const { return f(p); }
};

/// Trigonometric observables cos/sin(2 pi k.x + phase) up to |k|_inf <=
/// max_degree on the 2-torus. Lipschitz with constant 2 pi |k|_2.
inline std::vector<TestFunction> trig_panel_torus(int max_degree) {
  std::vector<TestFunction> panel;
  for (int kx = 0; kx <= max_degree; ++kx) {
    for (int ky = -max_degree; ky <= max_degree; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      double knorm = 2.0 * M_PI * std::sqrt(double(kx * kx + ky * ky));
      panel.push_back({"cos(" + std::to_string(kx) + "," + std::to_string(ky) + ")",
                       [kx, ky](const Pt& p) {
                         return std::cos(2.0 * M_PI * (kx * p[0] + ky * p[1]));
                       },
                       std::make_pair(knorm, 1.0)});
      panel.push_back({"sin(" + std::to_string(kx) + "," + std::to_string(ky) + ")",
                       [kx, ky](const Pt& p) {
                         return std::sin(2.0 * M_PI * (kx * p[0] + ky * p[1]));
                       },
                       std::make_pair(knorm, 1.0)});
    }
  }
  return panel;
}

/// Small default panel: degree <= 2 modes plus two degree-3 modes; 12 entries.
inline std::vector<TestFunction> default_panel_torus() {
  std::vector<TestFunction> all = trig_panel_torus(1);  // 8 entries
  auto add = [&all](int kx, int ky) {
    double knorm = 2.0 * M_PI * std::sqrt(double(kx * kx + ky * ky));
    all.push_back({"cos(" + std::to_string(kx) + "," + std::to_string(ky) + ")",
                   [kx, ky](const Pt& p) {
                     return std::cos(2.0 * M_PI * (kx * p[0] + ky * p[1]));
                   },
                   std::make_pair(knorm, 1.0)});
  };
  add(2, 0);
  add(0, 2);
  add(2, 1);
  add(3, 0);
  return all;
}

/// Continuous but not Hoelder at its center: 1 / (1 + log(r0 / r)) inside a
/// bump of radius r0, extended by 1 outside. Decays like 1/log near the
/// center, slower than any positive power.
inline TestFunction continuous_stress_torus(double cx = 0.37, double cy = 0.61,
                                            double r0 = 0.3) {
  Pt c = make_pt(cx, cy);
  return {"logbump",
          [c, r0](const Pt& p) {
            double r = chart_distance(ChartKind::Torus2, p, c);
            if (r >= r0) return 1.0;
            if (r <= 0.0) return 0.0;
            return 1.0 / (1.0 - std::log(r / r0));
          },
          std::nullopt};
}

/// Angular observables on the solid torus (functions of t only).
inline std::vector<TestFunction> default_panel_solid_torus() {
  std::vector<TestFunction> panel;
  for (int k = 1; k <= 3; ++k) {
    double knorm = 2.0 * M_PI * k;
    panel.push_back({"cos_t" + std::to_string(k),
                     [k](const Pt& p) { return std::cos(2.0 * M_PI * k * p[0]); },
                     std::make_pair(knorm, 1.0)});
    panel.push_back({"sin_t" + std::to_string(k),
                     [k](const Pt& p) { return std::sin(2.0 * M_PI * k * p[0]); },
                     std::make_pair(knorm, 1.0)});
  }
  panel.push_back({"disk_r2",
                   [](const Pt& p) { return p[1] * p[1] + p[2] * p[2]; },
                   std::make_pair(2.83, 1.0)});
  return panel;
}

/// Strictly positive density p ~ exp(sum_j a_j trig(2 pi k_j . x + phase_j))
/// on the torus. log p is Lipschitz with constant 2 pi sum |a_j| |k_j|_2,
/// which is the certificate required of filter priors.
struct LogTrigPrior {
  struct Mode {
    int kx, ky;
    double amp, phase;
  };
  std::vector<Mode> modes;

  double log_value(const Pt& p) const {
    double acc = 0.0;
    for (const auto& m : modes) {
      acc += m.amp * std::cos(2.0 * M_PI * (m.kx * p[0] + m.ky * p[1]) + m.phase);
    }
    return acc;
  }

  double log_lipschitz() const {
    double acc = 0.0;
    for (const auto& m : modes) {
      acc += std::fabs(m.amp) * 2.0 * M_PI * std::sqrt(double(m.kx * m.kx + m.ky * m.ky));
    }
    return acc;
  }

  DensityGrid discretize(const GridSpec& spec) const {
    DensityGrid g = DensityGrid::from_function(
        spec, [this](const Pt& p) { return std::exp(log_value(p)); });
    g.normalize();
    return g;
  }

  static LogTrigPrior random(Rng& rng, int n_modes = 3, int max_degree = 2,
                             double max_amp = 0.8) {
    LogTrigPrior prior;
    for (int j = 0; j < n_modes; ++j) {
      Mode m;
      m.kx = rng.uniform_int(max_degree + 1);
      m.ky = rng.uniform_int(2 * max_degree + 1) - max_degree;
      if (m.kx == 0 && m.ky == 0) m.kx = 1;
      m.amp = rng.uniform(-max_amp, max_amp);
      m.phase = rng.uniform(0.0, 2.0 * M_PI);
      prior.modes.push_back(m);
    }
    return prior;
  }
};

}  // namespace hypf
