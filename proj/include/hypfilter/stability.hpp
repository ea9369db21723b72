#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hypfilter/filter.hpp"
#include "hypfilter/maps.hpp"
#include "hypfilter/particle.hpp"
#include "hypfilter/projective.hpp"
#include "hypfilter/rng.hpp"
#include "hypfilter/testfn.hpp"
#include "hypfilter/transfer.hpp"

namespace hypf {

// ---------------------------------------------------------------------------
// rate fitting

struct RateFit {
  double beta_tilde = 0.0;  // sign-flipped slope
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double resid_autocorr = 0.0;  // lag-1 autocorrelation of the residuals
  int n_points = 0;
};

/// Ordinary least squares of log-distance against the step index.
inline RateFit fit_rate(const std::vector<double>& steps,
                        const std::vector<double>& log_d) {
  if (steps.size() != log_d.size() || steps.size() < 5) {
    throw std::invalid_argument("fit_rate: need at least 5 paired points");
  }
  for (double v : log_d) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_rate: non-finite input");
  }
  size_t n = steps.size();
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += steps[i];
    sy += log_d[i];
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    double dx = steps[i] - mx, dy = log_d[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.n_points = static_cast<int>(n);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.beta_tilde = -fit.slope;
  fit.r2 = syy > 0.0 ? (fit.slope * sxy) / syy : 1.0;
  double num = 0, den = 0;
  double prev = 0;
  for (size_t i = 0; i < n; ++i) {
    double r = log_d[i] - (fit.intercept + fit.slope * steps[i]);
    den += r * r;
    if (i > 0) num += r * prev;
    prev = r;
  }
  fit.resid_autocorr = den > 0.0 ? num / den : 0.0;
  return fit;
}

// ---------------------------------------------------------------------------
// shared experiment plumbing

struct ExperimentSetup {
  std::string map_kind = "cat";
  int resolution = 128;        // per torus axis
  int solenoid_nt = 32;        // solid-torus angular cells
  int solenoid_nxy = 96;       // solid-torus disk cells per axis
  int ulam_subsamples = 6;
  std::vector<int> observed = {0};
  std::vector<double> kappa = {2.0};
  uint64_t seed = 1;
  int jobs = 1;
};

inline VonMisesChannel channel_of(const ExperimentSetup& s) {
  VonMisesChannel ch{s.observed, s.kappa};
  ch.validate();
  return ch;
}

inline GridSpec grid_of(const ExperimentSetup& s, const ChartMap& map) {
  if (map.chart() == ChartKind::Torus2) return GridSpec::torus(s.resolution, s.resolution);
  return GridSpec::solid_torus(s.solenoid_nt, s.solenoid_nxy);
}

/// Runs fn(i) for i in [0, n) over the requested number of threads; each
/// index writes only its own slots, so the result does not depend on the
/// schedule.
inline void parallel_for_index(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += jobs) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// twin experiment (filter forgetting)

struct TwinConfig {
  ExperimentSetup setup;
  int horizon = 200;
  int n_seeds = 20;
  int burn_in = 20;
  double fit_floor = 1e-13;  // gaps below this are quadrature noise; the
                             // fit window stops at the first such step
  int prior_modes = 3;
};

struct TwinSeedTrace {
  std::vector<double> tv;        // index k = distance after k+1 steps
  std::vector<double> theta;     // theta_plus between the two posteriors
  std::vector<double> psi_gap;   // max over the Hoelder panel
  RateFit fit;
  bool fit_ok = false;
  int fit_end = 0;  // last step included in the fit window
};

struct TwinReport {
  std::vector<TwinSeedTrace> seeds;
  double median_r2 = 0.0;
  double mean_beta = 0.0;
  double beta_dispersion = 0.0;  // std dev across seeds
  int negative_slopes = 0;
  // fraction of seeds whose decay envelope (10-step block maxima of the
  // panel gap) decreases from the burn-in on; the raw curve fluctuates
  // step to step even in clean runs
  double eventually_monotone_fraction = 0.0;
};

inline TwinReport twin_experiment(const ChartMap& map, const TwinConfig& cfg) {
  if (map.chart() != ChartKind::Torus2) {
    throw std::invalid_argument("twin_experiment: torus maps only");
  }
  VonMisesChannel ch = channel_of(cfg.setup);
  GridSpec spec = grid_of(cfg.setup, map);
  PointwiseBackend backend(map);
  std::vector<TestFunction> panel = default_panel_torus();

  TwinReport rep;
  rep.seeds.resize(static_cast<size_t>(cfg.n_seeds));
  parallel_for_index(cfg.n_seeds, cfg.setup.jobs, [&](int s) {
    uint64_t seed = derive_seed(cfg.setup.seed, static_cast<uint64_t>(s));
    Rng rng(seed);
    Pt x0 = make_pt(rng.uniform(), rng.uniform());
    ObservationSequence obs =
        simulate_joint(map, ch, x0, cfg.horizon, derive_seed(seed, 1));

    Rng prior_rng(derive_seed(seed, 2));
    DensityGrid p1 = LogTrigPrior::random(prior_rng, cfg.prior_modes).discretize(spec);
    DensityGrid p2 = LogTrigPrior::random(prior_rng, cfg.prior_modes).discretize(spec);

    FilterState s1, s2;
    s1.density = p1;
    s2.density = p2;
    TwinSeedTrace& trace = rep.seeds[static_cast<size_t>(s)];
    trace.tv.reserve(static_cast<size_t>(cfg.horizon));
    for (int k = 0; k < cfg.horizon; ++k) {
      s1 = filter_step(s1, obs.y[static_cast<size_t>(k)], ch, backend);
      s2 = filter_step(s2, obs.y[static_cast<size_t>(k)], ch, backend);
      trace.tv.push_back(tv_distance(s1.density, s2.density));
      double th = kInfTheta;
      if (s1.density.min_value() > 0.0 && s2.density.min_value() > 0.0) {
        th = theta_plus_grid(s1.density, s2.density).theta;
      }
      trace.theta.push_back(th);
      double gap = 0.0;
      for (const auto& psi : panel) {
        gap = std::max(gap, std::fabs(posterior_expectation(s1, psi) -
                                      posterior_expectation(s2, psi)));
      }
      trace.psi_gap.push_back(gap);
    }

    // fit on [burn_in, first step at the noise floor)
    std::vector<double> xs, ys;
    int k_end = cfg.horizon;
    for (int k = cfg.burn_in; k < cfg.horizon; ++k) {
      double g = trace.psi_gap[static_cast<size_t>(k - 1)];
      if (!(g > cfg.fit_floor)) {
        k_end = k;
        break;
      }
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(g));
    }
    trace.fit_end = k_end;
    if (xs.size() >= 5) {
      trace.fit = fit_rate(xs, ys);
      trace.fit_ok = true;
    }
  });

  int monotone = 0;
  const int block = 10;
  for (const auto& t : rep.seeds) {
    int end = std::min<int>(t.fit_end, static_cast<int>(t.psi_gap.size()));
    int start = cfg.burn_in;
    if (end - start < 2 * block) continue;
    bool ok = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int b = start; b + block <= end; b += block) {
      double mx = 0.0;
      for (int k = b; k < b + block; ++k) {
        mx = std::max(mx, t.psi_gap[static_cast<size_t>(k)]);
      }
      if (mx > prev * 1.1 && mx > cfg.fit_floor) ok = false;
      prev = mx;
    }
    if (ok) ++monotone;
  }
  rep.eventually_monotone_fraction =
      cfg.n_seeds > 0 ? static_cast<double>(monotone) / cfg.n_seeds : 0.0;

  std::vector<double> r2s, betas;
  for (const auto& t : rep.seeds) {
    if (!t.fit_ok) continue;
    r2s.push_back(t.fit.r2);
    betas.push_back(t.fit.beta_tilde);
    if (t.fit.slope < 0.0) ++rep.negative_slopes;
  }
  if (!r2s.empty()) {
    std::sort(r2s.begin(), r2s.end());
    rep.median_r2 = r2s[r2s.size() / 2];
    double m = 0;
    for (double b : betas) m += b;
    m /= static_cast<double>(betas.size());
    rep.mean_beta = m;
    double v = 0;
    for (double b : betas) v += (b - m) * (b - m);
    rep.beta_dispersion = betas.size() > 1
                              ? std::sqrt(v / static_cast<double>(betas.size() - 1))
                              : 0.0;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// forward runs against the depth-limited invariant density

struct ForwardPullbackConfig {
  ExperimentSetup setup;
  int n_ref = 80;                      // pullback depth used as the reference
  std::vector<int> ladder = {10, 20, 40};
  int prior_modes = 3;
  int n_priors = 3;
};

struct ForwardPullbackReport {
  std::vector<int> ladder;
  // gap[prior][rung] = max over Hoelder panel of the integral gap
  std::vector<std::vector<double>> gap;
  std::vector<double> stress_gap;  // merely-continuous observable, first prior
  double reference_self_gap = 0.0;  // Cauchy gap between depths n_ref and n_ref/2
};

inline ForwardPullbackReport forward_vs_pullback(const ChartMap& map,
                                                 const ForwardPullbackConfig& cfg) {
  VonMisesChannel ch = channel_of(cfg.setup);
  GridSpec spec = grid_of(cfg.setup, map);
  PointwiseBackend backend(map);
  std::vector<TestFunction> panel = default_panel_torus();
  TestFunction stress = continuous_stress_torus();

  Rng rng(cfg.setup.seed);
  Pt x0 = make_pt(rng.uniform(), rng.uniform());
  ObservationSequence obs =
      simulate_joint(map, ch, x0, cfg.n_ref, derive_seed(cfg.setup.seed, 1));
  std::vector<std::vector<double>> window(obs.y.begin(), obs.y.end());

  FilterState ref = pullback_run(spec, window, ch, backend);

  ForwardPullbackReport rep;
  rep.ladder = cfg.ladder;
  {
    // Cauchy self-gap of the reference between depths n_ref and n_ref / 2
    std::vector<std::vector<double>> half(window.begin() + cfg.n_ref / 2, window.end());
    FilterState ref_half = pullback_run(spec, half, ch, backend);
    for (const auto& psi : panel) {
      rep.reference_self_gap =
          std::max(rep.reference_self_gap, std::fabs(posterior_expectation(ref, psi) -
                                                     posterior_expectation(ref_half, psi)));
    }
  }

  Rng prior_rng(derive_seed(cfg.setup.seed, 7));
  for (int p = 0; p < cfg.n_priors; ++p) {
    DensityGrid prior = LogTrigPrior::random(prior_rng, cfg.prior_modes).discretize(spec);
    std::vector<double> per_rung;
    for (int n : cfg.ladder) {
      FilterState s;
      s.density = prior;
      for (int k = cfg.n_ref - n; k < cfg.n_ref; ++k) {
        s = filter_step(s, window[static_cast<size_t>(k)], ch, backend);
      }
      double g = 0.0;
      for (const auto& psi : panel) {
        g = std::max(g, std::fabs(posterior_expectation(s, psi) -
                                  posterior_expectation(ref, psi)));
      }
      per_rung.push_back(g);
      if (p == 0) {
        rep.stress_gap.push_back(std::fabs(posterior_expectation(s, stress) -
                                           posterior_expectation(ref, stress)));
      }
    }
    rep.gap.push_back(per_rung);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// covariance residual of depth-limited approximants

struct CovarianceConfig {
  ExperimentSetup setup;
  std::vector<int> ladder = {10, 20, 40};
  // The per-window residual fluctuates over orders of magnitude with the
  // realization; the reported r(n) is the mean over independent windows.
  int realizations = 16;
};

struct CovarianceReport {
  std::vector<int> ladder;
  std::vector<double> residual;                          // mean r(n)
  std::vector<std::vector<double>> residual_by_window;   // [window][rung]
  double chained_residual = 0.0;  // exact-cocycle route, 0 to rounding
};

inline CovarianceReport covariance_residual(const ChartMap& map,
                                            const CovarianceConfig& cfg) {
  VonMisesChannel ch = channel_of(cfg.setup);
  GridSpec spec = grid_of(cfg.setup, map);
  PointwiseBackend backend(map);
  std::vector<TestFunction> panel = default_panel_torus();

  int n_max = *std::max_element(cfg.ladder.begin(), cfg.ladder.end());
  CovarianceReport rep;
  rep.ladder = cfg.ladder;
  rep.residual_by_window.resize(static_cast<size_t>(cfg.realizations));
  std::vector<double> chained(static_cast<size_t>(cfg.realizations), 0.0);

  parallel_for_index(cfg.realizations, cfg.setup.jobs, [&](int w) {
    uint64_t seed = derive_seed(cfg.setup.seed, static_cast<uint64_t>(w));
    Rng rng(seed);
    Pt x0 = make_pt(rng.uniform(), rng.uniform());
    ObservationSequence obs =
        simulate_joint(map, ch, x0, n_max + 1, derive_seed(seed, 1));
    std::vector<std::vector<double>> ys(obs.y.begin(), obs.y.end());

    for (int n : cfg.ladder) {
      // depth-n approximant "at omega": window ending one step before the last
      std::vector<std::vector<double>> w0(ys.begin() + (n_max - n), ys.end() - 1);
      FilterState at_omega = pullback_run(spec, w0, ch, backend);
      FilterState pushed = filter_step(at_omega, ys.back(), ch, backend);
      // depth-n approximant "at T omega": shifted window including the last
      std::vector<std::vector<double>> w1(ys.begin() + (n_max - n + 1), ys.end());
      FilterState at_T = pullback_run(spec, w1, ch, backend);
      double r = 0.0;
      for (const auto& psi : panel) {
        r = std::max(r, std::fabs(posterior_expectation(pushed, psi) -
                                  posterior_expectation(at_T, psi)));
      }
      rep.residual_by_window[static_cast<size_t>(w)].push_back(r);
    }

    // depth n+1 built by one step from depth n shares the whole window: that
    // route has zero residual by construction
    int n = cfg.ladder.front();
    std::vector<std::vector<double>> w0(ys.begin() + (n_max - n), ys.end() - 1);
    FilterState at_omega = pullback_run(spec, w0, ch, backend);
    FilterState pushed = filter_step(at_omega, ys.back(), ch, backend);
    std::vector<std::vector<double>> w1(ys.begin() + (n_max - n), ys.end());
    FilterState direct = pullback_run(spec, w1, ch, backend);
    for (const auto& psi : panel) {
      chained[static_cast<size_t>(w)] =
          std::max(chained[static_cast<size_t>(w)],
                   std::fabs(posterior_expectation(pushed, psi) -
                             posterior_expectation(direct, psi)));
    }
  });

  rep.residual.assign(cfg.ladder.size(), 0.0);
  for (const auto& row : rep.residual_by_window) {
    for (size_t j = 0; j < row.size(); ++j) rep.residual[j] += row[j];
  }
  for (double& r : rep.residual) r /= cfg.realizations;
  for (double c : chained) rep.chained_residual = std::max(rep.chained_residual, c);
  return rep;
}

// ---------------------------------------------------------------------------
// expectation identity against the invariant measure

struct ExpectationConfig {
  ExperimentSetup setup;
  int depth = 30;
  int realizations = 100;
};

struct ExpectationEntry {
  std::string psi;
  double mean = 0.0;
  double se = 0.0;
  double target = 0.0;  // integral against the invariant measure
  double z = 0.0;
};

struct ExpectationReport {
  std::vector<ExpectationEntry> entries;
  double max_abs_z = 0.0;
};

inline ExpectationReport expectation_identity_check(const ChartMap& map,
                                                    const ExpectationConfig& cfg) {
  if (map.chart() != ChartKind::Torus2) {
    throw std::invalid_argument("expectation_identity_check: torus maps only");
  }
  VonMisesChannel ch = channel_of(cfg.setup);
  GridSpec spec = grid_of(cfg.setup, map);
  PointwiseBackend backend(map);
  std::vector<TestFunction> panel = default_panel_torus();

  int R = cfg.realizations;
  std::vector<std::vector<double>> vals(panel.size(),
                                        std::vector<double>(static_cast<size_t>(R)));
  parallel_for_index(R, cfg.setup.jobs, [&](int r) {
    uint64_t seed = derive_seed(cfg.setup.seed, static_cast<uint64_t>(r));
    Rng rng(seed);
    // the initial signal law and the filter prior are both Lebesgue, so the
    // depth-n conditional expectation is unbiased for every depth
    Pt x_past = make_pt(rng.uniform(), rng.uniform());
    ObservationSequence obs =
        simulate_joint(map, ch, x_past, cfg.depth, derive_seed(seed, 1));
    std::vector<std::vector<double>> window(obs.y.begin(), obs.y.end());
    FilterState mu = pullback_run(spec, window, ch, backend);
    for (size_t j = 0; j < panel.size(); ++j) {
      vals[j][static_cast<size_t>(r)] = posterior_expectation(mu, panel[j]);
    }
  });

  ExpectationReport rep;
  for (size_t j = 0; j < panel.size(); ++j) {
    ExpectationEntry e;
    e.psi = panel[j].name;
    e.target = 0.0;  // every panel mode integrates to zero against Lebesgue
    double m = 0;
    for (double v : vals[j]) m += v;
    m /= R;
    double var = 0;
    for (double v : vals[j]) var += (v - m) * (v - m);
    var /= (R - 1);
    e.mean = m;
    e.se = std::sqrt(var / R);
    e.z = e.se > 0.0 ? (e.mean - e.target) / e.se : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z, std::fabs(e.z));
    rep.entries.push_back(e);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// support confinement on the solenoid

struct SupportConfig {
  ExperimentSetup setup;
  int depth_max = 10;
  // Angle doubling in double precision exhausts its mantissa after ~50
  // steps (every orbit collapses onto t = 0), so the attractor is traced
  // with many short orbits instead of a few long ones.
  long orbit_length = 20;
  int n_orbits = 6000;
  int orbit_burnin = 25;
};

struct SupportReport {
  std::vector<double> outside_mass;  // index = pullback depth
  std::vector<double> ratios;        // consecutive ratios while above floor
  int neighborhood_cells = 0;
  int saturation_depth = 0;  // first depth with outside mass < 1e-12
};

inline SupportReport support_check(const Solenoid& map, const SupportConfig& cfg) {
  VonMisesChannel ch = channel_of(cfg.setup);
  GridSpec spec = grid_of(cfg.setup, map);
  UlamMatrix U = ulam_build(map, spec, cfg.setup.ulam_subsamples,
                            std::max(1, cfg.setup.jobs));
  UlamBackend backend(std::move(U));

  // attractor neighborhood: cells visited by long test orbits, dilated by one
  std::vector<char> visited(static_cast<size_t>(spec.flat_count()), 0);
  Rng rng(derive_seed(cfg.setup.seed, 1337));
  for (int o = 0; o < cfg.n_orbits; ++o) {
    double r = std::sqrt(rng.uniform()) * 0.9;
    double th = rng.uniform(0.0, 2.0 * M_PI);
    Pt x = make_pt(rng.uniform(), r * std::cos(th), r * std::sin(th));
    for (int k = 0; k < cfg.orbit_burnin; ++k) x = map.forward(x);
    for (long k = 0; k < cfg.orbit_length; ++k) {
      x = map.forward(x);
      visited[static_cast<size_t>(spec.cell_of(x))] = 1;
    }
  }
  std::vector<char> nbhd(visited.size(), 0);
  for (int f = 0; f < spec.flat_count(); ++f) {
    if (!visited[static_cast<size_t>(f)]) continue;
    auto ix = spec.unflatten(f);
    for (int dt = -1; dt <= 1; ++dt) {
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          std::array<int, 3> jx = ix;
          jx[0] = (jx[0] + dt + spec.res[0]) % spec.res[0];
          jx[1] += dx;
          jx[2] += dy;
          if (jx[1] < 0 || jx[1] >= spec.res[1] || jx[2] < 0 || jx[2] >= spec.res[2]) {
            continue;
          }
          nbhd[static_cast<size_t>(spec.flatten(jx))] = 1;
        }
      }
    }
  }

  SupportReport rep;
  for (char c : nbhd) rep.neighborhood_cells += c;

  Rng sim(derive_seed(cfg.setup.seed, 2));
  double r = std::sqrt(sim.uniform()) * 0.5;
  double th = sim.uniform(0.0, 2.0 * M_PI);
  Pt x0 = make_pt(sim.uniform(), r * std::cos(th), r * std::sin(th));
  ObservationSequence obs =
      simulate_joint(map, ch, x0, cfg.depth_max, derive_seed(cfg.setup.seed, 3));

  FilterState s;
  s.density = DensityGrid::uniform(spec);
  s.density.normalize();
  auto outside = [&](const DensityGrid& d) {
    double acc = 0.0;
    for (int f = 0; f < spec.flat_count(); ++f) {
      if (!nbhd[static_cast<size_t>(f)]) acc += d.v[static_cast<size_t>(f)];
    }
    return acc * spec.cell_volume();
  };
  rep.outside_mass.push_back(outside(s.density));
  for (int n = 1; n <= cfg.depth_max; ++n) {
    s = filter_step(s, obs.y[static_cast<size_t>(n - 1)], ch, backend);
    rep.outside_mass.push_back(outside(s.density));
  }
  rep.saturation_depth = cfg.depth_max + 1;
  for (int n = 0; n <= cfg.depth_max; ++n) {
    if (rep.outside_mass[static_cast<size_t>(n)] < 1e-12) {
      rep.saturation_depth = n;
      break;
    }
  }
  for (int n = 1; n < rep.saturation_depth && n <= cfg.depth_max; ++n) {
    double prev = rep.outside_mass[static_cast<size_t>(n - 1)];
    double cur = rep.outside_mass[static_cast<size_t>(n)];
    if (prev > 1e-12) rep.ratios.push_back(cur / prev);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// absolute continuity along the expanding direction

struct AbsContinuityConfig {
  ExperimentSetup setup;
  int depth = 40;
  int realizations = 20;
  int n_psi = 20;
  double box_halfwidth_u = 0.35;
  double box_halfwidth_s = 0.35;
};

struct AbsContinuityReport {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double C = 0.0;  // max(max_ratio, 1/min_ratio)
  bool all_finite_positive = true;
  // for the cat map the invariant measure is Lebesgue, so the ratio family
  // against it coincides with the family against m
  bool mu0_equals_m = true;
};

inline AbsContinuityReport abs_continuity_ratio(const CatMap& map,
                                                const AbsContinuityConfig& cfg) {
  VonMisesChannel ch = channel_of(cfg.setup);
  GridSpec spec = grid_of(cfg.setup, map);
  PointwiseBackend backend(map);

  auto u_dir = map.unstable_direction();
  auto s_dir = map.stable_direction(make_pt(0, 0));
  Pt box_center = make_pt(0.5, 0.5);
  double wu = cfg.box_halfwidth_u, ws = cfg.box_halfwidth_s;

  // observables constant along stable segments inside the box: functions of
  // the expanding coordinate only
  Rng psi_rng(derive_seed(cfg.setup.seed, 11));
  std::vector<TestFunction> panel;
  for (int j = 0; j < cfg.n_psi; ++j) {
    int k = 1 + j % 4;
    double phase = psi_rng.uniform(0.0, 2.0 * M_PI);
    panel.push_back(
        {"leafconst" + std::to_string(j),
         [=](const Pt& p) {
           double du = circle_delta(box_center[0], p[0]) * u_dir[0] +
                       circle_delta(box_center[1], p[1]) * u_dir[1];
           double ds = circle_delta(box_center[0], p[0]) * s_dir[0] +
                       circle_delta(box_center[1], p[1]) * s_dir[1];
           if (std::fabs(du) > wu || std::fabs(ds) > ws) return 0.0;
           return 1.0 + 0.9 * std::cos(M_PI * k * du / wu + phase);
         },
         std::nullopt});
  }

  std::vector<double> denom(panel.size());
  for (size_t j = 0; j < panel.size(); ++j) {
    denom[j] = integrate_fn(spec, panel[j].f);
  }

  AbsContinuityReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  std::vector<std::vector<double>> ratios(
      static_cast<size_t>(cfg.realizations),
      std::vector<double>(panel.size(), 0.0));
  parallel_for_index(cfg.realizations, cfg.setup.jobs, [&](int r) {
    uint64_t seed = derive_seed(cfg.setup.seed, 100 + static_cast<uint64_t>(r));
    Rng rng(seed);
    Pt x0 = make_pt(rng.uniform(), rng.uniform());
    ObservationSequence obs =
        simulate_joint(map, ch, x0, cfg.depth, derive_seed(seed, 1));
    std::vector<std::vector<double>> window(obs.y.begin(), obs.y.end());
    FilterState mu = pullback_run(spec, window, ch, backend);
    for (size_t j = 0; j < panel.size(); ++j) {
      ratios[static_cast<size_t>(r)][j] =
          posterior_expectation(mu, panel[j]) / denom[j];
    }
  });
  for (const auto& row : ratios) {
    for (double q : row) {
      if (!(q > 0.0) || !std::isfinite(q)) rep.all_finite_positive = false;
      rep.min_ratio = std::min(rep.min_ratio, q);
      rep.max_ratio = std::max(rep.max_ratio, q);
    }
  }
  rep.C = std::max(rep.max_ratio, rep.min_ratio > 0.0 ? 1.0 / rep.min_ratio
                                                      : std::numeric_limits<double>::infinity());
  return rep;
}

}  // namespace hypf
