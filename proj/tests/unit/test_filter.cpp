#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstring>

#include "hypfilter/filter.hpp"
#include "hypfilter/maps.hpp"
#include "hypfilter/rng.hpp"

using namespace hypf;

namespace {

FilterState uniform_state(const GridSpec& spec) {
  FilterState s;
  s.density = DensityGrid::uniform(spec);
  s.density.normalize();
  return s;
}

}  // namespace

TEST_CASE("posterior mass is one after every step") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(32, 32);
  PointwiseBackend backend(cat);
  VonMisesChannel ch{{0, 1}, {2.0, 2.0}};
  ObservationSequence obs = simulate_joint(cat, ch, make_pt(0.2, 0.3), 25, 5);
  auto states = filter_run(DensityGrid::uniform(spec), obs, ch, backend);
  REQUIRE(states.size() == 26);
  for (const auto& s : states) {
    CHECK(std::fabs(s.density.mass() - 1.0) < 1e-12);
  }
}

TEST_CASE("uninformative channel keeps the uniform posterior") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(16, 16);
  PointwiseBackend backend(cat);
  VonMisesChannel ch{{0, 1}, {0.0, 0.0}};
  ObservationSequence obs = simulate_joint(cat, ch, make_pt(0.6, 0.1), 30, 9);
  auto states = filter_run(DensityGrid::uniform(spec), obs, ch, backend);
  for (const auto& s : states) {
    for (double v : s.density.v) CHECK(v == Catch::Approx(1.0).epsilon(1e-11));
  }
  // constant likelihood: the per-step normaliser increment is log of the
  // constant, here (2 pi)^-2
  double inc = states[5].log_normalizer - states[4].log_normalizer;
  CHECK(inc == Catch::Approx(-2.0 * std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("scaling the likelihood never changes the posterior") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(32, 32);
  PointwiseBackend backend(cat);
  VonMisesChannel ch{{0, 1}, {2.0, 1.0}};
  ObservationSequence obs = simulate_joint(cat, ch, make_pt(0.4, 0.9), 20, 33);

  VonMisesChannel scaled = ch;
  scaled.scale = 17.0;

  auto base = filter_run(DensityGrid::uniform(spec), obs, ch, backend);
  auto shifted = filter_run(DensityGrid::uniform(spec), obs, scaled, backend);
  for (size_t k = 0; k < base.size(); ++k) {
    REQUIRE(std::memcmp(base[k].density.v.data(), shifted[k].density.v.data(),
                        base[k].density.v.size() * sizeof(double)) == 0);
    CHECK(shifted[k].log_normalizer - base[k].log_normalizer ==
          Catch::Approx(double(k) * std::log(17.0)).margin(1e-10));
  }
}

TEST_CASE("filter_run base cases") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(16, 16);
  PointwiseBackend backend(cat);
  VonMisesChannel ch{{0}, {2.0}};

  ObservationSequence empty;
  auto states = filter_run(DensityGrid::uniform(spec), empty, ch, backend);
  REQUIRE(states.size() == 1);
  CHECK(states[0].step == 0);

  ObservationSequence one = simulate_joint(cat, ch, make_pt(0.3, 0.3), 1, 2);
  auto two = filter_run(DensityGrid::uniform(spec), one, ch, backend);
  FilterState manual = filter_step(uniform_state(spec), one.y[0], ch, backend);
  CHECK(sup_distance(two[1].density, manual.density) == 0.0);
}

TEST_CASE("grid filter matches the exhaustive Bayes enumeration on a 3-cell model") {
  // rotation by 1/3 permutes the three cells exactly, so the grid filter and
  // a brute-force sum over initial cells must agree to rounding
  TorusRotation rot(1.0 / 3.0, 0.0);
  GridSpec spec = GridSpec::torus(3, 1);
  PointwiseBackend backend(rot);
  VonMisesChannel ch{{0}, {1.5}};
  ObservationSequence obs = simulate_joint(rot, ch, make_pt(0.5, 0.5), 10, 321);

  auto states = filter_run(DensityGrid::uniform(spec), obs, ch, backend);

  // oracle: initial cell i has prior 1/3 and deterministic orbit i -> i+1
  std::vector<double> centers{spec.center(0)[0], spec.center(1)[0], spec.center(2)[0]};
  for (int n = 1; n <= 10; ++n) {
    std::array<double, 3> w{};
    for (int i = 0; i < 3; ++i) {
      double lw = std::log(1.0 / 3.0);
      for (int m = 1; m <= n; ++m) {
        Pt cur = make_pt(centers[size_t((i + m) % 3)], 0.5);
        lw += log_likelihood_base(ch, obs.y[size_t(m - 1)], cur);
      }
      w[size_t((i + n) % 3)] = std::exp(lw);
    }
    double tot = w[0] + w[1] + w[2];
    for (int c = 0; c < 3; ++c) {
      double grid_prob = states[size_t(n)].density.v[size_t(c)] * spec.cell_volume();
      CHECK(grid_prob == Catch::Approx(w[size_t(c)] / tot).margin(1e-12));
    }
  }
}

TEST_CASE("operator composition agrees with stepwise normalisation") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(32, 32);
  PointwiseBackend backend(cat);
  VonMisesChannel ch{{0, 1}, {2.0, 2.0}};
  ObservationSequence obs = simulate_joint(cat, ch, make_pt(0.7, 0.2), 6, 4);

  auto states = filter_run(DensityGrid::uniform(spec), obs, ch, backend);

  // unnormalised composition, single normalisation at the end
  DensityGrid d = DensityGrid::uniform(spec);
  d.normalize();
  for (int k = 0; k < 6; ++k) {
    d = backend.apply(d);
    for (int c = 0; c < spec.flat_count(); ++c) {
      d.v[size_t(c)] *= std::exp(log_likelihood_base(ch, obs.y[size_t(k)], spec.center(c)));
    }
    // rescale to dodge underflow without changing the ray
    double m = d.mass();
    for (double& v : d.v) v /= m;
  }
  d.normalize();
  CHECK(tv_distance(d, states[6].density) < 1e-12);
}

TEST_CASE("pullback run basics") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(32, 32);
  PointwiseBackend backend(cat);
  VonMisesChannel ch{{0, 1}, {2.0, 2.0}};

  FilterState z0 = pullback_run(spec, {}, ch, backend);
  for (double v : z0.density.v) CHECK(v == Catch::Approx(1.0).epsilon(1e-13));

  // cocycle consistency: depth n+1 equals one step applied to the depth-n
  // pullback over the shifted window; both follow the identical code path
  ObservationSequence obs = simulate_joint(cat, ch, make_pt(0.1, 0.8), 12, 8);
  std::vector<std::vector<double>> win(obs.y.begin(), obs.y.end());
  FilterState full = pullback_run(spec, win, ch, backend);
  std::vector<std::vector<double>> older(win.begin(), win.end() - 1);
  FilterState partial = pullback_run(spec, older, ch, backend);
  FilterState stepped = filter_step(partial, win.back(), ch, backend);
  REQUIRE(std::memcmp(full.density.v.data(), stepped.density.v.data(),
                      full.density.v.size() * sizeof(double)) == 0);
}

TEST_CASE("posterior mean tracks the truth under an informative channel") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(64, 64);
  PointwiseBackend backend(cat);
  VonMisesChannel ch{{0, 1}, {4.0, 4.0}};

  Rng seeds(2718);
  double mean_err = 0.0, prior_err = 0.0;
  int n_seeds = 20;
  for (int s = 0; s < n_seeds; ++s) {
    Pt x0 = make_pt(seeds.uniform(), seeds.uniform());
    ObservationSequence obs =
        simulate_joint(cat, ch, x0, 50, derive_seed(99, uint64_t(s)));
    auto states = filter_run(DensityGrid::uniform(spec), obs, ch, backend);
    Pt truth = obs.x_truth.back();
    Pt est = posterior_mean(states.back());
    mean_err += chart_distance(ChartKind::Torus2, est, truth);
    // distance from a uniformly random point to the truth, as the baseline
    Pt blind = make_pt(seeds.uniform(), seeds.uniform());
    prior_err += chart_distance(ChartKind::Torus2, blind, truth);
  }
  mean_err /= n_seeds;
  prior_err /= n_seeds;
  CHECK(mean_err < prior_err);
  CHECK(mean_err < 0.15);  // kappa = 4 localises well below the blind ~0.38
}

TEST_CASE("support collapse raises the degenerate error with its step") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(2, 2);
  PointwiseBackend backend(cat);
  // kappa so large that every cell center underflows to likelihood zero
  VonMisesChannel ch{{0, 1}, {3000.0, 3000.0}};
  FilterState s = uniform_state(spec);
  std::vector<double> y{0.0, 0.0};  // all centers at angle pi/2 or more
  try {
    filter_step(s, y, ch, backend);
    FAIL("expected filter_degenerate_error");
  } catch (const filter_degenerate_error& e) {
    CHECK(e.step == 1);
  }
}

TEST_CASE("posterior expectations") {
  GridSpec spec = GridSpec::torus(32, 32);
  FilterState s = uniform_state(spec);
  TestFunction one{"one", [](const Pt&) { return 1.0; }, std::nullopt};
  CHECK(posterior_expectation(s, one) == Catch::Approx(1.0).epsilon(1e-12));

  TestFunction f{"cos", [](const Pt& p) { return std::cos(2 * M_PI * p[0]); }, std::nullopt};
  TestFunction g{"sin", [](const Pt& p) { return std::sin(2 * M_PI * p[1]); }, std::nullopt};
  TestFunction comb{"comb",
                    [&](const Pt& p) { return 2.0 * f(p) - 0.5 * g(p); },
                    std::nullopt};
  CHECK(posterior_expectation(s, comb) ==
        Catch::Approx(2.0 * posterior_expectation(s, f) -
                      0.5 * posterior_expectation(s, g))
            .margin(1e-13));
}
