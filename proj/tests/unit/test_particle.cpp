#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hypfilter/filter.hpp"
#include "hypfilter/maps.hpp"
#include "hypfilter/particle.hpp"

using namespace hypf;

TEST_CASE("constant likelihood leaves weights flat") {
  CatMap cat;
  VonMisesChannel ch{{0, 1}, {0.0, 0.0}};
  Rng rng(1);
  ParticleCloud c = ParticleCloud::uniform_torus(1000, rng);
  ParticleCloud d = particle_filter_step(c, {0.3, 0.4}, cat, ch, rng);
  for (double w : d.weights) CHECK(w == Catch::Approx(1e-3).epsilon(1e-12));
  CHECK(d.ess() == Catch::Approx(1000.0).epsilon(1e-12));
}

TEST_CASE("weights stay normalised and ess in range") {
  CatMap cat;
  VonMisesChannel ch{{0, 1}, {3.0, 3.0}};
  Rng rng(2);
  ParticleCloud c = ParticleCloud::uniform_torus(5000, rng);
  for (int k = 0; k < 10; ++k) {
    c = particle_filter_step(c, {rng.uniform(0, 2 * M_PI), rng.uniform(0, 2 * M_PI)},
                             cat, ch, rng);
    double sum = 0.0;
    for (double w : c.weights) sum += w;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    CHECK(c.ess() >= 1.0);
    CHECK(c.ess() <= 5000.0 + 1e-9);
  }
}

TEST_CASE("systematic resampling is unbiased for weighted means") {
  Rng rng(77);
  int n = 400;
  ParticleCloud base = ParticleCloud::uniform_torus(n, rng);
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    base.weights[size_t(i)] = rng.uniform(0.01, 1.0);
    wsum += base.weights[size_t(i)];
  }
  for (double& w : base.weights) w /= wsum;

  TestFunction psi{"cos", [](const Pt& p) { return std::cos(2 * M_PI * p[0]); },
                   std::nullopt};
  double target = particle_expectation(base, psi);

  int reps = 200;
  std::vector<double> means(static_cast<size_t>(reps), 0.0);
  for (int r = 0; r < reps; ++r) {
    ParticleCloud c = base;
    systematic_resample(c, rng);
    means[size_t(r)] = particle_expectation(c, psi);
  }
  double avg = 0.0;
  for (double m : means) avg += m;
  avg /= reps;
  double var = 0.0;
  for (double m : means) var += (m - avg) * (m - avg);
  var /= (reps - 1);
  double se = std::sqrt(var / reps);
  CHECK(std::fabs(avg - target) < 3.0 * se + 1e-9);
}

TEST_CASE("empty cloud and vanished weights raise") {
  CatMap cat;
  VonMisesChannel ch{{0}, {2.0}};
  Rng rng(3);
  ParticleCloud empty;
  CHECK_THROWS_AS(particle_filter_step(empty, {0.0}, cat, ch, rng),
                  std::invalid_argument);
}

TEST_CASE("particle posterior agrees with the grid filter") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(64, 64);
  PointwiseBackend backend(cat);
  VonMisesChannel ch{{0, 1}, {2.0, 2.0}};
  ObservationSequence obs = simulate_joint(cat, ch, make_pt(0.35, 0.65), 10, 555);

  auto states = filter_run(DensityGrid::uniform(spec), obs, ch, backend);

  TestFunction psi{"cos", [](const Pt& p) { return std::cos(2 * M_PI * p[0]); },
                   std::nullopt};
  double grid_val = posterior_expectation(states.back(), psi);

  // a few particle replicates give the Monte Carlo scale
  int reps = 8, n = 20000;
  std::vector<double> vals(static_cast<size_t>(reps), 0.0);
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(1234, uint64_t(r)));
    ParticleCloud c = ParticleCloud::uniform_torus(n, rng);
    for (int k = 0; k < obs.size(); ++k) {
      c = particle_filter_step(c, obs.y[size_t(k)], cat, ch, rng);
    }
    vals[size_t(r)] = particle_expectation(c, psi);
  }
  double avg = 0.0;
  for (double v : vals) avg += v;
  avg /= reps;
  double var = 0.0;
  for (double v : vals) var += (v - avg) * (v - avg);
  var /= (reps - 1);
  double se_rep = std::sqrt(var);
  CHECK(std::fabs(grid_val - avg) < 4.0 * se_rep + 0.01);
}
