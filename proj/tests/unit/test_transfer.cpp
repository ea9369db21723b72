#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hypfilter/density.hpp"
#include "hypfilter/maps.hpp"
#include "hypfilter/rng.hpp"
#include "hypfilter/transfer.hpp"

using namespace hypf;

namespace {

// random real trigonometric polynomial of bounded degree on the 2-torus,
// offset to stay positive
struct TrigPoly {
  struct Mode {
    int kx, ky;
    double a, b;
  };
  double c0 = 2.0;
  std::vector<Mode> modes;

  double operator()(const Pt& p) const {
    double acc = c0;
    for (const auto& m : modes) {
      double ang = 2.0 * M_PI * (m.kx * p[0] + m.ky * p[1]);
      acc += m.a * std::cos(ang) + m.b * std::sin(ang);
    }
    return acc;
  }

  static TrigPoly random(Rng& rng, int deg = 3) {
    TrigPoly t;
    double total = 0.0;
    for (int kx = 0; kx <= deg; ++kx) {
      for (int ky = -deg; ky <= deg; ++ky) {
        if (kx == 0 && ky <= 0) continue;
        if (rng.uniform() < 0.6) continue;
        Mode m{kx, ky, rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
        t.modes.push_back(m);
        total += std::fabs(m.a) + std::fabs(m.b);
      }
    }
    t.c0 = total + 0.5;
    return t;
  }
};

}  // namespace

TEST_CASE("cat map preserves the uniform density") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(32, 32);
  DensityGrid one = DensityGrid::uniform(spec);
  DensityGrid img = transfer_pointwise(cat, one);
  for (int c = 0; c < spec.flat_count(); ++c) {
    CHECK(img.v[size_t(c)] == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("transfer duality on random smooth pairs") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(256, 256);
  Rng rng(4242);
  for (int rep = 0; rep < 5; ++rep) {
    TrigPoly phi = TrigPoly::random(rng);
    TrigPoly psi = TrigPoly::random(rng);
    DensityGrid pphi = transfer_pointwise_fn(cat, spec, [&](const Pt& p) { return phi(p); });
    double lhs = integrate([&](const Pt& p) { return psi(p); }, pphi);
    double rhs = integrate_fn(
        spec, [&](const Pt& p) { return psi(cat.forward(p)) * phi(p); });
    CHECK(lhs == Catch::Approx(rhs).margin(1e-6));
  }
}

TEST_CASE("transfer positivity and mass on grid input") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(256, 256);
  Rng rng(7);
  TrigPoly phi = TrigPoly::random(rng);
  DensityGrid g = DensityGrid::from_function(spec, [&](const Pt& p) { return phi(p); });
  DensityGrid img = transfer_pointwise(cat, g);
  double lo = img.min_value();
  CHECK(lo >= 0.0);
  CHECK(img.mass() == Catch::Approx(g.mass()).margin(1e-6));
}

TEST_CASE("solenoid transfer vanishes off the image tube") {
  Solenoid sol;
  GridSpec spec = GridSpec::solid_torus(8, 24);
  DensityGrid one = DensityGrid::uniform(spec);
  DensityGrid img = transfer_pointwise(sol, one);
  // the disk center is not in the image
  int c = spec.cell_of(make_pt(0.4, 0.0, 0.0));
  CHECK(img.v[size_t(c)] == 0.0);
  // a point on the image tube is: angle 0.4 pulls back to t = 0.2, and the
  // branch-t tube is centered on (cos(2 pi t)/2, sin(2 pi t)/2)
  double ang = 2.0 * M_PI * 0.2;
  int c2 = spec.cell_of(make_pt(0.4, 0.5 * std::cos(ang), 0.5 * std::sin(ang)));
  CHECK(img.v[size_t(c2)] > 0.0);
}

TEST_CASE("ulam rows are stochastic for the cat map") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(16, 16);
  UlamMatrix U = ulam_build(cat, spec, 16);
  auto sums = U.row_sums();
  for (double s : sums) CHECK(s == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("ulam at resolution 2x2 maps uniform to uniform") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(2, 2);
  UlamMatrix U = ulam_build(cat, spec, 32);
  DensityGrid one = DensityGrid::uniform(spec);
  DensityGrid img = U.apply(one);
  for (double v : img.v) CHECK(v == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("ulam self-convergence toward the pointwise operator") {
  CatMap cat;
  Rng rng(99);
  TrigPoly phi = TrigPoly::random(rng, 2);
  std::vector<double> errs;
  for (int res : {32, 64, 128}) {
    GridSpec spec = GridSpec::torus(res, res);
    DensityGrid g = DensityGrid::from_function(spec, [&](const Pt& p) { return phi(p); });
    UlamMatrix U = ulam_build(cat, spec, 16);
    DensityGrid viaU = U.apply(g);
    DensityGrid viaP = transfer_pointwise_fn(cat, spec, [&](const Pt& p) { return phi(p); });
    errs.push_back(l1_distance(viaU, viaP));
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  double rate01 = std::log2(errs[0] / errs[1]);
  double rate12 = std::log2(errs[1] / errs[2]);
  CHECK(rate01 >= 0.8);
  CHECK(rate12 >= 0.8);
}

TEST_CASE("ulam solenoid rows renormalise inside the domain") {
  Solenoid sol;
  GridSpec spec = GridSpec::solid_torus(8, 16);
  UlamMatrix U = ulam_build(sol, spec, 6);
  auto sums = U.row_sums();
  for (int f = 0; f < spec.flat_count(); ++f) {
    if (spec.cell_in_domain(f)) {
      CHECK(sums[size_t(f)] == Catch::Approx(1.0).margin(1e-10));
    } else {
      CHECK(sums[size_t(f)] == 0.0);
    }
  }
  // pushforward preserves mass
  DensityGrid one = DensityGrid::uniform(spec);
  one.normalize();
  DensityGrid img = U.apply(one);
  CHECK(img.mass() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("ulam build refuses oversized matrices") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(2048, 2048);
  CHECK_THROWS_AS(ulam_build(cat, spec, 2, 4), std::runtime_error);
}

TEST_CASE("integrate basics") {
  GridSpec spec = GridSpec::torus(64, 64);
  DensityGrid p = DensityGrid::uniform(spec);
  p.normalize();
  CHECK(integrate([](const Pt&) { return 1.0; }, p) == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(integrate([](const Pt&) { return 3.25; }, p) ==
        Catch::Approx(3.25 * p.mass()).epsilon(1e-13));
  // odd mode against the uniform density: midpoint symmetry kills it
  double v = integrate([](const Pt& q) { return std::sin(2.0 * M_PI * q[0]); }, p);
  CHECK(std::fabs(v) < 1e-12);
}
