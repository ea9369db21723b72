#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hypfilter/channel.hpp"
#include "hypfilter/leaves.hpp"
#include "hypfilter/maps.hpp"
#include "hypfilter/projective.hpp"
#include "hypfilter/rng.hpp"
#include "hypfilter/testfn.hpp"
#include "hypfilter/transfer.hpp"

using namespace hypf;

namespace {

std::vector<double> positive_vector(Rng& rng, int n) {
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = std::exp(rng.uniform(-1.0, 1.0));
  return v;
}

// log-Lipschitz function on a leaf with Lipschitz constant <= L
std::vector<double> leaf_cone_member(Rng& rng, const StableLeaf& leaf, double L) {
  double amp = rng.uniform(0.2, 1.0);
  double freq = rng.uniform(0.3, 1.0);
  double phase = rng.uniform(0.0, 2.0 * M_PI);
  double scale = L * amp / freq;  // |d/ds scale*sin(freq s + phase)| <= L*amp
  std::vector<double> v(static_cast<size_t>(leaf.size()));
  for (int i = 0; i < leaf.size(); ++i) {
    v[size_t(i)] = std::exp(scale * std::sin(freq * leaf.params[size_t(i)] + phase));
  }
  return v;
}

}  // namespace

TEST_CASE("theta_plus on simple inputs") {
  std::vector<double> ones(64, 1.0);
  CHECK(theta_plus(ones, ones).theta == 0.0);

  std::vector<double> three(64, 3.0);
  CHECK(theta_plus(ones, three).theta == Catch::Approx(0.0).margin(1e-15));

  // 2 + sin over a fine circle sampling: sup/inf ratio is 3
  std::vector<double> f(4096), g(4096, 1.0);
  for (int i = 0; i < 4096; ++i) {
    f[size_t(i)] = 2.0 + std::sin(2.0 * M_PI * (i + 0.5) / 4096.0);
  }
  CHECK(theta_plus(g, f).theta == Catch::Approx(std::log(3.0)).epsilon(1e-6));

  std::vector<double> bad(64, 1.0);
  bad[5] = -2.0;
  CHECK_THROWS_AS(theta_plus(ones, bad), cone_error);
}

TEST_CASE("projective metric axioms on samples") {
  Rng rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    auto v1 = positive_vector(rng, 40);
    auto v2 = positive_vector(rng, 40);
    auto v3 = positive_vector(rng, 40);
    double d12 = theta_plus(v1, v2).theta;
    double d21 = theta_plus(v2, v1).theta;
    CHECK(std::fabs(d12 - d21) < 1e-12);
    double d13 = theta_plus(v1, v3).theta;
    double d23 = theta_plus(v2, v3).theta;
    CHECK(d13 <= d12 + d23 + 1e-12);

    // projectivity: scaling either argument moves theta by rounding only
    auto v1s = v1;
    auto v2s = v2;
    for (auto& x : v1s) x *= 0.4;
    for (auto& x : v2s) x *= 7.25;
    CHECK(std::fabs(theta_plus(v1s, v2s).theta - theta_plus(v1, v2).theta) < 1e-12);

    // zero iff proportional
    auto prop = v1;
    for (auto& x : prop) x *= 0.37;
    CHECK(theta_plus(v1, prop).theta < 1e-10);
    if (d12 > 1e-10) CHECK(theta_plus(v1, v2).theta > 0.0);
  }
}

TEST_CASE("holder membership on a leaf") {
  CatMap cat;
  StableLeaf leaf = stable_leaf_through(cat, make_pt(0.3, 0.4), 0.5, 64);

  std::vector<double> c(64, 2.5);
  CHECK(holder_membership(leaf.params, c, 0.01, 1.0).member);
  CHECK(holder_membership(leaf.params, c, 10.0, 0.5).member);

  // rho = exp(a s) sits exactly on the boundary of the (a, 1) cone
  double a = 1.3;
  std::vector<double> expa(64), expb(64);
  for (int i = 0; i < 64; ++i) {
    expa[size_t(i)] = std::exp(a * leaf.params[size_t(i)]);
    expb[size_t(i)] = std::exp((a + 0.1) * leaf.params[size_t(i)]);
  }
  CHECK(holder_membership(leaf.params, expa, a, 1.0).member);
  auto rejected = holder_membership(leaf.params, expb, a, 1.0);
  CHECK_FALSE(rejected.member);
  CHECK(rejected.worst_slack < 0.0);
}

TEST_CASE("theta_holder basics and domination of theta_plus") {
  CatMap cat;
  StableLeaf leaf = stable_leaf_through(cat, make_pt(0.1, 0.9), 0.4, 48);
  Rng rng(23);
  double a = 2.0, mu = 1.0;

  auto rho = leaf_cone_member(rng, leaf, 0.5 * a);
  CHECK(theta_holder(leaf.params, rho, rho, a, mu).theta == Catch::Approx(0.0).margin(1e-12));
  auto rho_scaled = rho;
  for (auto& x : rho_scaled) x *= 11.0;
  CHECK(theta_holder(leaf.params, rho, rho_scaled, a, mu).theta ==
        Catch::Approx(0.0).margin(1e-12));

  for (int rep = 0; rep < 50; ++rep) {
    auto r1 = leaf_cone_member(rng, leaf, 0.5 * a);
    auto r2 = leaf_cone_member(rng, leaf, 0.5 * a);
    MetricReport ha = theta_holder(leaf.params, r1, r2, a, mu);
    MetricReport hp = theta_plus(r1, r2);
    REQUIRE(ha.finite());
    CHECK(ha.theta >= hp.theta - 1e-12);
  }

  // inputs outside the closed cone yield the infinite marker
  std::vector<double> steep(48);
  for (int i = 0; i < 48; ++i) steep[size_t(i)] = std::exp(3.0 * a * leaf.params[size_t(i)]);
  auto inner = leaf_cone_member(rng, leaf, 0.3 * a);
  MetricReport inf_rep = theta_holder(leaf.params, steep, inner, a, mu);
  CHECK_FALSE(inf_rep.finite());
}

TEST_CASE("birkhoff bound") {
  CHECK(birkhoff_bound(0.0) == 0.0);
  CHECK(birkhoff_bound(std::log(3.0)) == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(birkhoff_bound(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK_THROWS_AS(birkhoff_bound(-1.0), std::invalid_argument);
}

TEST_CASE("tau bounds and the analytic diameter") {
  // lambda -> 0 collapses both bounds to 1 and D(a) to 4a
  TauBounds t0 = tau_bounds(1e-6);
  CHECK(t0.tau1 == Catch::Approx(1.0).margin(1e-3));
  CHECK(t0.tau2 == Catch::Approx(1.0).margin(1e-3));
  CHECK(analytic_diameter(2.0, 1e-6) == Catch::Approx(8.0).margin(1e-3));

  for (double l : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    TauBounds t = tau_bounds(l);
    CHECK(t.tau1 > 0.0);
    CHECK(t.tau1 < 1.0);
    CHECK(t.tau2 > 1.0);
    // dense scans bracket both extremal values
    double scan_min = 1e300, scan_max = 0.0;
    for (double s = 1e-6; s < 40.0; s *= 1.15) {
      double z = std::exp(s);
      double r = (z - std::pow(z, l)) / (z - std::pow(z, -l));
      scan_min = std::min(scan_min, r);
      scan_max = std::max(scan_max, 1.0 / r);
    }
    CHECK(t.tau1 <= scan_min + 1e-9);
    CHECK(t.tau2 >= scan_max - 1e-9);
  }
}

TEST_CASE("sampled leaf-cone diameter stays below the analytic bound") {
  CatMap cat;
  StableLeaf leaf = stable_leaf_through(cat, make_pt(0.6, 0.2), 0.45, 48);
  Rng rng(31);
  double a = 2.0, lambda = 0.5, mu = 1.0;

  std::vector<std::vector<double>> members;
  for (int i = 0; i < 24; ++i) {
    auto r = leaf_cone_member(rng, leaf, lambda * a);
    REQUIRE(holder_membership(leaf.params, r, lambda * a, mu).member);
    members.push_back(r);
  }
  auto metric = [&](std::span<const double> f, std::span<const double> g) {
    return theta_holder(leaf.params, f, g, a, mu);
  };
  DiameterEstimate est = sampled_diameter(members, metric);
  CHECK(est.infinite_pairs == 0);
  CHECK(est.sampled <= analytic_diameter(a, lambda));
  CHECK(est.sampled > 0.0);
}

TEST_CASE("positive filter matrices contract theta_plus") {
  CatMap cat;
  GridSpec spec = GridSpec::torus(32, 32);
  UlamMatrix U = ulam_build(cat, spec, 8);
  VonMisesChannel ch{{0, 1}, {2.0, 2.0}};
  std::vector<double> y{1.3, 4.0};

  auto apply_filter = [&](const DensityGrid& d) {
    DensityGrid out = U.apply(d);
    for (int c = 0; c < spec.flat_count(); ++c) {
      out.v[size_t(c)] *= std::exp(log_likelihood_base(ch, y, spec.center(c)));
    }
    return out;
  };

  // a spread of gentle to steep members, so the sampled image diameter is a
  // usable stand-in for the true one
  Rng rng(47);
  std::vector<DensityGrid> inputs, images;
  for (int i = 0; i < 20; ++i) {
    double amp = rng.uniform(0.3, 3.0);
    DensityGrid d = LogTrigPrior::random(rng, 4, 2, amp).discretize(spec);
    inputs.push_back(d);
    images.push_back(apply_filter(d));
  }

  double dhat = 0.0;
  for (size_t i = 0; i < images.size(); ++i) {
    for (size_t j = i + 1; j < images.size(); ++j) {
      dhat = std::max(dhat, theta_plus_grid(images[i], images[j]).theta);
    }
  }
  double factor = birkhoff_bound(dhat);
  for (size_t i = 0; i < images.size(); ++i) {
    for (size_t j = i + 1; j < images.size(); ++j) {
      double before = theta_plus_grid(inputs[i], inputs[j]).theta;
      double after = theta_plus_grid(images[i], images[j]).theta;
      CHECK(after <= before + 1e-12);           // weak contraction always
      CHECK(after <= factor * before + 1e-10);  // strict with the measured diameter
    }
  }
}

TEST_CASE("conditionB inequality on leaf triples") {
  CatMap cat;
  StableLeaf leaf = stable_leaf_through(cat, make_pt(0.2, 0.8), 0.4, 48);
  Rng rng(53);
  double a = 2.0, mu = 1.0;

  // identical densities: both sides coincide
  auto rho = leaf_cone_member(rng, leaf, 0.5 * a);
  std::vector<double> phi(48, 1.0);
  ConditionBReport eq = conditionB_check(leaf, phi, rho, rho, a, mu);
  REQUIRE(eq.conclusive);
  CHECK(eq.lhs == Catch::Approx(eq.rhs).epsilon(1e-12));

  int held = 0, total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto r1 = leaf_cone_member(rng, leaf, 0.5 * a);
    auto r2 = leaf_cone_member(rng, leaf, 0.5 * a);
    // positive observables are in particular valid test integrands
    std::vector<double> f(48);
    for (int i = 0; i < 48; ++i) {
      f[size_t(i)] = 0.3 + rng.uniform() + std::fabs(std::sin(3.0 * leaf.params[size_t(i)]));
    }
    ConditionBReport rep_b = conditionB_check(leaf, f, r1, r2, a, mu);
    if (!rep_b.conclusive) continue;
    ++total;
    if (rep_b.holds) ++held;
    CHECK(rep_b.slack >= -1e-12);
  }
  CHECK(held == total);
  CHECK(total > 150);
}
