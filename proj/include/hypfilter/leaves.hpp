#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hypfilter/geometry.hpp"
#include "hypfilter/maps.hpp"

namespace hypf {

/// A violation of a positivity / cone-membership precondition.
struct cone_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniformly sampled local stable segment. Points are parameterised by
/// arclength s in [-half_length, half_length]: sample(i) = anchor + s_i d.
/// Distances between points of one leaf are measured along the leaf, i.e.
/// by |s_i - s_j|.
struct StableLeaf {
  Pt anchor;
  std::array<double, 3> dir{1.0, 0.0, 0.0};
  double half_length = 0.0;
  std::vector<double> params;  // arclength offsets, ascending
  std::vector<Pt> samples;     // wrapped chart points

  int size() const { return static_cast<int>(params.size()); }
  double spacing() const { return params.size() > 1 ? params[1] - params[0] : 0.0; }
};

inline StableLeaf stable_leaf_through(const ChartMap& map, const Pt& x,
                                      double half_length, int n_samples) {
  if (!(half_length > 0.0)) {
    throw std::invalid_argument("stable_leaf_through: half_length must be > 0");
  }
  if (n_samples < 2) {
    throw std::invalid_argument("stable_leaf_through: need at least 2 samples");
  }
  StableLeaf leaf;
  leaf.anchor = x;
  leaf.dir = map.stable_direction(x);
  leaf.half_length = half_length;
  leaf.params.resize(static_cast<size_t>(n_samples));
  leaf.samples.resize(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    double s = -half_length + 2.0 * half_length * i / (n_samples - 1);
    Pt p = x;
    for (int ax = 0; ax < 3; ++ax) p[ax] += s * leaf.dir[static_cast<size_t>(ax)];
    p = wrap_point(map.chart(), p);
    if (!in_domain(map.chart(), p)) {
      throw std::domain_error("stable_leaf_through: leaf leaves the chart domain");
    }
    leaf.params[static_cast<size_t>(i)] = s;
    leaf.samples[static_cast<size_t>(i)] = p;
  }
  return leaf;
}

/// Projection between two nearby parallel leaves together with its sampled
/// Jacobian. The projection identifies equal arclength parameters, which for
/// parallel segments is the transversal translation; its Jacobian is then
/// identically 1.
struct Holonomy {
  StableLeaf source;            // delta
  StableLeaf target;            // gamma
  std::vector<double> wp;       // |det Dpi| at the source samples
  double leaf_distance = 0.0;   // sup over samples of d(x, pi(x))

  Pt project(int i) const { return target.samples[static_cast<size_t>(i)]; }
};

inline Holonomy holonomy_between(const ChartMap& map, const StableLeaf& delta,
                                 const StableLeaf& gamma) {
  double dot = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    dot += delta.dir[static_cast<size_t>(ax)] * gamma.dir[static_cast<size_t>(ax)];
  }
  if (std::fabs(std::fabs(dot) - 1.0) > 1e-9) {
    throw std::domain_error("holonomy_between: leaves are not parallel");
  }
  if (delta.size() != gamma.size() || std::fabs(delta.half_length - gamma.half_length) > 1e-12) {
    throw std::invalid_argument("holonomy_between: leaves must share the sampling layout");
  }
  Holonomy h;
  h.source = delta;
  h.target = gamma;
  h.wp.assign(static_cast<size_t>(delta.size()), 1.0);
  double dmax = 0.0;
  for (int i = 0; i < delta.size(); ++i) {
    double d = chart_distance(map.chart(), delta.samples[static_cast<size_t>(i)],
                              gamma.samples[static_cast<size_t>(i)]);
    dmax = std::max(dmax, d);
  }
  if (dmax > 0.25) {
    throw std::domain_error("holonomy_between: leaves too far apart for a chart holonomy");
  }
  h.leaf_distance = dmax;
  return h;
}

/// Trapezoid integral of phi * rho along the leaf. rho must be strictly
/// positive at every sample.
inline double leaf_integrate(const StableLeaf& leaf, const std::vector<double>& phi,
                             const std::vector<double>& rho) {
  if (static_cast<int>(phi.size()) != leaf.size() ||
      static_cast<int>(rho.size()) != leaf.size()) {
    throw std::invalid_argument("leaf_integrate: sample count mismatch");
  }
  double acc = 0.0;
  for (int i = 0; i + 1 < leaf.size(); ++i) {
    double r0 = rho[static_cast<size_t>(i)], r1 = rho[static_cast<size_t>(i + 1)];
    if (!(r0 > 0.0) || !(r1 > 0.0)) {
      throw cone_error("leaf_integrate: nonpositive density sample");
    }
    double w = leaf.params[static_cast<size_t>(i + 1)] - leaf.params[static_cast<size_t>(i)];
    acc += 0.5 * w * (phi[static_cast<size_t>(i)] * r0 + phi[static_cast<size_t>(i + 1)] * r1);
  }
  return acc;
}

inline std::vector<double> sample_on_leaf(const StableLeaf& leaf,
                                          const std::function<double(const Pt&)>& f) {
  std::vector<double> out(static_cast<size_t>(leaf.size()));
  for (int i = 0; i < leaf.size(); ++i) {
    out[static_cast<size_t>(i)] = f(leaf.samples[static_cast<size_t>(i)]);
  }
  return out;
}

/// Pullback of rho under the holonomy: (pi^* rho)(y) = rho(pi(y)) |det Dpi(y)|.
inline std::vector<double> holonomy_pullback(const Holonomy& h, const std::vector<double>& rho) {
  if (rho.size() != h.wp.size()) {
    throw std::invalid_argument("holonomy_pullback: sample count mismatch");
  }
  std::vector<double> out(rho.size());
  for (size_t i = 0; i < rho.size(); ++i) out[i] = rho[i] * h.wp[i];
  return out;
}

/// Preimage of a leaf under the map: the segment through f^{-1}(anchor) whose
/// image is the given leaf. Stable segments stretch by 1/lambda_s under the
/// inverse, so a preimage leaf covering the original has half_length / lambda_s.
inline StableLeaf preimage_leaf(const ChartMap& map, const StableLeaf& leaf) {
  auto pre = map.inverse(leaf.anchor);
  if (!pre) {
    throw std::domain_error("preimage_leaf: anchor not in the image of Q");
  }
  return stable_leaf_through(map, *pre, leaf.half_length / map.constants().lambda_s,
                             leaf.size());
}

/// Density transported to a preimage leaf by one filter step:
///   rho_j(x) = |det Df|_leaf(x)| / |det Df(x)| * rho(f(x)) * g(f(x)),
/// where rho lives on the image leaf and g is the likelihood factor
/// (pass g = 1 for the plain transfer operator). The leaf Jacobian along a
/// stable segment is the arclength stretch factor lambda_s.
inline std::vector<double> leaf_density_pushforward(
    const ChartMap& map, const StableLeaf& preimage,
    const std::function<double(const Pt&)>& rho_on_image,
    const std::function<double(const Pt&)>& g) {
  std::vector<double> out(static_cast<size_t>(preimage.size()));
  double leaf_jac = map.constants().lambda_s;
  for (int i = 0; i < preimage.size(); ++i) {
    Pt x = preimage.samples[static_cast<size_t>(i)];
    Pt fx = map.forward(x);
    out[static_cast<size_t>(i)] =
        leaf_jac / map.jacobian_det(x) * rho_on_image(fx) * g(fx);
  }
  return out;
}

}  // namespace hypf
