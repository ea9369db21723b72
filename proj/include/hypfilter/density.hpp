#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hypfilter/geometry.hpp"

namespace hypf {

/// Nonnegative density with respect to the normalised reference measure m on
/// the grid cells. Values on cells outside the chart domain stay 0.
struct DensityGrid {
  GridSpec spec;
  std::vector<double> v;

  DensityGrid() = default;
  explicit DensityGrid(const GridSpec& s, double fill = 0.0)
      : spec(s), v(static_cast<size_t>(s.flat_count()), 0.0) {
    if (fill != 0.0) {
      for (int f = 0; f < spec.flat_count(); ++f) {
        if (spec.cell_in_domain(f)) v[static_cast<size_t>(f)] = fill;
      }
    }
  }

  static DensityGrid uniform(const GridSpec& s) { return DensityGrid(s, 1.0); }

  static DensityGrid from_function(const GridSpec& s,
                                   const std::function<double(const Pt&)>& f) {
    DensityGrid g(s);
    for (int c = 0; c < s.flat_count(); ++c) {
      if (s.cell_in_domain(c)) g.v[static_cast<size_t>(c)] = f(s.center(c));
    }
    return g;
  }

  double mass() const {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc * spec.cell_volume();
  }

  void normalize() {
    double m = mass();
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw std::runtime_error("DensityGrid::normalize: nonpositive or non-finite mass");
    }
    for (double& x : v) x /= m;
  }

  double min_value() const {
    double lo = std::numeric_limits<double>::infinity();
    for (int f = 0; f < spec.flat_count(); ++f) {
      if (spec.cell_in_domain(f)) lo = std::min(lo, v[static_cast<size_t>(f)]);
    }
    return lo;
  }
};

/// Midpoint-rule pairing  sum psi(center) * density * cellvol.
inline double integrate(const std::function<double(const Pt&)>& psi,
                        const DensityGrid& p) {
  double acc = 0.0;
  for (int c = 0; c < p.spec.flat_count(); ++c) {
    double val = p.v[static_cast<size_t>(c)];
    if (val != 0.0) acc += psi(p.spec.center(c)) * val;
  }
  return acc * p.spec.cell_volume();
}

/// Midpoint quadrature of a plain function over the domain.
inline double integrate_fn(const GridSpec& s, const std::function<double(const Pt&)>& f) {
  double acc = 0.0;
  for (int c = 0; c < s.flat_count(); ++c) {
    if (s.cell_in_domain(c)) acc += f(s.center(c));
  }
  return acc * s.cell_volume();
}

/// Total variation distance (1/2) ||p - q||_L1.
inline double tv_distance(const DensityGrid& a, const DensityGrid& b) {
  if (!(a.spec == b.spec)) {
    throw std::invalid_argument("tv_distance: grid mismatch");
  }
  double acc = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) acc += std::fabs(a.v[i] - b.v[i]);
  return 0.5 * acc * a.spec.cell_volume();
}

inline double l1_distance(const DensityGrid& a, const DensityGrid& b) {
  return 2.0 * tv_distance(a, b);
}

inline double sup_distance(const DensityGrid& a, const DensityGrid& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) acc = std::max(acc, std::fabs(a.v[i] - b.v[i]));
  return acc;
}

/// Piecewise-multilinear evaluation of a grid density. Periodic across torus
/// axes; outside the chart domain the density is 0.
inline double interpolate(const DensityGrid& g, const Pt& p) {
  const GridSpec& s = g.spec;
  int d = s.dim();
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int ax = 0; ax < d; ++ax) {
    int n = s.res[static_cast<size_t>(ax)];
    double u;
    if (ax == 0 || s.chart == ChartKind::Torus2) {
      u = wrap_unit(p[ax]) * n - 0.5;  // relative to cell centers
      if (u < 0.0) u += n;
    } else {
      u = (p[ax] - s.axis_lo(ax)) / s.axis_width(ax) * n - 0.5;
    }
    double fl = std::floor(u);
    base[static_cast<size_t>(ax)] = static_cast<int>(fl);
    frac[static_cast<size_t>(ax)] = u - fl;
  }
  auto value_at = [&](const std::array<int, 3>& ix) -> double {
    std::array<int, 3> w{0, 0, 0};
    for (int ax = 0; ax < d; ++ax) {
      int n = s.res[static_cast<size_t>(ax)];
      int i = ix[static_cast<size_t>(ax)];
      if (ax == 0 || s.chart == ChartKind::Torus2) {
        i = ((i % n) + n) % n;
      } else if (i < 0 || i >= n) {
        return 0.0;
      }
      w[static_cast<size_t>(ax)] = i;
    }
    int flat = s.flatten(w);
    if (!s.cell_in_domain(flat)) return 0.0;
    return g.v[static_cast<size_t>(flat)];
  };
  double acc = 0.0;
  int corners = 1 << d;
  for (int m = 0; m < corners; ++m) {
    std::array<int, 3> ix = base;
    double w = 1.0;
    for (int ax = 0; ax < d; ++ax) {
      if (m & (1 << ax)) {
        ix[static_cast<size_t>(ax)] += 1;
        w *= frac[static_cast<size_t>(ax)];
      } else {
        w *= 1.0 - frac[static_cast<size_t>(ax)];
      }
    }
    if (w != 0.0) acc += w * value_at(ix);
  }
  return acc;
}

}  // namespace hypf
