#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hypf {

/// Point in chart coordinates. Capacity 3; the chart decides how many
/// coordinates are live (2 for the torus, 3 for the solid torus).
struct Pt {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  double& operator[](int i) { return c[static_cast<size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<size_t>(i)]; }
};

inline Pt make_pt(double a, double b) { return Pt{{a, b, 0.0}}; }
inline Pt make_pt(double a, double b, double c) { return Pt{{a, b, c}}; }

enum class ChartKind { Torus2, SolidTorus };

inline int chart_dim(ChartKind k) { return k == ChartKind::Torus2 ? 2 : 3; }

/// Reduce to [0, 1).
inline double wrap_unit(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;  // guards x = -1e-17 rounding to 1.0
  return y;
}

/// Distance on the unit circle parameterised by [0, 1).
inline double circle_dist(double a, double b) {
  double d = std::fabs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d);
}

/// Signed displacement a -> b of minimal magnitude on the circle [0,1).
inline double circle_delta(double a, double b) {
  double d = wrap_unit(b) - wrap_unit(a);
  if (d > 0.5) d -= 1.0;
  if (d <= -0.5) d += 1.0;
  return d;
}

inline Pt wrap_point(ChartKind k, Pt p) {
  p[0] = wrap_unit(p[0]);
  if (k == ChartKind::Torus2) {
    p[1] = wrap_unit(p[1]);
  }
  return p;
}

/// Membership in the chart domain Q. The whole torus for the cat map chart;
/// angle times closed unit disk for the solid torus.
inline bool in_domain(ChartKind k, const Pt& p) {
  if (k == ChartKind::Torus2) return true;
  return p[1] * p[1] + p[2] * p[2] <= 1.0 + 1e-12;
}

/// Flat chart metric: minimal lattice translate on the torus, circle distance
/// in the angle combined with Euclidean disk distance on the solid torus.
inline double chart_distance(ChartKind k, const Pt& a, const Pt& b) {
  if (k == ChartKind::Torus2) {
    double d0 = circle_dist(a[0], b[0]);
    double d1 = circle_dist(a[1], b[1]);
    return std::sqrt(d0 * d0 + d1 * d1);
  }
  double dt = circle_dist(a[0], b[0]);
  double dx = a[1] - b[1];
  double dy = a[2] - b[2];
  return std::sqrt(dt * dt + dx * dx + dy * dy);
}

/// Uniform cell partition of a chart. Cells are indexed flat, row-major over
/// axes; cells whose center falls outside Q are excluded from the domain and
/// carry no mass. The reference measure m is normalised so that the domain
/// cells have total measure 1.
struct GridSpec {
  ChartKind chart = ChartKind::Torus2;
  std::array<int, 3> res{1, 1, 1};

  static GridSpec torus(int nx, int ny) {
    GridSpec g;
    g.chart = ChartKind::Torus2;
    g.res = {nx, ny, 1};
    g.init();
    return g;
  }

  static GridSpec solid_torus(int nt, int nxy) {
    GridSpec g;
    g.chart = ChartKind::SolidTorus;
    g.res = {nt, nxy, nxy};
    g.init();
    return g;
  }

  int dim() const { return chart_dim(chart); }

  int flat_count() const { return res[0] * res[1] * res[2]; }

  int domain_count() const { return domain_count_; }

  double cell_volume() const { return 1.0 / static_cast<double>(domain_count_); }

  /// Axis extent: [0,1) per torus axis, [-1,1) per disk axis.
  double axis_lo(int ax) const {
    return (chart == ChartKind::SolidTorus && ax > 0) ? -1.0 : 0.0;
  }
  double axis_hi(int ax) const {
    return (chart == ChartKind::SolidTorus && ax > 0) ? 1.0 : 1.0;
  }
  double axis_width(int ax) const { return axis_hi(ax) - axis_lo(ax); }

  Pt center(int flat) const {
    Pt p;
    std::array<int, 3> ix = unflatten(flat);
    for (int ax = 0; ax < dim(); ++ax) {
      p[ax] = axis_lo(ax) + (ix[static_cast<size_t>(ax)] + 0.5) * axis_width(ax) / res[static_cast<size_t>(ax)];
    }
    return p;
  }

  /// Flat cell index containing p; periodic axes wrap, disk axes clamp.
  int cell_of(const Pt& p) const {
    std::array<int, 3> ix{0, 0, 0};
    for (int ax = 0; ax < dim(); ++ax) {
      double u;
      if (ax == 0 || chart == ChartKind::Torus2) {
        u = wrap_unit(p[ax]);
      } else {
        u = (p[ax] - axis_lo(ax)) / axis_width(ax);
        u = std::min(std::max(u, 0.0), 1.0 - 1e-15);
      }
      int i = static_cast<int>(u * res[static_cast<size_t>(ax)]);
      if (i >= res[static_cast<size_t>(ax)]) i = res[static_cast<size_t>(ax)] - 1;
      ix[static_cast<size_t>(ax)] = i;
    }
    return flatten(ix);
  }

  bool cell_in_domain(int flat) const {
    if (chart == ChartKind::Torus2) return true;
    return domain_mask_[static_cast<size_t>(flat)];
  }

  int flatten(const std::array<int, 3>& ix) const {
    return (ix[0] * res[1] + ix[1]) * res[2] + ix[2];
  }

  std::array<int, 3> unflatten(int flat) const {
    std::array<int, 3> ix;
    ix[2] = flat % res[2];
    flat /= res[2];
    ix[1] = flat % res[1];
    ix[0] = flat / res[1];
    return ix;
  }

  bool operator==(const GridSpec& o) const {
    return chart == o.chart && res == o.res;
  }

  void init() {
    if (res[0] < 1 || res[1] < 1 || res[2] < 1) {
      throw std::invalid_argument("GridSpec: resolution must be >= 1 per axis");
    }
    if (chart == ChartKind::Torus2) {
      domain_count_ = flat_count();
      domain_mask_.clear();
      return;
    }
    domain_mask_.assign(static_cast<size_t>(flat_count()), false);
    domain_count_ = 0;
    for (int f = 0; f < flat_count(); ++f) {
      Pt c = center(f);
      if (c[1] * c[1] + c[2] * c[2] <= 1.0) {
        domain_mask_[static_cast<size_t>(f)] = true;
        ++domain_count_;
      }
    }
  }

 private:
  std::vector<bool> domain_mask_;
  int domain_count_ = 1;
};

}  // namespace hypf
