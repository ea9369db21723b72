#pragma once

#include <Eigen/Sparse>
#include <atomic>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hypfilter/density.hpp"
#include "hypfilter/geometry.hpp"
#include "hypfilter/maps.hpp"

namespace hypf {

/// Exact pullback representation of the transfer operator evaluated at cell
/// centers: (P phi)(y) = phi(f^{-1}(y)) / |det Df(f^{-1}(y))| on f(Q), zero
/// outside. phi is read through multilinear interpolation of the grid.
inline DensityGrid transfer_pointwise(const ChartMap& map, const DensityGrid& phi) {
  DensityGrid out(phi.spec);
  for (int c = 0; c < phi.spec.flat_count(); ++c) {
    if (!phi.spec.cell_in_domain(c)) continue;
    auto pre = map.inverse(phi.spec.center(c));
    if (!pre) continue;
    out.v[static_cast<size_t>(c)] = interpolate(phi, *pre) / map.jacobian_det(*pre);
  }
  return out;
}

/// Same pullback with phi given in closed form; no interpolation error.
inline DensityGrid transfer_pointwise_fn(const ChartMap& map, const GridSpec& spec,
                                         const std::function<double(const Pt&)>& phi) {
  DensityGrid out(spec);
  for (int c = 0; c < spec.flat_count(); ++c) {
    if (!spec.cell_in_domain(c)) continue;
    auto pre = map.inverse(spec.center(c));
    if (!pre) continue;
    out.v[static_cast<size_t>(c)] = phi(*pre) / map.jacobian_det(*pre);
  }
  return out;
}

/// Cell-to-cell transition matrix P_ij ~ m(B_i n f^{-1}(B_j)) / m(B_i),
/// estimated on a fixed subsample lattice (no randomness). Rows over domain
/// cells sum to 1; rows of cells outside the chart domain are empty.
struct UlamMatrix {
  Eigen::SparseMatrix<double, Eigen::RowMajor> P;

  int dimension() const { return static_cast<int>(P.rows()); }
  long nonzeros() const { return static_cast<long>(P.nonZeros()); }

  /// Pushforward of a density vector: out_j = sum_i d_i P_ij.
  DensityGrid apply(const DensityGrid& d) const {
    DensityGrid out(d.spec);
    for (int i = 0; i < P.outerSize(); ++i) {
      double di = d.v[static_cast<size_t>(i)];
      if (di == 0.0) continue;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(P, i); it; ++it) {
        out.v[static_cast<size_t>(it.col())] += di * it.value();
      }
    }
    return out;
  }

  std::vector<double> row_sums() const {
    std::vector<double> s(static_cast<size_t>(P.rows()), 0.0);
    for (int i = 0; i < P.outerSize(); ++i) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(P, i); it; ++it) {
        s[static_cast<size_t>(i)] += it.value();
      }
    }
    return s;
  }
};

constexpr long kUlamNonzeroLimit = 10'000'000;

inline UlamMatrix ulam_build(const ChartMap& map, const GridSpec& spec,
                             int subsamples_per_axis = 32, int n_threads = 1) {
  if (spec.res[0] < 2 || spec.res[1] < 2) {
    throw std::invalid_argument("ulam_build: resolution must be >= 2 per axis");
  }
  if (spec.chart != map.chart()) {
    throw std::invalid_argument("ulam_build: grid chart does not match the map");
  }
  const int d = spec.dim();
  const int s = subsamples_per_axis;
  const int n_cells = spec.flat_count();
  const int sub_total = d == 2 ? s * s : s * s * s;

  // per-row accumulation keeps the triplet order deterministic
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<size_t>(n_cells));
  std::atomic<long> nnz_guard{0};
  auto work = [&](int lo, int hi) {
    std::vector<int> hits;
    for (int i = lo; i < hi; ++i) {
      if (nnz_guard.load(std::memory_order_relaxed) > kUlamNonzeroLimit) return;
      if (!spec.cell_in_domain(i)) continue;
      Pt corner = spec.center(i);
      std::array<double, 3> step{0.0, 0.0, 0.0};
      for (int ax = 0; ax < d; ++ax) {
        double w = spec.axis_width(ax) / spec.res[static_cast<size_t>(ax)];
        corner[ax] -= 0.5 * w;
        step[static_cast<size_t>(ax)] = w / s;
      }
      hits.assign(static_cast<size_t>(sub_total), -1);
      int used = 0;
      int hit_count = 0;
      for (int k = 0; k < sub_total; ++k) {
        Pt p = corner;
        int rem = k;
        for (int ax = d - 1; ax >= 0; --ax) {
          int q = rem % s;
          rem /= s;
          p[ax] += (q + 0.5) * step[static_cast<size_t>(ax)];
        }
        if (!in_domain(spec.chart, p)) continue;
        ++used;
        Pt q = map.forward(p);
        hits[static_cast<size_t>(hit_count++)] = spec.cell_of(q);
      }
      if (used == 0) continue;
      std::sort(hits.begin(), hits.begin() + hit_count);
      auto& row = rows[static_cast<size_t>(i)];
      int j = 0;
      while (j < hit_count) {
        int cell = hits[static_cast<size_t>(j)];
        int cnt = 0;
        while (j < hit_count && hits[static_cast<size_t>(j)] == cell) {
          ++cnt;
          ++j;
        }
        row.emplace_back(cell, static_cast<double>(cnt) / used);
      }
      nnz_guard.fetch_add(static_cast<long>(row.size()), std::memory_order_relaxed);
    }
  };

  if (n_threads <= 1) {
    work(0, n_cells);
  } else {
    std::vector<std::thread> pool;
    int chunk = (n_cells + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      int lo = t * chunk;
      int hi = std::min(n_cells, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  if (nnz_guard.load() > kUlamNonzeroLimit) {
    throw std::runtime_error("ulam_build: nonzero count exceeds the 1e7 guard");
  }
  long nnz = 0;
  for (const auto& r : rows) nnz += static_cast<long>(r.size());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(nnz));
  for (int i = 0; i < n_cells; ++i) {
    for (const auto& [j, w] : rows[static_cast<size_t>(i)]) {
      trips.emplace_back(i, j, w);
    }
  }
  UlamMatrix U;
  U.P.resize(n_cells, n_cells);
  U.P.setFromTriplets(trips.begin(), trips.end());
  return U;
}

/// Common interface for the two transfer backends.
class TransferBackend {
 public:
  virtual ~TransferBackend() = default;
  virtual DensityGrid apply(const DensityGrid& d) const = 0;
};

class PointwiseBackend final : public TransferBackend {
 public:
  explicit PointwiseBackend(const ChartMap& map) : map_(&map) {}
  DensityGrid apply(const DensityGrid& d) const override {
    return transfer_pointwise(*map_, d);
  }

 private:
  const ChartMap* map_;
};

class UlamBackend final : public TransferBackend {
 public:
  explicit UlamBackend(UlamMatrix m) : u_(std::move(m)) {}
  DensityGrid apply(const DensityGrid& d) const override { return u_.apply(d); }
  const UlamMatrix& matrix() const { return u_; }

 private:
  UlamMatrix u_;
};

}  // namespace hypf
