#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "hypfilter/geometry.hpp"

namespace hypf {

/// Per-map regularity data used by the cone machinery.
///   lambda_s : uniform one-step contraction factor along stable leaves
///   lambda_u : uniform one-step contraction of distances between preimage
///              leaves (the leaf-space map expands by 1/lambda_u)
///   K1, K2, K3 : Lipschitz constants of log|det Df|, log|det Df restricted
///                to stable leaves|, and of f itself (chart metric)
///   a0, nu0 : holonomy regularity (log of the holonomy Jacobian is
///             (a0, nu0)-Hoelder)
struct MapConstants {
  double lambda_s = 0.5;
  double lambda_u = 0.5;
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 1.0;
  double a0 = 0.0;
  double nu0 = 1.0;
};

/// A diffeomorphism of a chart domain Q with exact inverse and Jacobian.
class ChartMap {
 public:
  virtual ~ChartMap() = default;

  virtual ChartKind chart() const = 0;
  virtual std::string name() const = 0;

  /// Image of x under the map, reduced to chart coordinates.
  /// Throws std::domain_error when x lies outside Q.
  virtual Pt forward(const Pt& x) const = 0;

  /// Preimage of y when y lies in f(Q), std::nullopt otherwise.
  virtual std::optional<Pt> inverse(const Pt& y) const = 0;

  /// |det Df(x)|, strictly positive on Q.
  virtual double jacobian_det(const Pt& x) const = 0;

  virtual const MapConstants& constants() const = 0;

  /// Unit tangent of the stable direction at x (globally constant for the
  /// maps shipped here).
  virtual std::array<double, 3> stable_direction(const Pt& x) const = 0;

  Pt iterate(Pt x, int n) const {
    for (int k = 0; k < n; ++k) x = forward(x);
    return x;
  }
};

/// Hyperbolic toral automorphism x -> (2x+y, x+y) mod 1.
///
/// Eigenvalues (3 +- sqrt(5))/2; determinant 1, so the map preserves
/// Lebesgue measure, which is also its physical invariant measure.
class CatMap final : public ChartMap {
 public:
  static constexpr double kLambdaS = 0.38196601125010515;  // (3 - sqrt 5)/2
  static constexpr double kLambdaU = 2.618033988749895;    // (3 + sqrt 5)/2

  CatMap() {
    consts_.lambda_s = kLambdaS;
    consts_.lambda_u = kLambdaS;  // transverse leaf distances contract at the same rate
    consts_.K1 = 0.0;
    consts_.K2 = 0.0;
    consts_.K3 = kLambdaU;  // spectral norm of the (symmetric) matrix
    consts_.a0 = 0.0;       // holonomies between parallel segments are translations
    consts_.nu0 = 1.0;
    // stable eigenvector (1, lambda_s - 2), normalised
    double vy = kLambdaS - 2.0;
    double nrm = std::sqrt(1.0 + vy * vy);
    stable_dir_ = {1.0 / nrm, vy / nrm, 0.0};
    double uy = kLambdaU - 2.0;
    nrm = std::sqrt(1.0 + uy * uy);
    unstable_dir_ = {1.0 / nrm, uy / nrm, 0.0};
  }

  ChartKind chart() const override { return ChartKind::Torus2; }
  std::string name() const override { return "cat"; }

  Pt forward(const Pt& x) const override {
    return wrap_point(chart(), make_pt(2.0 * x[0] + x[1], x[0] + x[1]));
  }

  std::optional<Pt> inverse(const Pt& y) const override {
    // inverse matrix [[1,-1],[-1,2]]; the map is onto the torus
    return wrap_point(chart(), make_pt(y[0] - y[1], -y[0] + 2.0 * y[1]));
  }

  double jacobian_det(const Pt&) const override { return 1.0; }

  const MapConstants& constants() const override { return consts_; }

  std::array<double, 3> stable_direction(const Pt&) const override {
    return stable_dir_;
  }
  std::array<double, 3> unstable_direction() const { return unstable_dir_; }

 private:
  MapConstants consts_;
  std::array<double, 3> stable_dir_;
  std::array<double, 3> unstable_dir_;
};

/// Solenoid embedding of the solid torus:
///   (t, x, y) -> (2t mod 1, x/10 + cos(2 pi t)/2, y/10 + sin(2 pi t)/2).
///
/// The image is a thin tube strictly inside the disk, so f(Q) is trapped in
/// Q and the maximal invariant set is a genuine attractor.
class Solenoid final : public ChartMap {
 public:
  static constexpr double kDiskContraction = 0.1;
  static constexpr double kRingRadius = 0.5;

  Solenoid() {
    consts_.lambda_s = kDiskContraction;
    consts_.lambda_u = 0.5;  // angle halves under the inverse
    consts_.K1 = 0.0;
    consts_.K2 = 0.0;
    consts_.K3 = std::sqrt(4.0 + M_PI * M_PI) + kDiskContraction;
    consts_.a0 = 0.0;  // horizontal-foliation holonomy is a disk translation
    consts_.nu0 = 1.0;
  }

  ChartKind chart() const override { return ChartKind::SolidTorus; }
  std::string name() const override { return "solenoid"; }

  Pt forward(const Pt& p) const override {
    if (!in_domain(chart(), p)) {
      throw std::domain_error("Solenoid::forward: point outside the solid torus");
    }
    double ang = 2.0 * M_PI * p[0];
    return make_pt(wrap_unit(2.0 * p[0]),
                   kDiskContraction * p[1] + kRingRadius * std::cos(ang),
                   kDiskContraction * p[2] + kRingRadius * std::sin(ang));
  }

  std::optional<Pt> inverse(const Pt& y) const override {
    // Two candidate angles under angle-doubling; at most one of them puts
    // the disk preimage inside the unit disk (the image circles of the two
    // branches are antipodal, separation 1 > 2 * 0.1).
    for (int branch = 0; branch < 2; ++branch) {
      double t = wrap_unit(0.5 * y[0] + 0.5 * branch);
      double ang = 2.0 * M_PI * t;
      double px = (y[1] - kRingRadius * std::cos(ang)) / kDiskContraction;
      double py = (y[2] - kRingRadius * std::sin(ang)) / kDiskContraction;
      if (px * px + py * py <= 1.0 + 1e-9) {
        return make_pt(t, px, py);
      }
    }
    return std::nullopt;
  }

  double jacobian_det(const Pt&) const override {
    return 2.0 * kDiskContraction * kDiskContraction;
  }

  const MapConstants& constants() const override { return consts_; }

  std::array<double, 3> stable_direction(const Pt&) const override {
    return {0.0, 0.0, 1.0};  // vertical segment inside the disk section
  }

 private:
  MapConstants consts_;
};

/// Rigid torus rotation; not hyperbolic. Used as a diagnostic map whose
/// filter admits an exact finite enumeration when the shift is rational.
class TorusRotation final : public ChartMap {
 public:
  TorusRotation(double ax, double ay) : ax_(ax), ay_(ay) {
    consts_.lambda_s = 1.0;
    consts_.lambda_u = 1.0;
    consts_.K3 = 1.0;
  }

  ChartKind chart() const override { return ChartKind::Torus2; }
  std::string name() const override { return "rotation"; }

  Pt forward(const Pt& x) const override {
    return wrap_point(chart(), make_pt(x[0] + ax_, x[1] + ay_));
  }

  std::optional<Pt> inverse(const Pt& y) const override {
    return wrap_point(chart(), make_pt(y[0] - ax_, y[1] - ay_));
  }

  double jacobian_det(const Pt&) const override { return 1.0; }

  const MapConstants& constants() const override { return consts_; }

  std::array<double, 3> stable_direction(const Pt&) const override {
    return {1.0, 0.0, 0.0};
  }

 private:
  double ax_, ay_;
  MapConstants consts_;
};

inline std::unique_ptr<ChartMap> make_map(const std::string& kind) {
  if (kind == "cat") return std::make_unique<CatMap>();
  if (kind == "solenoid") return std::make_unique<Solenoid>();
  throw std::invalid_argument("unknown map kind: " + kind);
}

}  // namespace hypf
