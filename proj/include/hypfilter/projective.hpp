#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "hypfilter/density.hpp"
#include "hypfilter/leaves.hpp"

namespace hypf {

inline constexpr double kInfTheta = std::numeric_limits<double>::infinity();

/// Result of a projective-metric evaluation. theta = log(beta / alpha); an
/// infinite theta is a valid value (inputs on the cone boundary), reported
/// through the marker rather than an exception.
struct MetricReport {
  double theta = 0.0;
  double alpha = 0.0;  // extremal lower ratio
  double beta = 0.0;   // extremal upper ratio
  int arg_alpha = -1;  // witness sample index (first of the pair if pairwise)
  int arg_beta = -1;

  bool finite() const { return std::isfinite(theta); }
};

/// Projective metric of the positive cone: log of sup over inf of the
/// pointwise ratios phi2/phi1. Both inputs must be strictly positive on the
/// evaluation set; zero or non-finite ratios give the infinite marker.
inline MetricReport theta_plus(std::span<const double> phi1, std::span<const double> phi2) {
  if (phi1.size() != phi2.size() || phi1.empty()) {
    throw std::invalid_argument("theta_plus: size mismatch or empty input");
  }
  MetricReport rep;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (size_t i = 0; i < phi1.size(); ++i) {
    if (!(phi1[i] > 0.0) || !(phi2[i] > 0.0)) {
      throw cone_error("theta_plus: nonpositive input");
    }
    double r = phi2[i] / phi1[i];
    if (!std::isfinite(r) || r <= 0.0) {
      rep.theta = kInfTheta;
      return rep;
    }
    if (r < lo) {
      lo = r;
      rep.arg_alpha = static_cast<int>(i);
    }
    if (r > hi) {
      hi = r;
      rep.arg_beta = static_cast<int>(i);
    }
  }
  rep.alpha = lo;
  rep.beta = hi;
  rep.theta = std::log(hi / lo);
  return rep;
}

/// Convenience overload restricted to the chart domain of a grid.
inline MetricReport theta_plus_grid(const DensityGrid& a, const DensityGrid& b) {
  std::vector<double> v1, v2;
  v1.reserve(a.v.size());
  v2.reserve(b.v.size());
  for (int c = 0; c < a.spec.flat_count(); ++c) {
    if (!a.spec.cell_in_domain(c)) continue;
    v1.push_back(a.v[static_cast<size_t>(c)]);
    v2.push_back(b.v[static_cast<size_t>(c)]);
  }
  return theta_plus(v1, v2);
}

/// Membership in the cone of (a, mu) log-Hoelder positive densities on a
/// leaf: rho(x) <= rho(y) exp(a d(x,y)^mu) for all sample pairs, with d the
/// arclength distance. Reports the worst pair.
struct MembershipReport {
  bool member = false;
  double worst_slack = 0.0;  // min over pairs of log rhs - log lhs
  int worst_i = -1, worst_j = -1;
};

inline MembershipReport holder_membership(std::span<const double> positions,
                                          std::span<const double> rho, double a,
                                          double mu, double slack_tol = 1e-12) {
  if (positions.size() != rho.size() || rho.empty()) {
    throw std::invalid_argument("holder_membership: size mismatch or empty input");
  }
  MembershipReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) return rep;  // not a member; slack stays +inf sentinel
  }
  for (size_t i = 0; i < rho.size(); ++i) {
    for (size_t j = 0; j < rho.size(); ++j) {
      if (i == j) continue;
      double d = std::fabs(positions[i] - positions[j]);
      double slack = std::log(rho[j]) + a * std::pow(d, mu) - std::log(rho[i]);
      if (slack < rep.worst_slack) {
        rep.worst_slack = slack;
        rep.worst_i = static_cast<int>(i);
        rep.worst_j = static_cast<int>(j);
      }
    }
  }
  rep.member = rep.worst_slack >= -slack_tol;
  return rep;
}

/// Projective metric of the log-Hoelder cone on a leaf. alpha is the
/// infimum over plain ratios phi2/phi1(x) and over all pair expressions
///   (e^{a d^mu} phi2(x) - phi2(y)) / (e^{a d^mu} phi1(x) - phi1(y)),
/// beta the corresponding supremum; theta = log(beta/alpha). Inputs not
/// strictly inside the cone yield the infinite marker. Quadratic in the
/// sample count.
inline MetricReport theta_holder(std::span<const double> positions,
                                 std::span<const double> phi1,
                                 std::span<const double> phi2, double a, double mu) {
  size_t n = positions.size();
  if (phi1.size() != n || phi2.size() != n || n < 2) {
    throw std::invalid_argument("theta_holder: bad input sizes");
  }
  for (size_t i = 0; i < n; ++i) {
    if (!(phi1[i] > 0.0) || !(phi2[i] > 0.0)) {
      throw cone_error("theta_holder: nonpositive input");
    }
  }
  MetricReport rep;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double r = phi2[i] / phi1[i];
    if (r < lo) {
      lo = r;
      rep.arg_alpha = static_cast<int>(i);
    }
    if (r > hi) {
      hi = r;
      rep.arg_beta = static_cast<int>(i);
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double e = std::exp(a * std::pow(std::fabs(positions[i] - positions[j]), mu));
      double den = e * phi1[i] - phi1[j];
      double num = e * phi2[i] - phi2[j];
      if (den <= 0.0 || num <= 0.0) {
        rep.theta = kInfTheta;
        return rep;
      }
      double r = num / den;
      if (r < lo) {
        lo = r;
        rep.arg_alpha = static_cast<int>(i);
      }
      if (r > hi) {
        hi = r;
        rep.arg_beta = static_cast<int>(i);
      }
    }
  }
  rep.alpha = lo;
  rep.beta = hi;
  rep.theta = std::log(hi / lo);
  return rep;
}

/// Strict-contraction factor of a positive operator with image diameter D:
/// 1 - e^{-D}, extended by continuity to 1 at D = +inf.
inline double birkhoff_bound(double diameter) {
  if (diameter < 0.0) throw std::invalid_argument("birkhoff_bound: negative diameter");
  if (std::isinf(diameter)) return 1.0;
  return -std::expm1(-diameter);
}

/// Golden-section minimiser on [lo, hi] for a unimodal (or monotone)
/// objective; monotone objectives converge to the better endpoint.
inline double golden_minimize(const std::function<double(double)>& f, double lo,
                              double hi, int iters = 200) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  double xm = 0.5 * (a + b);
  return std::min({f(xm), f(a), f(b)});
}

/// tau1 = inf_{z>1} (z - z^l)/(z - z^{-l}) and tau2 = sup of the reciprocal
/// expression, for 0 < l < 1. Evaluated in the log variable s = log z with
/// expm1 to avoid cancellation near z = 1; the search bracket grows until the
/// objective is flat on the far end.
struct TauBounds {
  double tau1 = 1.0;
  double tau2 = 1.0;
};

inline TauBounds tau_bounds(double l) {
  if (!(l >= 0.0) || l >= 1.0) {
    throw std::invalid_argument("tau_bounds: need 0 <= lambda < 1");
  }
  if (l == 0.0) return {1.0, 1.0};
  // log of (z - z^l)/(z - z^{-l}) with z = e^s. The exponentially large
  // factors cancel algebraically, leaving a cancellation-free form that is
  // monotone toward 0 from below.
  auto log_ratio = [l](double s) {
    return std::log1p(-std::exp(-(1.0 - l) * s)) -
           std::log1p(-std::exp(-(1.0 + l) * s));
  };
  double s_hi = 1.0;
  while (log_ratio(2.0 * s_hi) - log_ratio(s_hi) > 1e-15 && s_hi < 1e8) s_hi *= 2.0;
  // the second objective is the reciprocal of the first, so its supremum
  // sits at the same argmin
  double m = golden_minimize(log_ratio, 1e-12, 2.0 * s_hi);
  return {std::exp(m), std::exp(-m)};
}

/// Analytic diameter bound 4a + log(tau2/tau1) for the image of the
/// lambda-shrunk log-Hoelder cone inside the (a, mu) cone.
inline double analytic_diameter(double a, double lambda) {
  TauBounds t = tau_bounds(lambda);
  return 4.0 * a + std::log(t.tau2 / t.tau1);
}

/// Largest pairwise distance among sampled cone images; a lower bound on the
/// true image diameter. Infinite pairs are counted separately.
struct DiameterEstimate {
  double sampled = 0.0;  // max over finite pairs
  int infinite_pairs = 0;
  int pairs = 0;
};

inline DiameterEstimate sampled_diameter(
    const std::vector<std::vector<double>>& images,
    const std::function<MetricReport(std::span<const double>, std::span<const double>)>&
        metric) {
  DiameterEstimate est;
  for (size_t i = 0; i < images.size(); ++i) {
    for (size_t j = i + 1; j < images.size(); ++j) {
      MetricReport r = metric(images[i], images[j]);
      ++est.pairs;
      if (!r.finite()) {
        ++est.infinite_pairs;
      } else {
        est.sampled = std::max(est.sampled, r.theta);
      }
    }
  }
  return est;
}

/// Checks  int phi rho1 / int phi rho2 <= e^{theta_a(rho1, rho2)} *
/// int rho1 / int rho2  on a leaf. An infinite theta makes the verdict
/// inconclusive.
struct ConditionBReport {
  bool conclusive = false;
  bool holds = false;
  double lhs = 0.0, rhs = 0.0;
  double slack = 0.0;  // log rhs - log lhs
  double theta = 0.0;
};

inline ConditionBReport conditionB_check(const StableLeaf& leaf,
                                         const std::vector<double>& phi,
                                         const std::vector<double>& rho1,
                                         const std::vector<double>& rho2, double a,
                                         double mu) {
  MetricReport th = theta_holder(leaf.params, rho1, rho2, a, mu);
  ConditionBReport rep;
  rep.theta = th.theta;
  if (!th.finite()) return rep;
  rep.conclusive = true;
  rep.lhs = leaf_integrate(leaf, phi, rho1) / leaf_integrate(leaf, phi, rho2);
  std::vector<double> ones(static_cast<size_t>(leaf.size()), 1.0);
  double mass_ratio = leaf_integrate(leaf, ones, rho1) / leaf_integrate(leaf, ones, rho2);
  rep.rhs = std::exp(th.theta) * mass_ratio;
  rep.slack = std::log(rep.rhs) - std::log(rep.lhs);
  rep.holds = rep.slack >= -1e-12;
  return rep;
}

}  // namespace hypf
