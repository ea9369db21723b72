#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hypfilter/maps.hpp"

namespace hypf {

/// All constants entering the random cone-parameter recursions: map
/// regularity, cone exponents with mu = mu_hat + nu, the rate-splitting
/// constant delta, and the per-step log-Lipschitz constant of the channel as
/// a function of the (integer) time index.
struct ConeEnvironment {
  double lambda_s = 0.5;
  double lambda_u = 0.5;
  double a0 = 0.0;
  double nu0 = 1.0;
  double K1 = 0.0, K2 = 0.0, K3 = 1.0;
  double mu = 1.0, nu = 0.5, mu_hat = 0.5;
  double delta = 0.8;
  std::function<double(long)> G = [](long) { return 0.0; };

  static ConeEnvironment from_map(const ChartMap& map, double channel_G, double nu,
                                  double mu_hat, double delta) {
    ConeEnvironment env;
    const MapConstants& mc = map.constants();
    env.lambda_s = mc.lambda_s;
    env.lambda_u = mc.lambda_u;
    env.a0 = mc.a0;
    env.nu0 = mc.nu0;
    env.K1 = mc.K1;
    env.K2 = mc.K2;
    env.K3 = mc.K3;
    env.nu = nu;
    env.mu_hat = mu_hat;
    env.mu = mu_hat + nu;
    env.delta = delta;
    env.G = [channel_G](long) { return channel_G; };
    env.validate();
    return env;
  }

  void validate() const {
    if (!(mu > 0.0) || mu > nu0 + 1e-12) {
      throw std::invalid_argument("ConeEnvironment: need 0 < mu <= nu0");
    }
    if (std::fabs(mu - (mu_hat + nu)) > 1e-12) {
      throw std::invalid_argument("ConeEnvironment: need mu = mu_hat + nu");
    }
    double floor = std::max({std::pow(lambda_s, mu), std::pow(lambda_s, mu_hat),
                             std::pow(lambda_u, nu)});
    if (!(delta > floor) || !(delta < 1.0)) {
      throw std::invalid_argument(
          "ConeEnvironment: delta must lie in (max(ls^mu, ls^mu_hat, lu^nu), 1)");
    }
  }

  double lambda_a() const { return std::pow(lambda_s, mu) / delta; }
  double lambda_a_hat() const { return std::pow(lambda_s, mu_hat) / delta; }
  double lambda_c() const { return std::pow(lambda_u, nu) / delta; }

  double G_bar(long n) const {
    return G(n) + (K1 + K2) / std::pow(lambda_s, mu);
  }
};

/// Tuple the cone dynamics acts on: the leaf-comparison budget z and the two
/// log-Hoelder budgets x_hat >= x.
struct ConeState {
  double z = 0.0;
  double x_hat = 0.0;
  double x = 0.0;
};

/// Parameters of one invariant cone, with the exponents recorded.
struct ConeParams {
  double c = 0.0;
  double a_hat = 0.0;
  double a = 0.0;
  double mu = 1.0, nu = 0.5, mu_hat = 0.5;
};

namespace detail {

/// Truncated one-sided series a(base) = sum_{k<N} G_bar(base+k) la^{k+1}.
inline double a_series(const ConeEnvironment& env, long base, int N) {
  double la = env.lambda_a();
  double w = la;
  double acc = 0.0;
  for (int k = 0; k < N; ++k) {
    acc += env.G_bar(base + k) * w;
    w *= la;
  }
  return acc;
}

inline double G1_of(const ConeEnvironment& env, long n, int N) {
  return (std::pow(env.a0, env.mu) * a_series(env, n, N) + env.a0) /
         std::pow(env.lambda_s, env.mu_hat);
}

inline double G2_of(const ConeEnvironment& env, long n, int N) {
  return (a_series(env, n + 1, N) * std::pow(env.a0, env.mu) + env.a0 + env.G_bar(n)) *
         std::pow(env.lambda_s, env.mu - env.mu_hat);
}

inline double G_tilde(const ConeEnvironment& env, long n, int N) {
  return env.G_bar(n) + G1_of(env, n, N) + G2_of(env, n, N);
}

inline double a_hat_series(const ConeEnvironment& env, long base, int N) {
  double lah = env.lambda_a_hat();
  double w = lah;
  double acc = 0.0;
  for (int k = 0; k < N; ++k) {
    acc += G_tilde(env, base + k, N) * w;
    w *= lah;
  }
  return acc;
}

/// Largest log-Hoelder budget produced on a preimage leaf by the two
/// transport routes (holonomy before or after the operator).
inline double intermediate_a_bar(const ConeEnvironment& env, long n, int N) {
  double a_in = a_series(env, n + 1, N);
  double gb = env.G_bar(n);
  double lsm = std::pow(env.lambda_s, env.mu);
  double a0m = std::pow(env.a0, env.mu);
  double route1 = (a_in + gb) * lsm * a0m + env.a0;
  double route2 = (a_in * a0m + env.a0 + gb) * lsm;
  return std::max(route1, route2);
}

/// Leaf-to-leaf comparison constant of one operator step.
inline double K_of(const ConeEnvironment& env, long n, int N) {
  double a_in = a_series(env, n + 1, N);
  return a_in * std::pow(1.0 + env.K3 * env.lambda_u, env.mu) +
         env.a0 * (1.0 + std::pow(env.lambda_u, env.nu0)) +
         env.K1 * std::pow(env.lambda_u, env.nu0) + env.K2 * env.lambda_u +
         env.K3 * env.lambda_u * env.G(n);
}

inline double K5_of(const ConeEnvironment& env, long n, int N) {
  double abar = intermediate_a_bar(env, n, N);
  double ahat = a_hat_series(env, n, N);
  double gap = ahat - abar;
  if (!(gap > 0.0)) {
    throw std::runtime_error("cone parameters: a_hat does not dominate the transported budget");
  }
  double K4 = std::max(2.0 * K_of(env, n, N), 2.0 * abar);
  return K4 / (1.0 - std::exp(-gap));
}

}  // namespace detail

/// Per-step comparison constant K0 = 3K + 2K5 with all ingredients assembled
/// from the environment.
inline double K0_of(const ConeEnvironment& env, long n, int N = 80) {
  return 3.0 * detail::K_of(env, n, N) + 2.0 * detail::K5_of(env, n, N);
}

/// The intermediate constants of one step, for reports.
struct StepConstants {
  double K = 0.0;
  double K5 = 0.0;
  double K0 = 0.0;
};

inline StepConstants step_constants(const ConeEnvironment& env, long n, int N = 80) {
  StepConstants c;
  c.K = detail::K_of(env, n, N);
  c.K5 = detail::K5_of(env, n, N);
  c.K0 = 3.0 * c.K + 2.0 * c.K5;
  return c;
}

/// One application of the cone-parameter dynamics at step n:
///   z      -> z lambda_u^nu + K0(n)
///   x_hat  -> x_hat / lambda_s^mu_hat - G_tilde(n)
///   x      -> x / lambda_s^mu - G_bar(n)
inline ConeState cone_parameter_step(const ConeEnvironment& env, long n, const ConeState& s,
                                     int N = 80) {
  ConeState out;
  out.z = s.z * std::pow(env.lambda_u, env.nu) + K0_of(env, n, N);
  out.x_hat = s.x_hat / std::pow(env.lambda_s, env.mu_hat) - detail::G_tilde(env, n, N);
  out.x = s.x / std::pow(env.lambda_s, env.mu) - env.G_bar(n);
  return out;
}

/// Explicit variant for algebra tests: the same affine map with the step
/// constants passed directly.
inline ConeState cone_parameter_step_with(const ConeEnvironment& env, const ConeState& s,
                                          double K0, double G_tilde, double G_bar) {
  ConeState out;
  out.z = s.z * std::pow(env.lambda_u, env.nu) + K0;
  out.x_hat = s.x_hat / std::pow(env.lambda_s, env.mu_hat) - G_tilde;
  out.x = s.x / std::pow(env.lambda_s, env.mu) - G_bar;
  return out;
}

/// Stationary cone parameters at a given time index, by truncated series.
struct StationaryParams {
  ConeParams params;       // headroom applied
  double a_raw = 0.0;      // plain truncated series values
  double a_hat_raw = 0.0;
  double c_raw = 0.0;
  double tail_bound = 0.0;  // geometric bound on the truncation error
  double headroom = 1.0;
  int truncation = 0;
};

inline StationaryParams stationary_cone_params(const ConeEnvironment& env, int N,
                                               double headroom = 1.0, long base = 0) {
  env.validate();
  if (N < 1) throw std::invalid_argument("stationary_cone_params: N must be >= 1");
  if (!(headroom >= 1.0)) {
    throw std::invalid_argument("stationary_cone_params: headroom must be >= 1");
  }
  StationaryParams out;
  out.truncation = N;
  out.headroom = headroom;
  out.a_raw = detail::a_series(env, base, N);
  out.a_hat_raw = detail::a_hat_series(env, base, N);
  double lc = env.lambda_c();
  double w = 1.0 / env.delta;
  double c = 0.0;
  double sup_K0 = 0.0;
  for (int k = 0; k < N; ++k) {
    double k0 = K0_of(env, base - k - 1, N);
    sup_K0 = std::max(sup_K0, k0);
    c += k0 * w;
    w *= lc;
  }
  out.c_raw = c;
  double sup_G = 0.0;
  for (int k = 0; k <= N; ++k) sup_G = std::max(sup_G, env.G_bar(base + k));
  double la = env.lambda_a(), lah = env.lambda_a_hat();
  out.tail_bound = sup_G * std::pow(la, N + 1) / (1.0 - la) +
                   sup_G * std::pow(lah, N + 1) / (1.0 - lah) +
                   sup_K0 * std::pow(lc, N) / (env.delta * (1.0 - lc));
  out.params.a = headroom * out.a_raw;
  out.params.a_hat = headroom * out.a_hat_raw;
  out.params.c = headroom * out.c_raw;
  out.params.mu = env.mu;
  out.params.nu = env.nu;
  out.params.mu_hat = env.mu_hat;
  return out;
}

/// Slack of the five one-step cone-invariance inequalities between the
/// parameters at step `base` and step `base + 1`. All entries must be
/// positive for the cone family to be invariant with margin.
struct InvarianceSlack {
  double a1 = 0.0;  // delta a >= (a' + G_bar) ls^mu
  double a2 = 0.0;  // delta a_hat >= (a' + G_bar) ls^mu a0^mu + a0
  double a3 = 0.0;  // delta a_hat >= (a' a0^mu + a0 + G_bar) ls^mu
  double a4 = 0.0;  // delta a_hat >= (a_hat' + G_bar) ls^mu_hat
  double c = 0.0;   // c' >= delta c lu^nu + K0

  double min() const { return std::min({a1, a2, a3, a4, c}); }
};

inline InvarianceSlack invariance_slacks(const ConeEnvironment& env, int N,
                                         double headroom = 1.0, long base = 0) {
  StationaryParams p0 = stationary_cone_params(env, N, headroom, base);
  StationaryParams p1 = stationary_cone_params(env, N, headroom, base + 1);
  double lsm = std::pow(env.lambda_s, env.mu);
  double lsmh = std::pow(env.lambda_s, env.mu_hat);
  double a0m = std::pow(env.a0, env.mu);
  double gb = env.G_bar(base);
  InvarianceSlack s;
  s.a1 = env.delta * p0.params.a - (p1.params.a + gb) * lsm;
  s.a2 = env.delta * p0.params.a_hat - ((p1.params.a + gb) * lsm * a0m + env.a0);
  s.a3 = env.delta * p0.params.a_hat - (p1.params.a * a0m + env.a0 + gb) * lsm;
  s.a4 = env.delta * p0.params.a_hat - (p1.params.a_hat + gb) * lsmh;
  s.c = p1.params.c -
        (env.delta * p0.params.c * std::pow(env.lambda_u, env.nu) + K0_of(env, base, N));
  return s;
}

/// Number of iterations of the z-dynamics needed to fall below the moving
/// threshold c, starting from z0 > c(base), and the a-priori bound
/// ceil(log(z0/c) / log(lambda_c / lambda_u^nu)).
struct AbsorptionResult {
  long steps = 0;
  long bound = 0;
};

inline AbsorptionResult absorb_z(const ConeEnvironment& env, double z0, int N = 80,
                                 long base = 0, long max_steps = 100000) {
  double c0 = stationary_cone_params(env, N, 1.0, base).c_raw;
  AbsorptionResult res;
  double lun = std::pow(env.lambda_u, env.nu);
  if (z0 <= c0) {
    res.steps = 0;
    res.bound = 0;
    return res;
  }
  res.bound = static_cast<long>(
      std::ceil(std::log(z0 / c0) / std::log(env.lambda_c() / lun)));
  double z = z0;
  for (long n = 1; n <= max_steps; ++n) {
    z = z * lun + K0_of(env, base + n - 1, N);
    double cn = stationary_cone_params(env, N, 1.0, base + n).c_raw;
    if (z < cn) {
      res.steps = n;
      return res;
    }
  }
  throw std::runtime_error("absorb_z: did not absorb within max_steps");
}

}  // namespace hypf
