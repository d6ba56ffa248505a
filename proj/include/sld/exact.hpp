#pragma once

// Spatially homogeneous solution of the circle problem and the quantities derived
// from it: the logistic zero-mode coefficient, its limit, the time of maximal growth
// rate and the quasi-steady-state time T_c(alpha).
//
// With c = kappa lambda_0 v_0 beta_00 / a, every formula is written through
//   log D(t) = log(1 + c (e^{at} - 1))
// so that nothing overflows for large a t.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sld/error.hpp"
#include "sld/kernel.hpp"

namespace sld {

struct HomogeneousModel {
  double a = 1.0;
  double kappa = 0.2;
  double lambda0 = 0.0;
  double beta00 = 1.0;

  static HomogeneousModel from_kernel(double a, double kappa, const CircleKernelParams& k,
                                      double beta00 = 1.0) {
    return {a, kappa, eigenvalue(0, k), beta00};
  }

  void validate() const {
    require(std::isfinite(a) && a > 0.0, "exact: growth rate a must be positive");
    require(std::isfinite(kappa) && kappa >= 0.0, "exact: kappa must be nonnegative");
    require(std::isfinite(lambda0) && lambda0 > 0.0, "exact: lambda0 must be positive");
    require(std::isfinite(beta00) && beta00 > 0.0, "exact: beta00 must be positive");
  }

  /// c = kappa lambda_0 v_0 beta_00 / a; the solution grows iff c < 1.
  [[nodiscard]] double saturation_ratio() const { return kappa * lambda0 * v0 * beta00 / a; }
};

/// log(1 + c (e^{x} - 1)) for x >= 0, c >= 0.
inline double log_logistic_denominator(double x, double c) {
  if (x < 1.0) return std::log1p(c * std::expm1(x));
  return x + std::log(c + (1.0 - c) * std::exp(-x));
}

inline double beta0(double t, const HomogeneousModel& m) {
  m.validate();
  require(t >= 0.0, "exact: t must be nonnegative");
  const double x = m.a * t;
  return m.beta00 * std::exp(x - log_logistic_denominator(x, m.saturation_ratio()));
}

inline double rho0(double t, const HomogeneousModel& m) { return v0 * beta0(t, m); }

inline double rho0_dt(double t, const HomogeneousModel& m) {
  m.validate();
  require(t >= 0.0, "exact: t must be nonnegative");
  const double x = m.a * t;
  const double log_d = log_logistic_denominator(x, m.saturation_ratio());
  const double amp = v0 * m.beta00 * (m.a - m.kappa * m.lambda0 * v0 * m.beta00);
  return amp * std::exp(x - 2.0 * log_d);
}

inline double rho_lim(const HomogeneousModel& m) {
  m.validate();
  if (m.kappa == 0.0) throw std::domain_error("exact: kappa = 0 has no finite limit");
  return m.a / (m.kappa * m.lambda0);
}

/// Time at which rho0_dt is maximal. Requires a > 2 kappa lambda_0 v_0 beta_00.
inline double t_max(const HomogeneousModel& m) {
  m.validate();
  if (!(m.a > 2.0 * m.kappa * m.lambda0 * v0 * m.beta00)) {
    throw std::domain_error("exact: growth rate is maximal at t = 0 (no interior maximum)");
  }
  return std::log(rho_lim(m) * sqrt_two_pi / m.beta00 - 1.0) / m.a;
}

/// T_c(alpha) solving rho0(T_c) = alpha * rho_lim.
inline double t_quasi_steady(double alpha, const HomogeneousModel& m) {
  m.validate();
  const double c = m.saturation_ratio();
  const bool from_below = c < 1.0;
  if (c == 1.0) throw std::domain_error("exact: solution is already stationary");
  if (from_below && !(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("exact: alpha must lie in (0,1) when the solution grows");
  }
  if (!from_below && !(alpha > 1.0)) {
    throw std::domain_error("exact: alpha must exceed 1 when the solution decays");
  }
  const double arg = alpha / (1.0 - alpha) * (rho_lim(m) * sqrt_two_pi / m.beta00 - 1.0);
  if (!(arg > 0.0) || !std::isfinite(arg)) throw std::domain_error("exact: logarithm argument not positive");
  return std::log(arg) / m.a;
}

}  // namespace sld
