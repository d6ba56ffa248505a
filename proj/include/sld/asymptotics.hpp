#pragma once

// First-order quasi-steady-state expansion for initial data
//
//   rho_phi(s) = beta_00 v_0 + (1/T) rho~_phi(s),
//
// built on the homogeneous solution. The fast variable is theta = a t throughout.
//
//   beta^(1)_j(t) = beta_1j exp(a~_j t) / D(t)^{1 + lambda_j/lambda_0},
//   D(t)          = 1 + kappa lambda_0 beta_00 (a sqrt(2 pi))^{-1} (e^{at} - 1),
//   rho(t, s)     = v_0 beta_0(t) + (T sqrt(2 pi))^{-1} sum_j beta^(1)_j(t) e^{ijs}.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "sld/bessel.hpp"
#include "sld/csv.hpp"
#include "sld/error.hpp"
#include "sld/exact.hpp"
#include "sld/kernel.hpp"
#include "sld/spectral.hpp"

namespace sld {

struct AsymptoticExpansion {
  double T = 10.0;
  double beta00 = 1.0;
  std::vector<cplx> beta1;  // beta1[j + J]
  int J = 10;
  CircleKernelParams kernel;
  double a = 1.0;
  double kappa = 0.2;
  double D = 0.0;

  AsymptoticExpansion() = default;
  AsymptoticExpansion(double T_, double beta00_, std::vector<cplx> beta1_, CircleKernelParams k, double a_,
                      double kappa_, double D_)
      : T(T_), beta00(beta00_), beta1(std::move(beta1_)), kernel(k), a(a_), kappa(kappa_), D(D_) {
    require(beta1.size() % 2 == 1, "asymptotics: beta1 must hold 2J+1 coefficients");
    J = static_cast<int>(beta1.size() / 2);
    validate();
    lambda_ = eigenvalues(J, kernel);
  }

  void validate() const {
    require(std::isfinite(T) && T > 0.0, "asymptotics: T must be positive");
    require(std::isfinite(beta00) && beta00 > 0.0, "asymptotics: beta00 must be positive");
    require(std::isfinite(a) && a > 0.0, "asymptotics: a must be positive");
    require(std::isfinite(kappa) && kappa > 0.0, "asymptotics: kappa must be positive");
    require(std::isfinite(D) && D >= 0.0, "asymptotics: D must be nonnegative");
    require(static_cast<int>(beta1.size()) == 2 * J + 1, "asymptotics: beta1 size does not match J");
    kernel.validate();
  }

  [[nodiscard]] const cplx& b1(int j) const { return beta1[static_cast<std::size_t>(j + J)]; }
  [[nodiscard]] double lambda(int j) const { return lambda_[static_cast<std::size_t>(std::abs(j))]; }
  [[nodiscard]] HomogeneousModel homogeneous() const { return {a, kappa, lambda(0), beta00}; }
  /// kappa lambda_0 v_0 beta_00 / a.
  [[nodiscard]] double c() const { return kappa * lambda(0) * v0 * beta00 / a; }
  /// log D(t).
  [[nodiscard]] double log_denominator(double t) const { return log_logistic_denominator(a * t, c()); }
  /// Exponent 1 + lambda_j / lambda_0 of the mode-j denominator.
  [[nodiscard]] double mode_exponent(int j) const { return 1.0 + lambda(j) / lambda(0); }

private:
  std::vector<double> lambda_;
};

/// beta_1j = (2 pi)^{-1/2} integral of rho~_phi(s) e^{-ijs} over [-pi, pi), trapezoid rule.
inline std::vector<cplx> beta1_initial(const std::function<double(double)>& rho_tilde, int J,
                                       std::size_t n_quad = 2048) {
  return project_initial(rho_tilde, J, n_quad).beta;
}

inline cplx beta1_evolution(int j, double t, const AsymptoticExpansion& e) {
  require(std::abs(j) <= e.J, "asymptotics: mode index outside truncation");
  require(t >= 0.0, "asymptotics: t must be nonnegative");
  const double rate = e.a - e.D * static_cast<double>(j) * j;
  return e.b1(j) * std::exp(rate * t - e.mode_exponent(j) * e.log_denominator(t));
}

namespace detail {

inline double composite_sum(double t, double s, const AsymptoticExpansion& e, bool check) {
  const double zero = v0 * beta0(t, e.homogeneous());
  cplx corr = beta1_evolution(0, t, e);
  for (int j = 1; j <= e.J; ++j) {
    corr += beta1_evolution(j, t, e) * std::polar(1.0, j * s) + beta1_evolution(-j, t, e) * std::polar(1.0, -j * s);
  }
  corr /= e.T * sqrt_two_pi;
  const double rho = zero + corr.real();
  if (check && std::abs(corr.imag()) > 1e-10 * std::max(std::abs(rho), 1e-300)) {
    throw ValidationError("asymptotics: composite density has an imaginary residue (asymmetric beta1?)");
  }
  return rho;
}

}  // namespace detail

inline double composite_density(double t, double s, const AsymptoticExpansion& e) {
  return detail::composite_sum(t, canonical_angle(s), e, true);
}

inline std::vector<double> composite_profile(double t, std::span<const double> s_grid, const AsymptoticExpansion& e) {
  std::vector<double> out(s_grid.size());
  for (std::size_t k = 0; k < s_grid.size(); ++k) out[k] = composite_density(t, s_grid[k], e);
  return out;
}

namespace detail {

// Composite 8-point Gauss-Legendre on [0, t] with panels no wider than `panel`.
template <class F>
cplx integrate_gl(F&& f, double t, double panel) {
  static constexpr std::array<double, 4> x{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                           0.9602898564975363};
  static constexpr std::array<double, 4> w{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                           0.1012285362903763};
  if (t <= 0.0) return {};
  const long n = std::max<long>(1, static_cast<long>(std::ceil(t / panel)));
  const double h = t / static_cast<double>(n);
  cplx acc{};
  for (long p = 0; p < n; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * h;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += w[i] * (f(mid - 0.5 * h * x[i]) + f(mid + 0.5 * h * x[i]));
    }
  }
  return 0.5 * h * acc;
}

}  // namespace detail

/// Coefficient of v_j in the first-order expansion of the exponential-form solution,
/// (beta_0(t)/beta_00) (beta_1j - beta_00 v_0 kappa lambda_j int_0^t beta^(1)_j),
/// with the time integral done by quadrature.
inline cplx exponential_form_coefficient(int j, double t, const AsymptoticExpansion& e) {
  require(e.D == 0.0, "asymptotics: exponential-form route requires D = 0");
  const auto integral = detail::integrate_gl([&](double tau) { return beta1_evolution(j, tau, e); }, t,
                                             0.125 / e.a);
  const double ratio = beta0(t, e.homogeneous()) / e.beta00;
  return ratio * (e.b1(j) - e.beta00 * v0 * e.kappa * e.lambda(j) * integral);
}

/// max over |j| <= J and t in t_grid of |exponential-form coefficient - beta1_evolution|.
inline double appendix_a_check(const AsymptoticExpansion& e, std::span<const double> t_grid) {
  double worst = 0.0;
  for (double t : t_grid) {
    for (int j = -e.J; j <= e.J; ++j) {
      worst = std::max(worst, std::abs(exponential_form_coefficient(j, t, e) - beta1_evolution(j, t, e)));
    }
  }
  return worst;
}

/// Initial coefficients beta_00 delta_j0 + beta_1j / T of the full problem.
inline SpectralState full_initial_state(const AsymptoticExpansion& e, int J_full) {
  require(J_full >= e.J, "asymptotics: full truncation must cover the expansion");
  SpectralState st(J_full);
  for (int j = -e.J; j <= e.J; ++j) st.at(j) = e.b1(j) / e.T;
  st.at(0) += e.beta00;
  return st;
}

/// max over the s grid and t in t_grid of |composite - spectral solution|, where the
/// spectral solution integrates the full coefficient system from the same initial data.
inline double spectral_mismatch(const AsymptoticExpansion& e, std::span<const double> t_grid, double dt,
                                std::size_t n_s = 512, int J_full = -1) {
  if (J_full < 0) J_full = 2 * e.J;
  std::vector<double> times(t_grid.begin(), t_grid.end());
  std::sort(times.begin(), times.end());
  const SpectralSystem sys({e.a, e.D}, e.kernel, e.kappa, J_full);
  const auto s = periodic_grid(n_s);
  SpectralState state = full_initial_state(e, J_full);
  double worst = 0.0;
  for (double t : times) {
    const auto traj = integrate(state, sys, t - state.t, dt, {.store_every = 1 << 30});
    state = traj.states.back();
    const auto num = reconstruct(state, s);
    const auto ana = composite_profile(t, s, e);
    for (std::size_t k = 0; k < n_s; ++k) worst = std::max(worst, std::abs(num[k] - ana[k]));
  }
  return worst;
}

/// C_j(theta) solving the first-order eigen-expansion equations with C_j(0) given; the
/// exponent 1 + I_j(mu)/I_0(mu) is evaluated from Bessel functions directly. For D > 0
/// the mode additionally carries the factor e^{-D j^2 theta / a}.
inline cplx appendix_b_solution(int j, double theta, std::span<const cplx> C0, const AsymptoticExpansion& e) {
  const int J = static_cast<int>(C0.size() / 2);
  require(static_cast<int>(C0.size()) == 2 * J + 1 && std::abs(j) <= J, "appendix_b: mode outside C0");
  require(theta >= 0.0, "appendix_b: theta must be nonnegative");
  const double mu = e.kernel.mu();
  const double ratio = mu <= bessel_i_max_argument ? bessel_i(std::abs(j), mu) / bessel_i(0, mu)
                                                   : scaled_bessel_i(std::abs(j), mu) / scaled_bessel_i(0, mu);
  const double c = e.kappa * e.lambda(0) * v0 * e.beta00 / e.a;
  const double log_den = log_logistic_denominator(theta, c);
  const double diffusion = e.D * static_cast<double>(j) * j * theta / e.a;
  return C0[static_cast<std::size_t>(j + J)] * std::exp(theta - diffusion - (1.0 + ratio) * log_den);
}

/// v_0 beta_00 e^theta / D + (T sqrt(2 pi))^{-1} sum_l C_l(theta) e^{ils}, theta = a t.
inline double appendix_b_density(double t, double s, std::span<const cplx> C0, const AsymptoticExpansion& e) {
  const double theta = e.a * t;
  const double c = e.kappa * e.lambda(0) * v0 * e.beta00 / e.a;
  const double zero = v0 * e.beta00 * std::exp(theta - log_logistic_denominator(theta, c));
  const int J = static_cast<int>(C0.size() / 2);
  cplx corr{};
  for (int l = -J; l <= J; ++l) corr += appendix_b_solution(l, theta, C0, e) * std::polar(1.0, l * canonical_angle(s));
  return zero + corr.real() / (e.T * sqrt_two_pi);
}

/// Profile export with header s,rho.
inline void write_profile_csv(const std::filesystem::path& path, std::span<const double> s,
                              std::span<const double> rho) {
  require(s.size() == rho.size(), "profile: size mismatch");
  csv::Writer w(path, {"s", "rho"});
  for (std::size_t k = 0; k < s.size(); ++k) w.row({s[k], rho[k]});
}

}  // namespace sld
