#pragma once

// Truncated Fourier-coefficient system for the density on the circle,
//
//   d beta_j/dt = a~_j beta_j - kappa/sqrt(2 pi) * sum_l lambda_l beta_{j-l} beta_l,
//   a~_j = a - D j^2,
//
// with |j|, |l|, |j-l| <= J (out-of-band products are dropped, not aliased), plus
// projection, reconstruction, the generic Omega coefficients and the
// exponential-form representation of the D = 0 solution.

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sld/csv.hpp"
#include "sld/error.hpp"
#include "sld/kernel.hpp"

namespace sld {

using cplx = std::complex<double>;

struct SpectralState {
  int J = 0;
  std::vector<cplx> beta;  // beta[j + J], j in [-J, J]
  double t = 0.0;

  SpectralState() = default;
  explicit SpectralState(int J_, double t_ = 0.0)
      : J(J_), beta(2 * static_cast<std::size_t>(J_) + 1, cplx{}), t(t_) {
    require(J_ >= 0, "spectral: truncation J must be nonnegative");
  }

  [[nodiscard]] cplx& at(int j) { return beta[static_cast<std::size_t>(j + J)]; }
  [[nodiscard]] const cplx& at(int j) const { return beta[static_cast<std::size_t>(j + J)]; }

  /// max_j |beta_j - conj(beta_{-j})|.
  [[nodiscard]] double reality_defect() const {
    double d = 0.0;
    for (int j = 0; j <= J; ++j) d = std::max(d, std::abs(at(j) - std::conj(at(-j))));
    return d;
  }

  /// Symmetrizes the pair (beta_j, beta_{-j}); returns the defect that was removed.
  double enforce_reality() {
    const double drift = reality_defect();
    for (int j = 1; j <= J; ++j) {
      const cplx avg = 0.5 * (at(j) + std::conj(at(-j)));
      at(j) = avg;
      at(-j) = std::conj(avg);
    }
    at(0) = cplx(at(0).real(), 0.0);
    return drift;
  }
};

struct DiffusiveRates {
  double a = 1.0;
  double D = 0.0;

  [[nodiscard]] double rate(int j) const { return a - D * static_cast<double>(j) * j; }
};

/// Everything the coefficient system needs, with the kernel spectrum cached.
struct SpectralSystem {
  DiffusiveRates rates;
  CircleKernelParams kernel;
  double kappa = 0.2;
  std::vector<double> lambda;  // lambda[|j|], j = 0..J

  SpectralSystem(DiffusiveRates r, CircleKernelParams k, double kappa_, int J)
      : rates(r), kernel(k), kappa(kappa_), lambda(eigenvalues(J, k)) {
    require(std::isfinite(r.a), "spectral: a must be finite");
    require(std::isfinite(r.D) && r.D >= 0.0, "spectral: D must be nonnegative");
    require(std::isfinite(kappa_) && kappa_ >= 0.0, "spectral: kappa must be nonnegative");
  }

  [[nodiscard]] int J() const { return static_cast<int>(lambda.size()) - 1; }
  [[nodiscard]] double lambda_at(int j) const { return lambda[static_cast<std::size_t>(std::abs(j))]; }
};

/// Coefficient derivatives; out-of-band indices contribute zero.
inline std::vector<cplx> rhs(const SpectralState& state, const SpectralSystem& sys) {
  require(state.J <= sys.J(), "spectral: state truncation exceeds cached spectrum");
  const int J = state.J;
  const double coupling = sys.kappa / sqrt_two_pi;
  std::vector<cplx> out(state.beta.size());
  for (int j = -J; j <= J; ++j) {
    cplx conv{};
    const int lo = std::max(-J, j - J);
    const int hi = std::min(J, j + J);
    for (int l = lo; l <= hi; ++l) conv += sys.lambda_at(l) * state.at(j - l) * state.at(l);
    out[static_cast<std::size_t>(j + J)] = sys.rates.rate(j) * state.at(j) - coupling * conv;
  }
  return out;
}

struct SpectralTrajectory {
  std::vector<SpectralState> states;
  double max_reality_drift = 0.0;
};

struct IntegrateOptions {
  int store_every = 1;          // keep every n-th step (the final state is always kept)
  double blowup_limit = 1e12;
};

/// Number of fixed steps covering [0, t_end] with step at most dt.
inline long step_count(double t_end, double dt) {
  require(dt > 0.0 && std::isfinite(dt), "integrate: dt must be positive");
  require(t_end >= 0.0 && std::isfinite(t_end), "integrate: t_end must be nonnegative");
  return static_cast<long>(std::ceil(t_end / dt - 1e-9));
}

/// Classical fixed-step RK4 with the reality constraint re-enforced after each step.
inline SpectralTrajectory integrate(const SpectralState& state0, const SpectralSystem& sys, double t_end,
                                    double dt, const IntegrateOptions& opt = {}) {
  const long n = step_count(t_end, dt);
  const double h = n > 0 ? t_end / static_cast<double>(n) : 0.0;
  require(opt.store_every >= 1, "integrate: store_every must be >= 1");

  SpectralTrajectory traj;
  SpectralState y = state0;
  y.t = state0.t;
  traj.max_reality_drift = y.enforce_reality();
  traj.states.push_back(y);

  const std::size_t m = y.beta.size();
  SpectralState stage(y.J);
  auto axpy = [&](const SpectralState& base, const std::vector<cplx>& k, double w) {
    for (std::size_t i = 0; i < m; ++i) stage.beta[i] = base.beta[i] + w * k[i];
    return stage;
  };

  for (long step = 1; step <= n; ++step) {
    const auto k1 = rhs(y, sys);
    const auto k2 = rhs(axpy(y, k1, 0.5 * h), sys);
    const auto k3 = rhs(axpy(y, k2, 0.5 * h), sys);
    const auto k4 = rhs(axpy(y, k3, h), sys);
    for (std::size_t i = 0; i < m; ++i) y.beta[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    y.t = state0.t + h * static_cast<double>(step);
    traj.max_reality_drift = std::max(traj.max_reality_drift, y.enforce_reality());

    for (std::size_t i = 0; i < m; ++i) {
      const double mag = std::abs(y.beta[i]);
      if (!std::isfinite(mag) || mag > opt.blowup_limit) {
        throw SolverAbort("spectral: coefficient j=" + std::to_string(static_cast<int>(i) - y.J) +
                          " blew up at t=" + csv::format(y.t));
      }
    }
    if (step % opt.store_every == 0 || step == n) traj.states.push_back(y);
  }
  return traj;
}

/// Uniform periodic nodes s_k = -pi + 2 pi k / n.
inline std::vector<double> periodic_grid(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = -std::numbers::pi + two_pi * static_cast<double>(k) / static_cast<double>(n);
  return s;
}

/// Projection of periodic samples on the uniform grid onto v_j, j in [-J, J].
inline SpectralState project_samples(std::span<const double> samples, int J) {
  require(!samples.empty(), "project: no samples");
  for (double v : samples) require(std::isfinite(v), "project: non-finite sample");
  const std::size_t n = samples.size();
  const auto s = periodic_grid(n);
  const double w = two_pi / static_cast<double>(n);
  SpectralState out(J);
  for (int j = 0; j <= J; ++j) {
    cplx acc{};
    for (std::size_t k = 0; k < n; ++k) acc += std::conj(fourier_mode(j, s[k])) * samples[k];
    out.at(j) = w * acc;
  }
  out.at(0) = cplx(out.at(0).real(), 0.0);
  for (int j = 1; j <= J; ++j) out.at(-j) = std::conj(out.at(j));
  return out;
}

/// beta_{0j} = integral of conj(v_j) rho_phi over [-pi, pi) by the periodic trapezoid rule.
inline SpectralState project_initial(const std::function<double(double)>& rho_phi, int J,
                                     std::size_t n_quad = 2048) {
  require(n_quad >= 1024, "project: at least 1024 quadrature points are required");
  const auto s = periodic_grid(n_quad);
  std::vector<double> samples(n_quad);
  for (std::size_t k = 0; k < n_quad; ++k) samples[k] = rho_phi(s[k]);
  return project_samples(samples, J);
}

/// rho(s_k) = sum_j beta_j v_j(s_k); the imaginary residue must stay below 1e-10 max|rho|.
inline std::vector<double> reconstruct(const SpectralState& state, std::span<const double> s_grid) {
  std::vector<double> out(s_grid.size());
  double max_abs = 0.0;
  double max_imag = 0.0;
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    cplx acc = state.at(0) * v0;
    for (int j = 1; j <= state.J; ++j) {
      acc += state.at(j) * fourier_mode(j, s_grid[k]) + state.at(-j) * fourier_mode(-j, s_grid[k]);
    }
    out[k] = acc.real();
    max_abs = std::max(max_abs, std::abs(acc.real()));
    max_imag = std::max(max_imag, std::abs(acc.imag()));
  }
  if (max_imag > 1e-10 * std::max(max_abs, 1e-300)) {
    throw std::domain_error("reconstruct: imaginary residue " + csv::format(max_imag) +
                            " indicates broken conjugate symmetry");
  }
  return out;
}

/// An indexed family of functions on [lo, hi], expected to be orthonormal.
struct OrthonormalBasis {
  std::function<cplx(int, double)> v;
  double lo = -std::numbers::pi;
  double hi = std::numbers::pi;
  int min_index = 0;
  int max_index = 0;
  bool periodic = true;

  static OrthonormalBasis fourier(int M) {
    return {[](int j, double s) { return fourier_mode(j, s); }, -std::numbers::pi, std::numbers::pi, -M, M, true};
  }
};

namespace detail {

struct Quadrature {
  std::vector<double> x;
  std::vector<double> w;
};

// Rectangle rule for periodic families, trapezoid otherwise.
inline Quadrature basis_quadrature(const OrthonormalBasis& b, std::size_t n) {
  Quadrature q;
  const double len = b.hi - b.lo;
  if (b.periodic) {
    for (std::size_t k = 0; k < n; ++k) {
      q.x.push_back(b.lo + len * static_cast<double>(k) / static_cast<double>(n));
      q.w.push_back(len / static_cast<double>(n));
    }
  } else {
    const double h = len / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
      q.x.push_back(b.lo + h * static_cast<double>(k));
      q.w.push_back((k == 0 || k + 1 == n) ? 0.5 * h : h);
    }
  }
  return q;
}

}  // namespace detail

/// Largest deviation of the quadrature Gram matrix from the identity.
inline double gram_residual(const OrthonormalBasis& basis, std::size_t n_quad) {
  const auto q = detail::basis_quadrature(basis, n_quad);
  double worst = 0.0;
  for (int l = basis.min_index; l <= basis.max_index; ++l) {
    for (int k = l; k <= basis.max_index; ++k) {
      cplx g{};
      for (std::size_t i = 0; i < q.x.size(); ++i) g += q.w[i] * std::conj(basis.v(l, q.x[i])) * basis.v(k, q.x[i]);
      worst = std::max(worst, std::abs(g - (l == k ? 1.0 : 0.0)));
    }
  }
  return worst;
}

/// Omega_{j j'}^{j''}: coefficients of conj(v_j) v_{j'} in the family {conj(v_{j''})},
/// i.e. integral of conj(v_j) v_{j'} v_{j''}. Indexed by j'' - min_index.
inline std::vector<cplx> omega_coefficients(int j, int j_prime, const OrthonormalBasis& basis,
                                            std::size_t n_quad = 2048) {
  require(basis.min_index <= basis.max_index, "omega: empty index range");
  require(n_quad >= 2, "omega: need at least two quadrature points");
  const double residual = gram_residual(basis, n_quad);
  if (residual > 1e-8) {
    throw ValidationError("omega: basis is not orthonormal (Gram residual " + csv::format(residual) + ")");
  }
  const auto q = detail::basis_quadrature(basis, n_quad);
  std::vector<cplx> out;
  for (int jj = basis.min_index; jj <= basis.max_index; ++jj) {
    cplx acc{};
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      acc += q.w[i] * std::conj(basis.v(j, q.x[i])) * basis.v(j_prime, q.x[i]) * basis.v(jj, q.x[i]);
    }
    out.push_back(acc);
  }
  return out;
}

/// rho(t, s) = rho_phi(s) exp[ a t - kappa sum_j lambda_j v_j(s) int_0^t beta_j ] at the final
/// trajectory time, with time integrals by the trapezoid rule over the stored states.
inline std::vector<double> exponential_form(const SpectralTrajectory& traj, const SpectralSystem& sys,
                                            std::span<const double> rho_phi, std::span<const double> s_grid) {
  require(!traj.states.empty(), "exponential_form: empty trajectory");
  require(sys.rates.D == 0.0, "exponential_form: representation holds for D = 0 only");
  require(rho_phi.size() == s_grid.size(), "exponential_form: rho_phi and s_grid differ in size");
  const int J = traj.states.front().J;
  SpectralState integral(J);
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    const auto& p = traj.states[i - 1];
    const auto& c = traj.states[i];
    const double h = c.t - p.t;
    for (std::size_t k = 0; k < integral.beta.size(); ++k) integral.beta[k] += 0.5 * h * (p.beta[k] + c.beta[k]);
  }
  const double t = traj.states.back().t - traj.states.front().t;
  std::vector<double> out(s_grid.size());
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    cplx sum = sys.lambda_at(0) * integral.at(0) * v0;
    for (int j = 1; j <= J; ++j) {
      sum += sys.lambda_at(j) * (integral.at(j) * fourier_mode(j, s_grid[k]) +
                                 integral.at(-j) * fourier_mode(-j, s_grid[k]));
    }
    out[k] = rho_phi[k] * std::exp(sys.rates.a * t - sys.kappa * sum.real());
  }
  return out;
}

/// Trajectory export with header t,j,re_beta,im_beta.
inline void write_trajectory_csv(const std::filesystem::path& path, const SpectralTrajectory& traj) {
  csv::Writer w(path, {"t", "j", "re_beta", "im_beta"});
  for (const auto& st : traj.states) {
    for (int j = -st.J; j <= st.J; ++j) w.row({st.t, static_cast<double>(j), st.at(j).real(), st.at(j).imag()});
  }
}

}  // namespace sld
