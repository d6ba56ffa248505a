#pragma once

// Gaussian influence kernel restricted to a circle of radius R:
//
//   b(s, s') = b0 * exp(-mu * (1 - cos(s - s'))),   mu = R^2 / gamma^2
//
// Its Fredholm eigenfunctions are Fourier modes v_j(s) = e^{ijs}/sqrt(2 pi) with
// eigenvalues lambda_j = 2 pi b0 e^{-mu} I_|j|(mu).

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sld/bessel.hpp"
#include "sld/error.hpp"

namespace sld {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline const double sqrt_two_pi = std::sqrt(two_pi);
/// Value of the constant eigenfunction v_0.
inline const double v0 = 1.0 / std::sqrt(two_pi);

/// Maps an angle to [-pi, pi).
inline double canonical_angle(double s) {
  double r = std::fmod(s + std::numbers::pi, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r -= two_pi;
  return r - std::numbers::pi;
}

struct CircleKernelParams {
  double b0 = 1.0;
  double gamma = 1.0;
  double R = 1.0;

  [[nodiscard]] double mu() const { return (R * R) / (gamma * gamma); }

  void validate() const {
    require(std::isfinite(b0) && b0 > 0.0, "kernel: b0 must be positive");
    require(std::isfinite(gamma) && gamma > 0.0, "kernel: gamma must be positive");
    require(std::isfinite(R) && R > 0.0, "kernel: R must be positive");
    require(mu() > 0.0 && std::isfinite(mu()), "kernel: mu = R^2/gamma^2 must be positive and finite");
  }
};

struct EigenPair {
  int j = 0;
  double lambda = 0.0;
};

/// Default spectral truncation ceil(8 mu) + 20.
inline int default_truncation(const CircleKernelParams& p) {
  return static_cast<int>(std::ceil(8.0 * p.mu())) + 20;
}

/// Kernel as a function of the angular offset d = s - s'.
inline double kernel_of_offset(double d, const CircleKernelParams& p) {
  return p.b0 * std::exp(-p.mu() * (1.0 - std::cos(canonical_angle(d))));
}

inline double kernel_value(double s, double s_prime, const CircleKernelParams& p) {
  p.validate();
  return kernel_of_offset(canonical_angle(s) - canonical_angle(s_prime), p);
}

inline double eigenvalue(int j, const CircleKernelParams& p) {
  p.validate();
  return two_pi * p.b0 * scaled_bessel_i(std::abs(j), p.mu());
}

/// lambda_k for k = 0..J (the spectrum is even in k).
inline std::vector<double> eigenvalues(int J, const CircleKernelParams& p) {
  p.validate();
  require(J >= 0, "kernel: truncation J must be nonnegative");
  auto scaled = scaled_bessel_i_sequence(J, p.mu());
  for (auto& v : scaled) v *= two_pi * p.b0;
  return scaled;
}

inline std::vector<EigenPair> eigenpairs(int J, const CircleKernelParams& p) {
  const auto lam = eigenvalues(J, p);
  std::vector<EigenPair> out;
  out.reserve(2 * static_cast<std::size_t>(J) + 1);
  for (int j = -J; j <= J; ++j) out.push_back({j, lam[static_cast<std::size_t>(std::abs(j))]});
  return out;
}

/// v_j(s) = e^{ijs} / sqrt(2 pi).
inline std::complex<double> fourier_mode(int j, double s) {
  return std::polar(v0, static_cast<double>(j) * canonical_angle(s));
}

/// sum_{|j|<=J} lambda_j v_j(s) conj(v_j(s')), evaluated as a real cosine sum.
inline double spectral_reconstruction(double s, double s_prime, int J, const CircleKernelParams& p) {
  require(J >= 0, "kernel: truncation J must be nonnegative");
  const auto lam = eigenvalues(J, p);
  const double d = canonical_angle(canonical_angle(s) - canonical_angle(s_prime));
  // Smallest terms first so the truncation sum is accumulated accurately.
  double sum = 0.0;
  for (int j = J; j >= 1; --j) sum += 2.0 * lam[static_cast<std::size_t>(j)] * std::cos(j * d);
  sum += lam[0];
  return sum / two_pi;
}

}  // namespace sld
