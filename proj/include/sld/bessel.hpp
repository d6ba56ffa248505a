#pragma once

// Modified Bessel functions of the first kind, integer order.
//
// Two regimes:
//   mu <= 2*order : power series (all terms positive, no cancellation)
//   otherwise     : Miller backward recurrence normalized with
//                   I_0(mu) + 2*sum_{k>=1} I_k(mu) = e^mu
//
// The scaled variants return e^{-mu} I_n(mu) and never overflow.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sld/error.hpp"

namespace sld {

/// Largest argument accepted by the unscaled bessel_i (e^mu must fit a double).
inline constexpr double bessel_i_max_argument = 700.0;

namespace detail {

// (mu/2)^n / n! * sum_k (mu^2/4)^k / (k! (n+k)!) * n!, returned as log-prefactor + sum.
struct SeriesParts {
  double log_prefactor;  // log((mu/2)^n / n!)
  double sum;            // sum_k (mu^2/4)^k n! / (k! (n+k)!)
};

inline SeriesParts bessel_i_series(int order, double mu) {
  const double q = 0.25 * mu * mu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(order + k));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  const double log_prefactor =
      order == 0 ? 0.0 : order * std::log(0.5 * mu) - std::lgamma(static_cast<double>(order) + 1.0);
  return {log_prefactor, sum};
}

inline int miller_start(int max_order, double mu) {
  int n = max_order + 20 + static_cast<int>(std::ceil(std::sqrt(80.0 * mu)));
  return n + (n % 2);
}

// Backward recurrence I_{k-1} = (2k/mu) I_k + I_{k+1}, values for k = 0..max_order,
// normalized so that the result is e^{-mu} I_k(mu).
inline std::vector<double> scaled_miller(int max_order, double mu) {
  const int start = miller_start(max_order, mu);
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  double next = 0.0;     // f_{k+1}
  double current = 1e-280;  // f_k, k = start
  double norm = 0.0;     // f_0 + 2 * sum_{k>=1} f_k
  constexpr double big = 1e250;
  for (int k = start; k >= 1; --k) {
    norm += 2.0 * current;
    if (k <= max_order) out[static_cast<std::size_t>(k)] = current;
    const double previous = (2.0 * k / mu) * current + next;
    next = current;
    current = previous;
    if (std::abs(current) > big) {
      current /= big;
      next /= big;
      norm /= big;
      for (int i = k; i <= max_order; ++i) out[static_cast<std::size_t>(i)] /= big;
    }
  }
  norm += current;
  out[0] = current;
  for (auto& v : out) v /= norm;
  return out;
}

}  // namespace detail

/// e^{-mu} I_order(mu).
inline double scaled_bessel_i(int order, double mu) {
  require(mu >= 0.0 && std::isfinite(mu), "bessel_i: mu must be finite and nonnegative");
  require(order >= 0, "bessel_i: order must be nonnegative");
  if (mu == 0.0) return order == 0 ? 1.0 : 0.0;
  if (mu <= 2.0 * order) {
    const auto parts = detail::bessel_i_series(order, mu);
    return std::exp(parts.log_prefactor - mu) * parts.sum;
  }
  return detail::scaled_miller(order, mu)[static_cast<std::size_t>(order)];
}

/// e^{-mu} I_k(mu) for k = 0..max_order, from a single recurrence sweep where possible.
inline std::vector<double> scaled_bessel_i_sequence(int max_order, double mu) {
  require(mu >= 0.0 && std::isfinite(mu), "bessel_i: mu must be finite and nonnegative");
  require(max_order >= 0, "bessel_i: order must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (mu == 0.0) {
    out[0] = 1.0;
    return out;
  }
  // Orders in the series regime are filled individually; the rest share one sweep.
  const int miller_top = std::min(max_order, static_cast<int>(std::ceil(mu / 2.0)) - 1);
  if (miller_top >= 0) {
    const auto m = detail::scaled_miller(miller_top, mu);
    std::copy(m.begin(), m.end(), out.begin());
  }
  for (int k = std::max(0, miller_top + 1); k <= max_order; ++k) {
    out[static_cast<std::size_t>(k)] = scaled_bessel_i(k, mu);
  }
  return out;
}

/// I_order(mu). Throws std::overflow_error when mu exceeds bessel_i_max_argument.
inline double bessel_i(int order, double mu) {
  require(mu >= 0.0 && std::isfinite(mu), "bessel_i: mu must be finite and nonnegative");
  require(order >= 0, "bessel_i: order must be nonnegative");
  if (mu > bessel_i_max_argument) {
    throw std::overflow_error("bessel_i: argument beyond supported range (use scaled_bessel_i)");
  }
  if (mu == 0.0) return order == 0 ? 1.0 : 0.0;
  if (mu <= 2.0 * order) {
    const auto parts = detail::bessel_i_series(order, mu);
    return std::exp(parts.log_prefactor) * parts.sum;
  }
  return detail::scaled_miller(order, mu)[static_cast<std::size_t>(order)] * std::exp(mu);
}

}  // namespace sld
