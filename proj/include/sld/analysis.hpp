#pragma once

// Diagnostics shared by the solvers: peak counting on periodic profiles,
// homogeneity, norms, steady-state detection and empirical convergence order.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sld/error.hpp"
#include "sld/kernel.hpp"

namespace sld {

struct ProfileDiagnostics {
  int n_peaks = 0;
  double homogeneity = 0.0;
  double mass = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
};

inline double mean(std::span<const double> v) {
  require(!v.empty(), "analysis: empty profile");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// (max - min) / mean.
inline double homogeneity(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double m = mean(v);
  require(m > 0.0, "analysis: homogeneity needs a positive mean");
  return (*hi - *lo) / m;
}

/// Number of strict local maxima (periodic wrap, plateaus merged) whose topographic
/// prominence exceeds prominence * mean(profile).
inline int count_peaks(std::span<const double> profile, double prominence = 0.05) {
  require(profile.size() >= 8, "count_peaks: profile needs at least 8 samples");
  require(prominence >= 0.0, "count_peaks: prominence must be nonnegative");
  const std::size_t n = profile.size();
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (profile[i] != profile[(i + n - 1) % n]) {
      start = i;
      break;
    }
  }
  if (start == n) return 0;  // constant

  // Run-length compression so that neighbours always differ.
  std::vector<double> c;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = profile[(start + k) % n];
    if (c.empty() || v != c.back()) c.push_back(v);
  }
  const std::size_t m = c.size();
  const double threshold = prominence * mean(profile);
  if (m < 3) return m == 2 ? (c[0] - c[1] > threshold || c[1] - c[0] > threshold ? 1 : 0) : 0;

  int peaks = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double h = c[i];
    if (!(h > c[(i + m - 1) % m] && h > c[(i + 1) % m])) continue;
    double right_min = h;
    double left_min = h;
    for (std::size_t k = 1; k < m; ++k) {
      const double v = c[(i + k) % m];
      if (v > h) break;
      right_min = std::min(right_min, v);
    }
    for (std::size_t k = 1; k < m; ++k) {
      const double v = c[(i + m - k) % m];
      if (v > h) break;
      left_min = std::min(left_min, v);
    }
    if (h - std::max(left_min, right_min) > threshold) ++peaks;
  }
  return peaks;
}

/// Diagnostics of a periodic profile sampled with cell width ds.
inline ProfileDiagnostics diagnostics(std::span<const double> profile, double ds, double prominence = 0.05) {
  ProfileDiagnostics d;
  d.n_peaks = count_peaks(profile, prominence);
  d.homogeneity = homogeneity(profile);
  double sq = 0.0;
  for (double v : profile) {
    d.mass += v;
    d.linf = std::max(d.linf, std::abs(v));
    sq += v * v;
  }
  d.mass *= ds;
  d.l2 = std::sqrt(ds * sq);
  return d;
}

/// max|x - ref| / max|ref|.
inline double relative_linf(std::span<const double> x, std::span<const double> ref) {
  require(x.size() == ref.size() && !x.empty(), "analysis: norm operands differ in size");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num = std::max(num, std::abs(x[i] - ref[i]));
    den = std::max(den, std::abs(ref[i]));
  }
  require(den > 0.0, "analysis: reference profile is identically zero");
  return num / den;
}

/// ||x - ref||_2 / ||ref||_2 (uniform weights cancel).
inline double relative_l2(std::span<const double> x, std::span<const double> ref) {
  require(x.size() == ref.size() && !x.empty(), "analysis: norm operands differ in size");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - ref[i]) * (x[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  require(den > 0.0, "analysis: reference profile is identically zero");
  return std::sqrt(num / den);
}

/// Total angular width of the nodes where the profile exceeds rel_threshold * max.
inline double support_width(std::span<const double> profile, double rel_threshold = 1e-3) {
  require(!profile.empty(), "analysis: empty profile");
  const double hi = *std::max_element(profile.begin(), profile.end());
  const auto count = std::count_if(profile.begin(), profile.end(), [&](double v) { return v > rel_threshold * hi; });
  return two_pi * static_cast<double>(count) / static_cast<double>(profile.size());
}

struct SteadyStateResult {
  bool reached = false;
  double time = std::numeric_limits<double>::quiet_NaN();
  std::string diagnostic;
};

/// First sampled time from which max_k |d rho/dt| stays below tol until the end of the
/// trajectory. The derivative uses backward differences; the first sample reuses the
/// first difference.
inline SteadyStateResult steady_state_time(std::span<const double> times,
                                           std::span<const std::vector<double>> profiles, double tol) {
  require(times.size() == profiles.size(), "steady_state: times and profiles differ in length");
  require(times.size() >= 2, "steady_state: need at least two samples");
  require(tol > 0.0, "steady_state: tol must be positive");
  const std::size_t n = times.size();
  std::vector<double> rate(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double h = times[i] - times[i - 1];
    require(h > 0.0, "steady_state: times must increase");
    require(profiles[i].size() == profiles[i - 1].size(), "steady_state: profile sizes differ");
    double worst = 0.0;
    for (std::size_t k = 0; k < profiles[i].size(); ++k) {
      worst = std::max(worst, std::abs(profiles[i][k] - profiles[i - 1][k]) / h);
    }
    rate[i] = worst;
  }
  rate[0] = rate[1];

  if (rate[n - 1] >= tol) {
    return {false, std::numeric_limits<double>::quiet_NaN(),
            "never steady: final rate " + std::to_string(rate[n - 1]) + " >= tol " + std::to_string(tol)};
  }
  std::size_t first = n - 1;
  while (first > 0 && rate[first - 1] < tol) --first;
  return {true, times[first], {}};
}

/// log(e_coarse / e_fine) / log(ratio).
inline double richardson_order(double e_coarse, double e_fine, double ratio) {
  require(e_coarse > 0.0 && e_fine > 0.0, "richardson_order: errors must be positive");
  require(ratio > 1.0, "richardson_order: refinement ratio must exceed 1");
  return std::log(e_coarse / e_fine) / std::log(ratio);
}

}  // namespace sld
