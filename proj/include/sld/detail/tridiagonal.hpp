#pragma once

#include <span>
#include <vector>

namespace sld::detail {

/// Solves the constant-coefficient cyclic system
///   off * x_{k-1} + diag * x_k + off * x_{k+1} = rhs_k   (indices mod n)
/// by the Thomas algorithm with a Sherman-Morrison correction for the corners.
inline std::vector<double> solve_cyclic_tridiagonal(double diag, double off, std::span<const double> rhs) {
  const std::size_t n = rhs.size();
  if (n == 1) return {rhs[0] / (diag + 2.0 * off)};
  if (n == 2) {
    // Both neighbours coincide: [[diag, 2 off], [2 off, diag]].
    const double det = diag * diag - 4.0 * off * off;
    return {(diag * rhs[0] - 2.0 * off * rhs[1]) / det, (diag * rhs[1] - 2.0 * off * rhs[0]) / det};
  }
  // A = B + u v^T with u = (gamma, 0, ..., 0, off), v = (1, 0, ..., 0, off / gamma).
  const double gamma = -diag;
  std::vector<double> b(n, diag);
  b[0] = diag - gamma;
  b[n - 1] = diag - off * off / gamma;

  auto thomas = [&](std::span<const double> d) {
    std::vector<double> c(n), x(n);
    c[0] = off / b[0];
    x[0] = d[0] / b[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = b[i] - off * c[i - 1];
      c[i] = off / m;
      x[i] = (d[i] - off * x[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
  };

  const auto y = thomas(rhs);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = off;
  const auto z = thomas(u);
  const double factor = (y[0] + off * y[n - 1] / gamma) / (1.0 + z[0] + off * z[n - 1] / gamma);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
  return x;
}

}  // namespace sld::detail
