#pragma once

// Planar diffusion-reaction equation
//
//   u_t = D lap u + a u - kappa u int b_gamma(x, y) u(y) dy,   x in [-L, L]^2,
//
// on a node grid with zero-flux (reflecting) walls, plus the moment and marginal
// machinery used to compare planar runs with densities on the circle.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sld/csv.hpp"
#include "sld/error.hpp"
#include "sld/grid.hpp"
#include "sld/kernel.hpp"
#include "sld/manifold.hpp"
#include "sld/parallel.hpp"
#include "sld/spectral.hpp"

namespace sld {

struct Field2D {
  double L = 3.0;
  std::size_t n = 128;
  std::vector<double> u;  // u[iy * n + ix]
  double t = 0.0;
  double D = 0.0;

  Field2D() = default;
  Field2D(double L_, std::size_t n_, double D_ = 0.0) : L(L_), n(n_), u(n_ * n_, 0.0), D(D_) { validate(); }

  [[nodiscard]] double dx() const { return 2.0 * L / static_cast<double>(n - 1); }
  [[nodiscard]] double node(std::size_t i) const { return -L + dx() * static_cast<double>(i); }
  [[nodiscard]] double& at(std::size_t ix, std::size_t iy) { return u[iy * n + ix]; }
  [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return u[iy * n + ix]; }

  /// One-dimensional trapezoid weights on the node grid.
  [[nodiscard]] std::vector<double> weights() const {
    std::vector<double> w(n, dx());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
  }

  /// Fills u with f(x, y).
  void sample(const std::function<double(double, double)>& f) {
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) at(ix, iy) = f(node(ix), node(iy));
    }
  }

  void validate() const {
    require(std::isfinite(L) && L > 0.0, "planar2d: L must be positive");
    require(n >= 4, "planar2d: need at least 4 nodes per axis");
    require(std::isfinite(D) && D >= 0.0, "planar2d: D must be nonnegative");
    require(u.size() == n * n, "planar2d: field size does not match n");
  }
};

struct Planar2DParams {
  double b0 = 1.0;
  double gamma = 1.0;
  double a = 1.0;
  double kappa = 0.2;
  Backend backend = Backend::fast;
  Scheme scheme = Scheme::euler;

  void validate() const {
    require(std::isfinite(b0) && b0 > 0.0, "planar2d: b0 must be positive");
    require(std::isfinite(gamma) && gamma > 0.0, "planar2d: gamma must be positive");
    require(std::isfinite(a), "planar2d: a must be finite");
    require(std::isfinite(kappa) && kappa >= 0.0, "planar2d: kappa must be nonnegative");
    require(scheme != Scheme::imex, "planar2d: imex is not available in 2D; use euler or rk4");
  }
};

/// int b_gamma(x, y) u(y) dy on the nodes, trapezoid rule. The fast path applies the
/// separable factors exp(-(x1-y1)^2/2g^2) exp(-(x2-y2)^2/2g^2) one axis at a time.
inline std::vector<double> nonlocal_2d(const Field2D& f, double b0, double gamma, Backend backend) {
  const std::size_t n = f.n;
  const auto w = f.weights();
  const double inv = 1.0 / (2.0 * gamma * gamma);
  std::vector<double> G(n * n);  // G[k * n + i] = exp(-(x_k - x_i)^2 / 2g^2) w_i
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = f.node(k) - f.node(i);
      G[k * n + i] = std::exp(-d * d * inv) * w[i];
    }
  }
  std::vector<double> out(n * n, 0.0);
  if (backend == Backend::direct) {
    for_each_index(n, [&](std::size_t ky) {
      for (std::size_t kx = 0; kx < n; ++kx) {
        double acc = 0.0;
        for (std::size_t iy = 0; iy < n; ++iy) {
          const double gy = G[ky * n + iy];
          for (std::size_t ix = 0; ix < n; ++ix) acc += gy * G[kx * n + ix] * f.u[iy * n + ix];
        }
        out[ky * n + kx] = b0 * acc;
      }
    });
    return out;
  }
  // Along x: tmp[iy][kx] = sum_ix G[kx][ix] u[iy][ix].
  std::vector<double> tmp(n * n, 0.0);
  for_each_index(n, [&](std::size_t iy) {
    for (std::size_t kx = 0; kx < n; ++kx) {
      double acc = 0.0;
      for (std::size_t ix = 0; ix < n; ++ix) acc += G[kx * n + ix] * f.u[iy * n + ix];
      tmp[iy * n + kx] = acc;
    }
  });
  // Along y: out[ky][kx] = b0 sum_iy G[ky][iy] tmp[iy][kx].
  for_each_index(n, [&](std::size_t ky) {
    for (std::size_t iy = 0; iy < n; ++iy) {
      const double g = b0 * G[ky * n + iy];
      for (std::size_t kx = 0; kx < n; ++kx) out[ky * n + kx] += g * tmp[iy * n + kx];
    }
  });
  return out;
}

/// 5-point Laplacian with reflecting ghost nodes (u_{-1} = u_1, u_n = u_{n-2}).
inline std::vector<double> laplacian_2d(const Field2D& f) {
  const std::size_t n = f.n;
  const double inv = 1.0 / (f.dx() * f.dx());
  auto reflect = [n](std::size_t i, int d) -> std::size_t {
    if (i == 0 && d < 0) return 1;
    if (i == n - 1 && d > 0) return n - 2;
    return d < 0 ? i - 1 : i + 1;
  };
  std::vector<double> out(n * n);
  for_each_index(n, [&](std::size_t iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      const double c = f.u[iy * n + ix];
      out[iy * n + ix] = (f.u[iy * n + reflect(ix, -1)] + f.u[iy * n + reflect(ix, 1)] +
                          f.u[reflect(iy, -1) * n + ix] + f.u[reflect(iy, 1) * n + ix] - 4.0 * c) *
                         inv;
    }
  });
  return out;
}

/// 0.8 min(dx^2/(4D), 1/(a + kappa max I)).
inline double max_stable_dt_2d(const Field2D& f, const Planar2DParams& p) {
  const auto I = nonlocal_2d(f, p.b0, p.gamma, p.backend);
  const double max_i = *std::max_element(I.begin(), I.end());
  double bound = 1.0 / (std::abs(p.a) + p.kappa * std::max(max_i, 0.0));
  if (f.D > 0.0) bound = std::min(bound, f.dx() * f.dx() / (4.0 * f.D));
  return 0.8 * bound;
}

inline std::vector<double> rate_2d(const Field2D& f, const Planar2DParams& p) {
  const auto I = nonlocal_2d(f, p.b0, p.gamma, p.backend);
  std::vector<double> r(f.u.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = p.a * f.u[k] - p.kappa * f.u[k] * I[k];
  if (f.D > 0.0) {
    const auto lap = laplacian_2d(f);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] += f.D * lap[k];
  }
  return r;
}

namespace detail {

inline void sanitize_2d(Field2D& f) {
  double hi = 0.0;
  for (double v : f.u) {
    if (!std::isfinite(v)) throw SolverAbort("planar2d: non-finite density at t=" + csv::format(f.t));
    hi = std::max(hi, v);
  }
  if (hi > 1e12) throw SolverAbort("planar2d: density blew up at t=" + csv::format(f.t));
  for (double& v : f.u) {
    if (v >= 0.0) continue;
    if (v < -1e-10 * hi) throw SolverAbort("planar2d: negative density " + csv::format(v));
    v = 0.0;
  }
}

}  // namespace detail

inline Field2D step2d(const Field2D& f, const Planar2DParams& p, double dt) {
  f.validate();
  p.validate();
  require(dt > 0.0 && std::isfinite(dt), "planar2d: dt must be positive");
  const double limit = max_stable_dt_2d(f, p);
  if (dt > limit * (1.0 + 1e-12)) {
    throw ValidationError("planar2d: dt=" + csv::format(dt) + " exceeds stability bound " + csv::format(limit));
  }
  Field2D next = f;
  next.t = f.t + dt;
  if (p.scheme == Scheme::euler) {
    const auto k1 = rate_2d(f, p);
    for (std::size_t k = 0; k < next.u.size(); ++k) next.u[k] = f.u[k] + dt * k1[k];
  } else {
    Field2D y = f;
    const auto k1 = rate_2d(f, p);
    for (std::size_t k = 0; k < y.u.size(); ++k) y.u[k] = f.u[k] + 0.5 * dt * k1[k];
    const auto k2 = rate_2d(y, p);
    for (std::size_t k = 0; k < y.u.size(); ++k) y.u[k] = f.u[k] + 0.5 * dt * k2[k];
    const auto k3 = rate_2d(y, p);
    for (std::size_t k = 0; k < y.u.size(); ++k) y.u[k] = f.u[k] + dt * k3[k];
    const auto k4 = rate_2d(y, p);
    for (std::size_t k = 0; k < next.u.size(); ++k) {
      next.u[k] = f.u[k] + (dt / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
  }
  detail::sanitize_2d(next);
  return next;
}

/// Snapshots at the requested times; each segment uses ceil(segment/dt) equal steps.
inline std::vector<Field2D> run2d(Field2D f, const Planar2DParams& p, std::span<const double> times, double dt) {
  std::vector<Field2D> out;
  for (double target : times) {
    require(target >= f.t - 1e-12, "planar2d: snapshot times must be nondecreasing");
    const double span_t = target - f.t;
    const long n = span_t > 0.0 ? step_count(span_t, dt) : 0;
    const double h = n > 0 ? span_t / static_cast<double>(n) : 0.0;
    const double t0 = f.t;
    for (long i = 1; i <= n; ++i) {
      f = step2d(f, p, h);
      f.t = t0 + h * static_cast<double>(i);
    }
    f.t = target;
    out.push_back(f);
  }
  return out;
}

struct Moments2D {
  double mass = 0.0;
  std::array<double, 2> centroid{};
};

/// m_u = int u dx and x_u = m_u^{-1} int x u dx, 2D trapezoid rule.
inline Moments2D moments(const Field2D& f) {
  const auto w = f.weights();
  Moments2D m;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t iy = 0; iy < f.n; ++iy) {
    for (std::size_t ix = 0; ix < f.n; ++ix) {
      const double q = w[ix] * w[iy] * f.at(ix, iy);
      m.mass += q;
      mx += q * f.node(ix);
      my += q * f.node(iy);
    }
  }
  if (!(m.mass > 0.0)) throw ValidationError("planar2d: zero mass");
  m.centroid = {mx / m.mass, my / m.mass};
  return m;
}

/// m_u^{-1} int A(x) u dx for a vector-valued observable.
inline std::vector<double> field_average(const Field2D& f, const std::function<std::vector<double>(PointSpan)>& A) {
  const auto w = f.weights();
  double mass = 0.0;
  std::vector<double> acc;
  for (std::size_t iy = 0; iy < f.n; ++iy) {
    for (std::size_t ix = 0; ix < f.n; ++ix) {
      const double q = w[ix] * w[iy] * f.at(ix, iy);
      const double x[2] = {f.node(ix), f.node(iy)};
      const auto v = A(PointSpan(x, 2));
      if (acc.empty()) acc.assign(v.size(), 0.0);
      for (std::size_t d = 0; d < v.size(); ++d) acc[d] += q * v[d];
      mass += q;
    }
  }
  if (!(mass > 0.0)) throw ValidationError("planar2d: zero mass");
  for (auto& v : acc) v /= mass;
  return acc;
}

/// Bilinear interpolation; points outside the square are clamped to the boundary.
inline double interpolate(const Field2D& f, double x, double y) {
  const double h = f.dx();
  const double last = static_cast<double>(f.n - 1);
  const double gx = std::clamp((x + f.L) / h, 0.0, last);
  const double gy = std::clamp((y + f.L) / h, 0.0, last);
  const auto ix = std::min(static_cast<std::size_t>(gx), f.n - 2);
  const auto iy = std::min(static_cast<std::size_t>(gy), f.n - 2);
  const double fx = gx - static_cast<double>(ix);
  const double fy = gy - static_cast<double>(iy);
  return (1 - fx) * (1 - fy) * f.at(ix, iy) + fx * (1 - fy) * f.at(ix + 1, iy) + (1 - fx) * fy * f.at(ix, iy + 1) +
         fx * fy * f.at(ix + 1, iy + 1);
}

struct Extraction {
  std::vector<double> s;
  std::vector<double> rho;
  double boundary_fraction = 0.0;  // 1 - int rho ds / m_u
  bool trusted = true;
};

/// rho(s_k) = int_0^L u(r cos s_k, r sin s_k) r dr by composite Simpson along each ray.
/// Mass outside the inscribed disc (or lost to quadrature) above 1% marks the result
/// as untrusted.
inline Extraction extract_sld(const Field2D& f, std::size_t n_angles) {
  f.validate();
  require(n_angles >= 8, "extract_sld: need at least 8 angles");
  Extraction e;
  e.s = periodic_grid(n_angles);
  e.rho.resize(n_angles);
  const double r_max = f.L;
  std::size_t intervals = 2 * static_cast<std::size_t>(std::ceil(r_max / f.dx()));
  const double h = r_max / static_cast<double>(intervals);
  for_each_index(n_angles, [&](std::size_t k) {
    const double c = std::cos(e.s[k]);
    const double sn = std::sin(e.s[k]);
    double acc = 0.0;
    for (std::size_t i = 0; i <= intervals; ++i) {
      const double r = h * static_cast<double>(i);
      const double wgt = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += wgt * r * interpolate(f, r * c, r * sn);
    }
    e.rho[k] = acc * h / 3.0;
  });
  const double ds = two_pi / static_cast<double>(n_angles);
  double captured = 0.0;
  for (double v : e.rho) captured += v * ds;
  const double mass = moments(f).mass;
  e.boundary_fraction = 1.0 - captured / mass;
  e.trusted = std::abs(e.boundary_fraction) <= 0.01;
  return e;
}

/// Default observable: both coordinates of x.
inline std::vector<double> position_observable(PointSpan x) { return {x[0], x[1]}; }

/// Euclidean norm of A_u(t) - m_rho^{-1} int A(X(s)) rho(s) ds at each common time
/// (times matched to 1e-9).
inline std::vector<double> concentration_check(std::span<const Field2D> fields, const ManifoldTrajectory& manifold,
                                               const std::function<std::vector<double>(PointSpan)>& A =
                                                   position_observable) {
  std::vector<double> out;
  for (const auto& f : fields) {
    const auto it = std::find_if(manifold.states.begin(), manifold.states.end(),
                                 [&](const ManifoldState& m) { return std::abs(m.t - f.t) <= 1e-9; });
    if (it == manifold.states.end()) continue;
    const auto lhs = field_average(f, A);
    const auto w = it->weights();
    double mass = 0.0;
    std::vector<double> rhs(lhs.size(), 0.0);
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto v = A(it->point(i));
      require(v.size() == lhs.size(), "concentration_check: observable changed dimension");
      for (std::size_t d = 0; d < v.size(); ++d) rhs[d] += w[i] * it->rho[i] * v[d];
      mass += w[i] * it->rho[i];
    }
    if (!(mass > 0.0)) throw ValidationError("concentration_check: manifold density has zero mass");
    double dev = 0.0;
    for (std::size_t d = 0; d < lhs.size(); ++d) dev += std::pow(lhs[d] - rhs[d] / mass, 2);
    out.push_back(std::sqrt(dev));
  }
  require(!out.empty(), "concentration_check: no common times");
  return out;
}

/// Ring u(r, s) = rho(s) exp(-(r - R)^2 / 2 sigma^2) / Z with Z = int_0^inf exp(...) r dr,
/// so that the polar marginal of u is rho.
inline Field2D ring_field(double L, std::size_t n, double D, double R, double sigma,
                          const std::function<double(double)>& rho) {
  require(R > 0.0 && sigma > 0.0, "ring_field: R and sigma must be positive");
  Field2D f(L, n, D);
  // Z = sigma^2 exp(-R^2/2s^2) + R sigma sqrt(pi/2) (1 + erf(R / (sigma sqrt 2)))
  const double Z = sigma * sigma * std::exp(-R * R / (2 * sigma * sigma)) +
                   R * sigma * std::sqrt(std::numbers::pi / 2.0) * (1.0 + std::erf(R / (sigma * std::sqrt(2.0))));
  f.sample([&](double x, double y) {
    const double r = std::hypot(x, y);
    const double s = std::atan2(y, x);
    return rho(s) * std::exp(-(r - R) * (r - R) / (2 * sigma * sigma)) / Z;
  });
  return f;
}

/// Flat snapshot with header x,y,u.
inline void write_field_csv(const std::filesystem::path& path, const Field2D& f) {
  csv::Writer w(path, {"x", "y", "u"});
  for (std::size_t iy = 0; iy < f.n; ++iy) {
    for (std::size_t ix = 0; ix < f.n; ++ix) w.row({f.node(ix), f.node(iy), f.at(ix, iy)});
  }
}

inline void write_extraction_csv(const std::filesystem::path& path, const Extraction& e) {
  csv::Writer w(path, {"s", "rho"});
  for (std::size_t k = 0; k < e.s.size(); ++k) w.row({e.s[k], e.rho[k]});
}

}  // namespace sld
