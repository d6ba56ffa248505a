#pragma once

// Einstein-Ehrenfest system on a sampled one-parameter manifold X(t, s) in R^n:
//
//   rho_t(s) = rho(s) [ a(X(s), t) - kappa int_G b(X(s), X(s')) rho(s') ds' ]
//   X_t(s)   = V(X(s), t) + kappa int_G W(X(s), X(s'), t) rho(s') ds'
//
// Integrals over G use the rectangle rule for periodic parameter domains and the
// trapezoid rule otherwise.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sld/csv.hpp"
#include "sld/error.hpp"
#include "sld/kernel.hpp"
#include "sld/parallel.hpp"
#include "sld/spectral.hpp"

namespace sld {

struct ManifoldState {
  std::vector<double> s;    // parameter samples
  std::vector<double> X;    // points, row-major: X[i * dim + d]
  std::vector<double> rho;  // density per sample
  std::size_t dim = 2;
  double t = 0.0;
  bool periodic = true;
  double period = two_pi;   // parameter period when periodic

  [[nodiscard]] std::size_t size() const { return s.size(); }
  [[nodiscard]] std::span<const double> point(std::size_t i) const { return {X.data() + i * dim, dim}; }
  [[nodiscard]] std::span<double> point(std::size_t i) { return {X.data() + i * dim, dim}; }

  /// Quadrature weights over the parameter domain.
  [[nodiscard]] std::vector<double> weights() const {
    const std::size_t n = size();
    std::vector<double> w(n);
    if (periodic) {
      std::fill(w.begin(), w.end(), period / static_cast<double>(n));
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? s[i] - s[i - 1] : 0.0;
        const double right = i + 1 < n ? s[i + 1] - s[i] : 0.0;
        w[i] = 0.5 * (left + right);
      }
    }
    return w;
  }

  void validate() const {
    const std::size_t n = size();
    require(n >= 2, "manifold: need at least two samples");
    require(dim >= 1, "manifold: dimension must be positive");
    require(X.size() == n * dim && rho.size() == n, "manifold: inconsistent array sizes");
    for (double v : rho) require(std::isfinite(v) && v >= 0.0, "manifold: density must be finite and nonnegative");
    for (double v : X) require(std::isfinite(v), "manifold: points must be finite");
    // Continuity: neighbouring points no further apart than 4x the median spacing.
    std::vector<double> gaps;
    const std::size_t links = periodic ? n : n - 1;
    for (std::size_t i = 0; i < links; ++i) {
      const auto p = point(i);
      const auto q = point((i + 1) % n);
      double d2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) d2 += (p[d] - q[d]) * (p[d] - q[d]);
      gaps.push_back(std::sqrt(d2));
    }
    auto sorted = gaps;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (double g : gaps) require(g <= 4.0 * median + 1e-300, "manifold: sampled curve is not continuous");
  }
};

/// Circle X(s) = (R cos s, R sin s) on the uniform periodic grid, with density samples.
inline ManifoldState circle_manifold(double R, std::span<const double> rho) {
  ManifoldState m;
  m.s = periodic_grid(rho.size());
  m.dim = 2;
  m.X.resize(2 * rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    m.X[2 * i] = R * std::cos(m.s[i]);
    m.X[2 * i + 1] = R * std::sin(m.s[i]);
  }
  m.rho.assign(rho.begin(), rho.end());
  return m;
}

using PointSpan = std::span<const double>;

struct ConvectionSpec {
  std::function<double(PointSpan x, double t)> a;
  std::function<double(PointSpan x, PointSpan y)> b;
  std::function<void(PointSpan x, double t, std::span<double> out)> V;               // empty: zero
  std::function<void(PointSpan x, PointSpan y, double t, std::span<double> out)> W;  // empty: zero
  double kappa = 0.2;
  bool b_symmetric = true;

  void validate() const {
    require(static_cast<bool>(a), "convection: growth rate a(x,t) is required");
    require(static_cast<bool>(b), "convection: influence function b(x,y) is required");
    require(std::isfinite(kappa) && kappa >= 0.0, "convection: kappa must be nonnegative");
  }
};

// ---------------------------------------------------------------- built-ins

namespace builtin {

inline std::function<double(PointSpan, double)> constant_rate(double a) {
  return [a](PointSpan, double) { return a; };
}

/// b0 exp(-|x - y|^2 / (2 gamma^2)).
inline std::function<double(PointSpan, PointSpan)> gaussian_influence(double b0, double gamma) {
  const double inv = 1.0 / (2.0 * gamma * gamma);
  return [b0, inv](PointSpan x, PointSpan y) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    return b0 * std::exp(-d2 * inv);
  };
}

/// V(x) = -k0 x.
inline std::function<void(PointSpan, double, std::span<double>)> linear_drag(double k0) {
  return [k0](PointSpan x, double, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -k0 * x[i];
  };
}

}  // namespace builtin

struct BuiltinParams {
  double a = 1.0;
  double b0 = 1.0;
  double gamma = 1.0;
  double k0 = 0.0;
  double kappa = 0.2;
};

/// Named built-in specs: "constant_a", "gaussian_b", "linear_drag" are combined by
/// make_builtin_spec; the registry lists what each name supplies.
inline const std::map<std::string, std::string>& builtin_registry() {
  static const std::map<std::string, std::string> r{
      {"constant_a", "a(x,t) = a"},
      {"gaussian_b", "b(x,y) = b0 exp(-|x-y|^2 / 2 gamma^2)"},
      {"linear_drag", "V(x) = -k0 x"},
      {"zero_w", "W = 0"},
  };
  return r;
}

inline ConvectionSpec make_builtin_spec(const BuiltinParams& p) {
  require(p.gamma > 0.0 && p.b0 > 0.0, "convection: gamma and b0 must be positive");
  ConvectionSpec spec;
  spec.a = builtin::constant_rate(p.a);
  spec.b = builtin::gaussian_influence(p.b0, p.gamma);
  if (p.k0 != 0.0) spec.V = builtin::linear_drag(p.k0);
  spec.kappa = p.kappa;
  return spec;
}

// ---------------------------------------------------------------- dynamics

struct ManifoldRates {
  std::vector<double> rho_dot;
  std::vector<double> X_dot;  // same layout as ManifoldState::X
};

inline ManifoldRates ee_rhs(const ManifoldState& st, const ConvectionSpec& spec) {
  spec.validate();
  const std::size_t n = st.size();
  const std::size_t dim = st.dim;
  const auto w = st.weights();
  ManifoldRates r;
  r.rho_dot.assign(n, 0.0);
  r.X_dot.assign(n * dim, 0.0);

  // Nonlocal density integral; with a symmetric b each pair is evaluated once.
  std::vector<double> I(n, 0.0);
  if (spec.b_symmetric) {
    std::vector<double> B(n * n);
    for_each_index(n, [&](std::size_t i) {
      for (std::size_t j = i; j < n; ++j) B[i * n + j] = spec.b(st.point(i), st.point(j));
    });
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += (j >= i ? B[i * n + j] : B[j * n + i]) * w[j] * st.rho[j];
      I[i] = acc;
    }
  } else {
    for_each_index(n, [&](std::size_t i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += spec.b(st.point(i), st.point(j)) * w[j] * st.rho[j];
      I[i] = acc;
    });
  }

  for_each_index(n, [&](std::size_t i) {
    const double growth = spec.a(st.point(i), st.t);
    r.rho_dot[i] = st.rho[i] * (growth - spec.kappa * I[i]);
    std::span<double> xd(r.X_dot.data() + i * dim, dim);
    if (spec.V) spec.V(st.point(i), st.t, xd);
    if (spec.W) {
      std::vector<double> tmp(dim);
      for (std::size_t j = 0; j < n; ++j) {
        spec.W(st.point(i), st.point(j), st.t, tmp);
        for (std::size_t d = 0; d < dim; ++d) xd[d] += spec.kappa * w[j] * st.rho[j] * tmp[d];
      }
    }
  });

  for (double v : r.rho_dot) {
    if (!std::isfinite(v)) throw SolverAbort("manifold: non-finite density rate at t=" + csv::format(st.t));
  }
  for (double v : r.X_dot) {
    if (!std::isfinite(v)) throw SolverAbort("manifold: non-finite velocity at t=" + csv::format(st.t));
  }
  return r;
}

struct ManifoldTrajectory {
  std::vector<ManifoldState> states;
};

/// Fixed-step RK4 on (X, rho). States are stored at the requested times (sorted);
/// each segment uses ceil(segment/dt) equal steps.
inline ManifoldTrajectory integrate(const ManifoldState& state0, const ConvectionSpec& spec,
                                    std::span<const double> times, double dt, double blowup_limit = 1e12) {
  state0.validate();
  spec.validate();
  ManifoldTrajectory traj;
  ManifoldState y = state0;
  const std::size_t nr = y.rho.size();
  const std::size_t nx = y.X.size();

  auto advance = [&](double h) {
    ManifoldState stage = y;
    auto set_stage = [&](const ManifoldRates& k, double w, double t) {
      for (std::size_t i = 0; i < nr; ++i) stage.rho[i] = y.rho[i] + w * k.rho_dot[i];
      for (std::size_t i = 0; i < nx; ++i) stage.X[i] = y.X[i] + w * k.X_dot[i];
      stage.t = t;
    };
    const auto k1 = ee_rhs(y, spec);
    set_stage(k1, 0.5 * h, y.t + 0.5 * h);
    const auto k2 = ee_rhs(stage, spec);
    set_stage(k2, 0.5 * h, y.t + 0.5 * h);
    const auto k3 = ee_rhs(stage, spec);
    set_stage(k3, h, y.t + h);
    const auto k4 = ee_rhs(stage, spec);
    for (std::size_t i = 0; i < nr; ++i) {
      y.rho[i] += (h / 6.0) * (k1.rho_dot[i] + 2.0 * k2.rho_dot[i] + 2.0 * k3.rho_dot[i] + k4.rho_dot[i]);
    }
    for (std::size_t i = 0; i < nx; ++i) {
      y.X[i] += (h / 6.0) * (k1.X_dot[i] + 2.0 * k2.X_dot[i] + 2.0 * k3.X_dot[i] + k4.X_dot[i]);
    }
    double hi = 0.0;
    for (double v : y.rho) hi = std::max(hi, std::abs(v));
    for (double v : y.X) hi = std::max(hi, std::abs(v));
    if (!std::isfinite(hi) || hi > blowup_limit) throw SolverAbort("manifold: state blew up");
    for (double& v : y.rho) {
      if (v >= 0.0) continue;
      if (v < -1e-10 * hi) throw SolverAbort("manifold: negative density " + csv::format(v));
      v = 0.0;
    }
  };

  for (double target : times) {
    require(target >= y.t - 1e-12, "manifold: output times must be nondecreasing");
    const double span_t = target - y.t;
    const long n = span_t > 0.0 ? step_count(span_t, dt) : 0;
    const double h = n > 0 ? span_t / static_cast<double>(n) : 0.0;
    const double t0 = y.t;
    for (long i = 1; i <= n; ++i) {
      advance(h);
      y.t = t0 + h * static_cast<double>(i);
    }
    y.t = target;
    traj.states.push_back(y);
  }
  return traj;
}

struct InitialMoments {
  double mass = 0.0;
  std::vector<double> centroid;
};

/// m = int rho_phi ds and the first normalized moment m^{-1} int X_phi rho_phi ds.
inline InitialMoments initial_correspondence(const ManifoldState& st) {
  const auto w = st.weights();
  InitialMoments m;
  m.centroid.assign(st.dim, 0.0);
  for (std::size_t i = 0; i < st.size(); ++i) {
    m.mass += w[i] * st.rho[i];
    for (std::size_t d = 0; d < st.dim; ++d) m.centroid[d] += w[i] * st.rho[i] * st.point(i)[d];
  }
  if (!(m.mass > 0.0)) throw ValidationError("manifold: zero initial mass");
  for (auto& c : m.centroid) c /= m.mass;
  return m;
}

/// Trajectory export with header t,s,x1,...,xn,rho.
inline void write_manifold_csv(const std::filesystem::path& path, const ManifoldTrajectory& traj) {
  require(!traj.states.empty(), "manifold: empty trajectory");
  std::vector<std::string> header{"t", "s"};
  for (std::size_t d = 0; d < traj.states.front().dim; ++d) header.push_back("x" + std::to_string(d + 1));
  header.push_back("rho");
  csv::Writer w(path, header);
  for (const auto& st : traj.states) {
    for (std::size_t i = 0; i < st.size(); ++i) {
      std::vector<double> row{st.t, st.s[i]};
      for (double x : st.point(i)) row.push_back(x);
      row.push_back(st.rho[i]);
      w.row(row);
    }
  }
}

}  // namespace sld
