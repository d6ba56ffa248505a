#pragma once

// Method-of-lines solver for
//
//   rho_t = D rho_ss + a rho - kappa rho * integral b(s, s') rho(s') ds'
//
// on a uniform periodic grid over [-pi, pi). The integral uses the rectangle rule
// (spectrally accurate under periodicity); the Laplacian is the 3-point stencil.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sld/analysis.hpp"
#include "sld/csv.hpp"
#include "sld/detail/fft.hpp"
#include "sld/detail/tridiagonal.hpp"
#include "sld/error.hpp"
#include "sld/kernel.hpp"
#include "sld/parallel.hpp"
#include "sld/spectral.hpp"

namespace sld {

enum class Backend { direct, fast };
enum class Scheme { euler, rk4, imex };

inline Backend parse_backend(const std::string& name) {
  if (name == "direct") return Backend::direct;
  if (name == "fast") return Backend::fast;
  throw ValidationError("unknown backend '" + name + "' (expected direct|fast)");
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::euler;
  if (name == "rk4") return Scheme::rk4;
  if (name == "imex") return Scheme::imex;
  throw ValidationError("unknown scheme '" + name + "' (expected euler|rk4|imex)");
}

struct GridState {
  std::vector<double> rho;
  double t = 0.0;

  [[nodiscard]] std::size_t N() const { return rho.size(); }
  [[nodiscard]] double ds() const { return two_pi / static_cast<double>(rho.size()); }
  [[nodiscard]] std::vector<double> nodes() const { return periodic_grid(rho.size()); }
};

/// m_rho = (2 pi / N) sum rho_k.
inline double total_mass(const GridState& state) {
  double m = 0.0;
  for (double v : state.rho) m += v;
  return m * state.ds();
}

// ---------------------------------------------------------------- initial data

enum class InitialKind { homogeneous, gaussian_bump, cutoff, from_samples };

inline InitialKind parse_initial_kind(const std::string& name) {
  if (name == "homogeneous") return InitialKind::homogeneous;
  if (name == "gaussian_bump") return InitialKind::gaussian_bump;
  if (name == "cutoff") return InitialKind::cutoff;
  if (name == "from_samples") return InitialKind::from_samples;
  throw ValidationError("unknown initial kind '" + name + "'");
}

struct InitialParams {
  double beta00 = 1.0;          // homogeneous level is v0 * beta00
  double base = -1.0;           // gaussian_bump offset; negative means v0 * beta00
  double amplitude = 0.1;       // gaussian_bump height (1/T for the perturbed data)
  double width = 0.6;           // exp(-s^2 / width)
  double half_width = 2.0;      // cutoff support [-half_width, half_width]
  double height = 1.0;          // cutoff level
  std::vector<double> samples;  // from_samples (length N)
};

/// Samples the named profile at the N grid nodes. The cutoff takes half its height at
/// a node lying exactly on a jump.
inline GridState make_initial(InitialKind kind, const InitialParams& p, std::size_t N) {
  require(N >= 8, "make_initial: grid too small");
  const auto s = periodic_grid(N);
  GridState st;
  st.rho.resize(N);
  switch (kind) {
    case InitialKind::homogeneous:
      require(p.beta00 > 0.0, "make_initial: beta00 must be positive");
      std::fill(st.rho.begin(), st.rho.end(), v0 * p.beta00);
      break;
    case InitialKind::gaussian_bump: {
      require(p.width > 0.0, "make_initial: width must be positive");
      const double base = p.base < 0.0 ? v0 * p.beta00 : p.base;
      for (std::size_t k = 0; k < N; ++k) st.rho[k] = base + p.amplitude * std::exp(-s[k] * s[k] / p.width);
      break;
    }
    case InitialKind::cutoff:
      require(p.half_width > 0.0, "make_initial: half_width must be positive");
      for (std::size_t k = 0; k < N; ++k) {
        const double d = std::abs(s[k]) - p.half_width;
        st.rho[k] = d < 0.0 ? p.height : (d == 0.0 ? 0.5 * p.height : 0.0);
      }
      break;
    case InitialKind::from_samples:
      require(p.samples.size() == N, "make_initial: sample count must equal N");
      for (double v : p.samples) require(std::isfinite(v) && v >= 0.0, "make_initial: samples must be finite and >= 0");
      st.rho = p.samples;
      break;
  }
  return st;
}

// ---------------------------------------------------------------- nonlocal term

/// Kernel values g_m = b(m ds) for m = 0..N-1 (offsets wrap).
inline std::vector<double> kernel_offsets(const CircleKernelParams& k, std::size_t N) {
  std::vector<double> g(N);
  const double ds = two_pi / static_cast<double>(N);
  for (std::size_t m = 0; m < N; ++m) g[m] = kernel_of_offset(ds * static_cast<double>(m), k);
  return g;
}

/// I_k = ds * sum_l b(s_k, s_l) rho_l with the double loop.
inline std::vector<double> nonlocal_direct(std::span<const double> rho, const CircleKernelParams& k) {
  const std::size_t N = rho.size();
  const auto g = kernel_offsets(k, N);
  const double ds = two_pi / static_cast<double>(N);
  std::vector<double> out(N);
  for_each_index(N, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t l = 0; l < N; ++l) acc += g[(i + N - l) % N] * rho[l];
    out[i] = ds * acc;
  });
  return out;
}

/// Nonlocal operator bound to one grid size, kernel and backend.
class NonlocalOperator {
public:
  NonlocalOperator(const CircleKernelParams& k, std::size_t N, Backend backend, bool self_check = false)
      : kernel_(k), N_(N), backend_(backend), self_check_(self_check) {
    k.validate();
    require(N >= 8, "nonlocal: grid too small");
    if (backend == Backend::fast || self_check) {
      convolver_ = std::make_unique<detail::CircularConvolver>(kernel_offsets(k, N));
    }
  }

  [[nodiscard]] std::vector<double> operator()(std::span<const double> rho) const {
    require(rho.size() == N_, "nonlocal: grid size mismatch");
    std::vector<double> out;
    if (backend_ == Backend::direct) {
      out = nonlocal_direct(rho, kernel_);
    } else {
      out.resize(N_);
      convolver_->apply(rho, out);
      const double ds = two_pi / static_cast<double>(N_);
      for (auto& v : out) v *= ds;
    }
    if (self_check_) check_against_other(rho, out);
    return out;
  }

  [[nodiscard]] Backend backend() const { return backend_; }

private:
  void check_against_other(std::span<const double> rho, const std::vector<double>& got) const {
    std::vector<double> other;
    if (backend_ == Backend::direct) {
      other.resize(N_);
      convolver_->apply(rho, other);
      for (auto& v : other) v *= two_pi / static_cast<double>(N_);
    } else {
      other = nonlocal_direct(rho, kernel_);
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < N_; ++i) {
      num = std::max(num, std::abs(got[i] - other[i]));
      den = std::max(den, std::abs(other[i]));
    }
    if (num > 1e-12 * std::max(den, 1e-300)) {
      throw SolverAbort("nonlocal: direct and fast backends disagree (relative " + csv::format(num / den) + ")");
    }
  }

  CircleKernelParams kernel_;
  std::size_t N_;
  Backend backend_;
  bool self_check_;
  std::unique_ptr<detail::CircularConvolver> convolver_;
};

inline std::vector<double> nonlocal_term(const GridState& state, const CircleKernelParams& k, Backend backend) {
  return NonlocalOperator(k, state.N(), backend)(state.rho);
}

// ---------------------------------------------------------------- time stepping

struct GridParams {
  CircleKernelParams kernel;
  double a = 1.0;
  double kappa = 0.2;
  double D = 0.0;
  Backend backend = Backend::fast;
  Scheme scheme = Scheme::rk4;
  bool self_check = false;
};

class GridSolver {
public:
  GridSolver(const GridParams& p, std::size_t N)
      : p_(p), N_(N), op_(p.kernel, N, p.backend, p.self_check), lambda0_(eigenvalue(0, p.kernel)) {
    require(std::isfinite(p.a), "grid: a must be finite");
    require(std::isfinite(p.kappa) && p.kappa >= 0.0, "grid: kappa must be nonnegative");
    require(std::isfinite(p.D) && p.D >= 0.0, "grid: D must be nonnegative");
  }

  [[nodiscard]] const GridParams& params() const { return p_; }
  [[nodiscard]] double ds() const { return two_pi / static_cast<double>(N_); }

  /// Largest admissible step: 0.8 min(ds^2/(2D), 1/(a + kappa lambda_0 max rho)); the
  /// diffusion limit is dropped for the imex scheme.
  [[nodiscard]] double max_stable_dt(const GridState& st) const {
    const double max_rho = *std::max_element(st.rho.begin(), st.rho.end());
    double bound = 1.0 / (std::abs(p_.a) + p_.kappa * lambda0_ * std::max(max_rho, 0.0));
    if (p_.scheme != Scheme::imex && p_.D > 0.0) bound = std::min(bound, ds() * ds() / (2.0 * p_.D));
    return 0.8 * bound;
  }

  /// Right-hand side D rho_ss + a rho - kappa rho I[rho]; diffusion omitted when with_diffusion is false.
  [[nodiscard]] std::vector<double> rate(std::span<const double> rho, bool with_diffusion = true) const {
    const auto I = op_(rho);
    std::vector<double> out(N_);
    const double inv_ds2 = 1.0 / (ds() * ds());
    for (std::size_t k = 0; k < N_; ++k) {
      double v = p_.a * rho[k] - p_.kappa * rho[k] * I[k];
      if (with_diffusion && p_.D > 0.0) {
        v += p_.D * (rho[(k + N_ - 1) % N_] - 2.0 * rho[k] + rho[(k + 1) % N_]) * inv_ds2;
      }
      out[k] = v;
    }
    return out;
  }

  [[nodiscard]] GridState step(const GridState& st, double dt) {
    require(st.N() == N_, "grid: state size does not match solver");
    require(dt > 0.0 && std::isfinite(dt), "grid: dt must be positive");
    const double limit = max_stable_dt(st);
    if (dt > limit * (1.0 + 1e-12)) {
      throw ValidationError("grid: dt=" + csv::format(dt) + " exceeds stability bound " + csv::format(limit));
    }
    GridState next;
    next.t = st.t + dt;
    switch (p_.scheme) {
      case Scheme::euler: {
        const auto k1 = rate(st.rho);
        next.rho.resize(N_);
        for (std::size_t k = 0; k < N_; ++k) next.rho[k] = st.rho[k] + dt * k1[k];
        break;
      }
      case Scheme::rk4: {
        std::vector<double> y(N_);
        const auto k1 = rate(st.rho);
        for (std::size_t k = 0; k < N_; ++k) y[k] = st.rho[k] + 0.5 * dt * k1[k];
        const auto k2 = rate(y);
        for (std::size_t k = 0; k < N_; ++k) y[k] = st.rho[k] + 0.5 * dt * k2[k];
        const auto k3 = rate(y);
        for (std::size_t k = 0; k < N_; ++k) y[k] = st.rho[k] + dt * k3[k];
        const auto k4 = rate(y);
        next.rho.resize(N_);
        for (std::size_t k = 0; k < N_; ++k) {
          next.rho[k] = st.rho[k] + (dt / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        break;
      }
      case Scheme::imex: {
        // (I - dt D L) rho^{n+1} = rho^n + dt R(rho^n)
        const auto r = rate(st.rho, false);
        std::vector<double> rhs(N_);
        for (std::size_t k = 0; k < N_; ++k) rhs[k] = st.rho[k] + dt * r[k];
        if (p_.D > 0.0) {
          const double c = dt * p_.D / (ds() * ds());
          next.rho = detail::solve_cyclic_tridiagonal(1.0 + 2.0 * c, -c, rhs);
        } else {
          next.rho = std::move(rhs);
        }
        break;
      }
    }
    sanitize(next);
    return next;
  }

  /// Advances to each requested time in turn (sorted, >= st.t), with the step count on
  /// every segment chosen as ceil(segment / dt). Returns the states at those times.
  std::vector<GridState> run(GridState st, std::span<const double> times, double dt) {
    std::vector<GridState> out;
    for (double target : times) {
      require(target >= st.t - 1e-12, "grid: snapshot times must be nondecreasing");
      const double span_t = target - st.t;
      const long n = span_t > 0.0 ? step_count(span_t, dt) : 0;
      const double h = n > 0 ? span_t / static_cast<double>(n) : 0.0;
      const double t0 = st.t;
      for (long i = 1; i <= n; ++i) {
        st = step(st, h);
        st.t = t0 + h * static_cast<double>(i);
      }
      st.t = target;
      out.push_back(st);
    }
    return out;
  }

  /// Negative values in [-1e-10 max, 0) that were clamped to zero so far.
  [[nodiscard]] std::size_t clamped_count() const { return clamped_; }

private:
  void sanitize(GridState& st) {
    double hi = 0.0;
    for (double v : st.rho) {
      if (!std::isfinite(v)) throw SolverAbort("grid: non-finite density at t=" + csv::format(st.t));
      hi = std::max(hi, v);
    }
    if (hi > 1e12) throw SolverAbort("grid: density blew up at t=" + csv::format(st.t));
    for (double& v : st.rho) {
      if (v >= 0.0) continue;
      if (v < -1e-10 * hi) {
        throw SolverAbort("grid: negative density " + csv::format(v) + " at t=" + csv::format(st.t));
      }
      v = 0.0;
      ++clamped_;
    }
  }

  GridParams p_;
  std::size_t N_;
  NonlocalOperator op_;
  double lambda0_;
  std::size_t clamped_ = 0;
};

/// Single step without keeping a solver around.
inline GridState step(const GridState& st, const GridParams& p, double dt) {
  GridSolver solver(p, st.N());
  return solver.step(st, dt);
}

// ---------------------------------------------------------------- output

inline void write_snapshot_csv(const std::filesystem::path& path, const GridState& st) {
  const auto s = st.nodes();
  csv::Writer w(path, {"s", "rho"});
  for (std::size_t k = 0; k < st.N(); ++k) w.row({s[k], st.rho[k]});
}

/// Writes rows t,mass,homogeneity,n_peaks.
class TimeSeriesWriter {
public:
  explicit TimeSeriesWriter(const std::filesystem::path& path, double prominence = 0.05)
      : w_(path, {"t", "mass", "homogeneity", "n_peaks"}), prominence_(prominence) {}

  void record(const GridState& st) {
    const auto d = diagnostics(st.rho, st.ds(), prominence_);
    w_.row({st.t, d.mass, d.homogeneity, static_cast<double>(d.n_peaks)});
  }

private:
  csv::Writer w_;
  double prominence_;
};

}  // namespace sld
