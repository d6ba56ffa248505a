#pragma once

// Scenario configuration, solver dispatch and artifact bundles for the command-line
// runner. A bundle is a directory of CSV files plus manifest.json.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sld/analysis.hpp"
#include "sld/asymptotics.hpp"
#include "sld/csv.hpp"
#include "sld/error.hpp"
#include "sld/exact.hpp"
#include "sld/grid.hpp"
#include "sld/kernel.hpp"
#include "sld/manifold.hpp"
#include "sld/parallel.hpp"
#include "sld/planar2d.hpp"
#include "sld/spectral.hpp"

#ifndef SLD_VERSION
#define SLD_VERSION "unknown"
#endif

namespace sld::scenario {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- config text

/// Every recognised key with its default. "auto" defers to a value derived at run time.
inline const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> d{
      {"run.solver", "grid"},
      {"model.a", "1"},
      {"model.b0", "1"},
      {"model.kappa", "0.2"},
      {"model.gamma", "1"},
      {"model.R", "1"},
      {"model.D", "0"},
      {"model.k0", "0"},
      {"model.T", "10"},
      {"model.beta00", "1"},
      {"numerics.N", "512"},
      {"numerics.J", "10"},
      {"numerics.dt", "0.01"},
      {"numerics.t_end", "200"},
      {"numerics.times", "auto"},
      {"numerics.scheme", "auto"},
      {"numerics.backend", "fast"},
      {"numerics.prominence", "0.05"},
      {"initial.kind", "gaussian_bump"},
      {"initial.base", "auto"},
      {"initial.amplitude", "auto"},
      {"initial.width", "0.6"},
      {"initial.half_width", "2"},
      {"initial.height", "1"},
      {"exact.alpha", "0.95"},
      {"exact.samples", "401"},
      {"planar.L", "3"},
      {"planar.n", "128"},
      {"planar.sigma", "0.1"},
      {"compare.against", "none"},
      {"compare.tol_linf", "0.1"},
      {"compare.tol_l2", "inf"},
      {"output.dir", "out"},
      {"output.plot", "false"},
      {"output.ring", "false"},
      {"sweep.axis", ""},
      {"sweep.values", ""},
  };
  return d;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Config {
public:
  Config() {
    for (const auto& [k, v] : defaults()) values_[k] = v;
  }

  /// `key = value` lines; '#' starts a comment; blank lines ignored.
  static Config from_text(const std::string& text, const std::string& origin = "config") {
    Config c;
    c.merge_text(text, origin);
    return c;
  }

  static Config from_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path.string());
  }

  void merge_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    }
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.contains(key)) throw ValidationError(key + ": unknown configuration key");
    values_[key] = value;
  }

  [[nodiscard]] const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError(key + ": unknown configuration key");
    return it->second;
  }

  [[nodiscard]] bool is_auto(const std::string& key) const { return get(key) == "auto"; }

  [[nodiscard]] double number(const std::string& key) const {
    const auto& v = get(key);
    if (v == "inf") return std::numeric_limits<double>::infinity();
    try {
      return csv::parse(v);
    } catch (const ValidationError&) {
      throw ValidationError(key + ": expected a number, got '" + v + "'");
    }
  }

  [[nodiscard]] long integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 1e15) throw ValidationError(key + ": expected an integer");
    return static_cast<long>(v);
  }

  [[nodiscard]] bool flag(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(key + ": expected true or false, got '" + v + "'");
  }

  [[nodiscard]] std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto t = trim(item);
      if (t.empty()) continue;
      try {
        out.push_back(csv::parse(t));
      } catch (const ValidationError&) {
        throw ValidationError(key + ": bad list entry '" + t + "'");
      }
    }
    return out;
  }

  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------- typed view

struct ScenarioConfig {
  std::string solver;
  double a = 1, b0 = 1, kappa = 0.2, gamma = 1, R = 1, D = 0, k0 = 0, T = 10, beta00 = 1;
  std::size_t N = 512;
  int J = 10;
  double dt = 0.01;
  double t_end = 200;
  std::vector<double> times;
  std::string scheme;
  Backend backend = Backend::fast;
  double prominence = 0.05;
  InitialKind initial_kind = InitialKind::gaussian_bump;
  InitialParams initial;
  double alpha = 0.95;
  std::size_t exact_samples = 401;
  double planar_L = 3;
  std::size_t planar_n = 128;
  double planar_sigma = 0.1;
  std::string compare_against;
  double tol_linf = 0.1;
  double tol_l2 = std::numeric_limits<double>::infinity();
  bool plot = false;
  bool ring = false;

  [[nodiscard]] CircleKernelParams kernel() const { return {b0, gamma, R}; }

  static ScenarioConfig from(const Config& c) {
    ScenarioConfig s;
    s.solver = c.get("run.solver");
    static const std::vector<std::string> solvers{"exact", "spectral", "grid", "manifold", "planar2d", "asymptotic"};
    if (std::find(solvers.begin(), solvers.end(), s.solver) == solvers.end()) {
      throw ValidationError("run.solver: unknown solver '" + s.solver + "'");
    }
    auto positive = [&](const std::string& key) {
      const double v = c.number(key);
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(key + ": must be positive");
      return v;
    };
    auto nonnegative = [&](const std::string& key) {
      const double v = c.number(key);
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(key + ": must be nonnegative");
      return v;
    };
    s.a = c.number("model.a");
    if (!std::isfinite(s.a) || s.a == 0.0) throw ValidationError("model.a: must be finite and nonzero");
    s.b0 = positive("model.b0");
    s.kappa = nonnegative("model.kappa");
    s.gamma = positive("model.gamma");
    s.R = positive("model.R");
    s.D = nonnegative("model.D");
    s.k0 = c.number("model.k0");
    s.T = positive("model.T");
    s.beta00 = positive("model.beta00");

    const long N = c.integer("numerics.N");
    if (N < 8) throw ValidationError("numerics.N: must be at least 8");
    s.N = static_cast<std::size_t>(N);
    const long J = c.integer("numerics.J");
    if (J < 0) throw ValidationError("numerics.J: must be nonnegative");
    s.J = static_cast<int>(J);
    s.dt = positive("numerics.dt");
    s.t_end = nonnegative("numerics.t_end");
    if (c.is_auto("numerics.times")) {
      s.times = {0.0, s.t_end};
    } else {
      s.times = c.list("numerics.times");
    }
    for (double t : s.times) {
      if (!(t >= 0.0 && t <= s.t_end)) throw ValidationError("numerics.times: entries must lie in [0, t_end]");
    }
    if (s.times.empty()) throw ValidationError("numerics.times: no output times");
    if (std::adjacent_find(s.times.begin(), s.times.end(), std::greater_equal<>()) != s.times.end()) {
      throw ValidationError("numerics.times: entries must be strictly increasing");
    }
    std::sort(s.times.begin(), s.times.end());
    s.times.erase(std::unique(s.times.begin(), s.times.end()), s.times.end());
    if (s.times.empty() || s.times.back() != s.t_end) s.times.push_back(s.t_end);
    s.scheme = c.get("numerics.scheme");
    if (s.scheme != "auto") {
      try {
        parse_scheme(s.scheme);
      } catch (const ValidationError& e) {
        throw ValidationError(std::string("numerics.scheme: ") + e.what());
      }
    }
    try {
      s.backend = parse_backend(c.get("numerics.backend"));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("numerics.backend: ") + e.what());
    }
    s.prominence = nonnegative("numerics.prominence");

    try {
      s.initial_kind = parse_initial_kind(c.get("initial.kind"));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("initial.kind: ") + e.what());
    }
    if (s.initial_kind == InitialKind::from_samples) {
      throw ValidationError("initial.kind: from_samples is a library-only kind");
    }
    s.initial.beta00 = s.beta00;
    s.initial.base = c.is_auto("initial.base") ? v0 * s.beta00 : nonnegative("initial.base");
    s.initial.amplitude = c.is_auto("initial.amplitude") ? 1.0 / s.T : c.number("initial.amplitude");
    s.initial.width = positive("initial.width");
    s.initial.half_width = positive("initial.half_width");
    s.initial.height = positive("initial.height");

    s.alpha = positive("exact.alpha");
    const long ns = c.integer("exact.samples");
    if (ns < 2) throw ValidationError("exact.samples: must be at least 2");
    s.exact_samples = static_cast<std::size_t>(ns);
    s.planar_L = positive("planar.L");
    const long pn = c.integer("planar.n");
    if (pn < 8) throw ValidationError("planar.n: must be at least 8");
    s.planar_n = static_cast<std::size_t>(pn);
    s.planar_sigma = positive("planar.sigma");

    s.compare_against = c.get("compare.against");
    if (s.compare_against != "none" && s.compare_against != "asymptotic" && s.compare_against != "exact") {
      throw ValidationError("compare.against: expected none, asymptotic or exact");
    }
    auto tolerance = [&](const std::string& key) {
      const double v = c.number(key);
      if (!(v > 0.0)) throw ValidationError(key + ": must be positive (inf disables the check)");
      return v;
    };
    s.tol_linf = tolerance("compare.tol_linf");
    s.tol_l2 = tolerance("compare.tol_l2");
    s.plot = c.flag("output.plot");
    s.ring = c.flag("output.ring");

    try {
      s.kernel().validate();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("model: ") + e.what());
    }
    if ((s.solver == "asymptotic" || s.compare_against == "asymptotic") && !(s.a > 0.0 && s.kappa > 0.0)) {
      throw ValidationError("model.a, model.kappa: the asymptotic expansion needs a > 0 and kappa > 0");
    }
    return s;
  }

  /// Initial profile as a function of the angle (cutoff takes half height on a jump).
  [[nodiscard]] std::function<double(double)> initial_function() const {
    const InitialParams p = initial;
    switch (initial_kind) {
      case InitialKind::homogeneous:
        return [p](double) { return v0 * p.beta00; };
      case InitialKind::gaussian_bump:
        return [p](double s) {
          s = canonical_angle(s);
          return p.base + p.amplitude * std::exp(-s * s / p.width);
        };
      case InitialKind::cutoff:
        return [p](double s) {
          const double d = std::abs(canonical_angle(s)) - p.half_width;
          return d < 0.0 ? p.height : (d == 0.0 ? 0.5 * p.height : 0.0);
        };
      case InitialKind::from_samples:
        break;
    }
    throw ValidationError("initial.kind: unsupported");
  }

  /// rho~ = T (rho_phi - v0 beta00), the first-order part of the initial data.
  [[nodiscard]] AsymptoticExpansion expansion() const {
    const auto phi = initial_function();
    const double level = v0 * beta00;
    const double scale = T;
    auto beta1 = beta1_initial([&](double s) { return scale * (phi(s) - level); }, J);
    return AsymptoticExpansion(T, beta00, std::move(beta1), kernel(), a, kappa, D);
  }

  [[nodiscard]] Scheme resolved_scheme() const {
    if (scheme != "auto") return parse_scheme(scheme);
    if (D == 0.0) return Scheme::rk4;
    const double ds = two_pi / static_cast<double>(N);
    return dt <= 0.8 * ds * ds / (2.0 * D) ? Scheme::rk4 : Scheme::imex;
  }
};

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::euler: return "euler";
    case Scheme::rk4: return "rk4";
    case Scheme::imex: return "imex";
  }
  return "?";
}

/// Short label for a time or parameter value, safe for file names.
inline std::string label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// ---------------------------------------------------------------- bundles

struct Profiles {
  std::vector<double> s;
  std::vector<double> times;
  std::vector<std::vector<double>> rho;
  std::vector<std::vector<double>> X;  // per time, interleaved (x, y) per sample; empty means the fixed circle
};

struct RunSummary {
  fs::path dir;
  std::vector<std::string> files;
  bool has_profile = false;
  double t_final = 0.0;
  ProfileDiagnostics final;
  std::optional<double> compare_linf;
  std::optional<double> compare_l2;
  bool compare_pass = true;
  std::string scheme;
};

namespace detail {

inline std::string snapshot_name(double t) { return "snapshot_t" + label(t) + ".csv"; }

inline void write_profiles(const ScenarioConfig& cfg, const Profiles& p, RunSummary& out) {
  const double ds = two_pi / static_cast<double>(p.s.size());
  csv::Writer diag(out.dir / "diagnostics.csv", {"t", "mass", "homogeneity", "n_peaks"});
  out.files.push_back("diagnostics.csv");
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    write_profile_csv(out.dir / snapshot_name(p.times[i]), p.s, p.rho[i]);
    out.files.push_back(snapshot_name(p.times[i]));
    const auto d = diagnostics(p.rho[i], ds, cfg.prominence);
    diag.row({p.times[i], d.mass, d.homogeneity, static_cast<double>(d.n_peaks)});
    if (cfg.ring) {
      const auto name = "ring_t" + label(p.times[i]) + ".csv";
      csv::Writer w(out.dir / name, {"s", "x", "y", "rho"});
      for (std::size_t k = 0; k < p.s.size(); ++k) {
        const double x = p.X.empty() ? cfg.R * std::cos(p.s[k]) : p.X[i][2 * k];
        const double y = p.X.empty() ? cfg.R * std::sin(p.s[k]) : p.X[i][2 * k + 1];
        w.row({p.s[k], x, y, p.rho[i][k]});
      }
      out.files.push_back(name);
    }
  }
  out.has_profile = true;
  out.t_final = p.times.back();
  out.final = diagnostics(p.rho.back(), ds, cfg.prominence);

  if (cfg.compare_against == "none") return;
  csv::Writer cmp(out.dir / "comparison.csv", {"t", "linf", "l2", "pass"});
  out.files.push_back("comparison.csv");
  std::optional<AsymptoticExpansion> e;
  if (cfg.compare_against == "asymptotic") e = cfg.expansion();
  const auto hm = HomogeneousModel::from_kernel(cfg.a, cfg.kappa, cfg.kernel(), cfg.beta00);
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    std::vector<double> ref;
    if (e) {
      ref = composite_profile(p.times[i], p.s, *e);
    } else {
      ref.assign(p.s.size(), rho0(p.times[i], hm));
    }
    const double linf = relative_linf(p.rho[i], ref);
    const double l2 = relative_l2(p.rho[i], ref);
    const bool pass = linf <= cfg.tol_linf && l2 <= cfg.tol_l2;
    cmp.row({p.times[i], linf, l2, pass ? 1.0 : 0.0});
    const auto name = cfg.compare_against + "_t" + label(p.times[i]) + ".csv";
    write_profile_csv(out.dir / name, p.s, ref);
    out.files.push_back(name);
    if (i + 1 == p.times.size()) {
      out.compare_linf = linf;
      out.compare_l2 = l2;
    }
    out.compare_pass = out.compare_pass && pass;
  }
}

inline Profiles run_grid(const ScenarioConfig& cfg, RunSummary& out) {
  GridParams gp{cfg.kernel(), cfg.a, cfg.kappa, cfg.D, cfg.backend, cfg.resolved_scheme(), false};
  out.scheme = scheme_name(gp.scheme);
  GridSolver solver(gp, cfg.N);
  const auto st0 = make_initial(cfg.initial_kind, cfg.initial, cfg.N);
  const auto snaps = solver.run(st0, cfg.times, cfg.dt);
  Profiles p;
  p.s = periodic_grid(cfg.N);
  for (const auto& st : snaps) {
    p.times.push_back(st.t);
    p.rho.push_back(st.rho);
  }
  return p;
}

inline Profiles run_spectral(const ScenarioConfig& cfg, RunSummary& out) {
  out.scheme = "rk4";
  const SpectralSystem sys({cfg.a, cfg.D}, cfg.kernel(), cfg.kappa, cfg.J);
  SpectralState state = project_initial(cfg.initial_function(), cfg.J);
  SpectralTrajectory traj;
  Profiles p;
  p.s = periodic_grid(cfg.N);
  for (double t : cfg.times) {
    if (t > state.t) {
      state = integrate(state, sys, t - state.t, cfg.dt, {.store_every = 1 << 30}).states.back();
    }
    state.t = t;
    traj.states.push_back(state);
    p.times.push_back(t);
    p.rho.push_back(reconstruct(state, p.s));
  }
  write_trajectory_csv(out.dir / "trajectory.csv", traj);
  out.files.push_back("trajectory.csv");
  return p;
}

inline Profiles run_asymptotic(const ScenarioConfig& cfg, RunSummary& out) {
  out.scheme = "closed-form";
  const auto e = cfg.expansion();
  Profiles p;
  p.s = periodic_grid(cfg.N);
  for (double t : cfg.times) {
    p.times.push_back(t);
    p.rho.push_back(composite_profile(t, p.s, e));
  }
  csv::Writer w(out.dir / "coefficients.csv", {"j", "re_beta1", "im_beta1", "lambda", "exponent"});
  for (int j = -e.J; j <= e.J; ++j) {
    w.row({static_cast<double>(j), e.b1(j).real(), e.b1(j).imag(), e.lambda(j), e.mode_exponent(j)});
  }
  out.files.push_back("coefficients.csv");
  return p;
}

inline Profiles run_manifold(const ScenarioConfig& cfg, RunSummary& out) {
  out.scheme = "rk4";
  const auto st0 = make_initial(cfg.initial_kind, cfg.initial, cfg.N);
  auto m0 = circle_manifold(cfg.R, st0.rho);
  const auto spec = make_builtin_spec({cfg.a, cfg.b0, cfg.gamma, cfg.k0, cfg.kappa});
  const auto traj = integrate(m0, spec, cfg.times, cfg.dt);
  write_manifold_csv(out.dir / "trajectory.csv", traj);
  out.files.push_back("trajectory.csv");
  Profiles p;
  p.s = m0.s;
  for (const auto& st : traj.states) {
    p.times.push_back(st.t);
    p.rho.push_back(st.rho);
    p.X.push_back(st.X);
  }
  return p;
}

inline Profiles run_planar(const ScenarioConfig& cfg, RunSummary& out) {
  Planar2DParams pp;
  pp.b0 = cfg.b0;
  pp.gamma = cfg.gamma;
  pp.a = cfg.a;
  pp.kappa = cfg.kappa;
  pp.backend = cfg.backend;
  pp.scheme = cfg.scheme == "auto" ? Scheme::rk4 : parse_scheme(cfg.scheme);
  out.scheme = scheme_name(pp.scheme);
  const auto phi = cfg.initial_function();
  const auto f0 = ring_field(cfg.planar_L, cfg.planar_n, cfg.D, cfg.R, cfg.planar_sigma, phi);
  const auto fields = run2d(f0, pp, cfg.times, cfg.dt);

  // Reference density on the static circle, same initial profile.
  const auto st0 = make_initial(cfg.initial_kind, cfg.initial, cfg.N);
  const auto spec = make_builtin_spec({cfg.a, cfg.b0, cfg.gamma, 0.0, cfg.kappa});
  const auto mtraj = integrate(circle_manifold(cfg.R, st0.rho), spec, cfg.times, std::min(cfg.dt, 0.01));
  const auto dev = concentration_check(fields, mtraj);

  csv::Writer conc(out.dir / "concentration.csv", {"t", "mass", "x1", "x2", "deviation", "l2_to_manifold",
                                                   "boundary_fraction"});
  out.files.push_back("concentration.csv");
  Profiles p;
  p.s = periodic_grid(cfg.N);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& f = fields[i];
    const auto name = "field_t" + label(f.t) + ".csv";
    write_field_csv(out.dir / name, f);
    out.files.push_back(name);
    const auto ex = extract_sld(f, cfg.N);
    const auto mom = moments(f);
    conc.row({f.t, mom.mass, mom.centroid[0], mom.centroid[1], dev[i], relative_l2(ex.rho, mtraj.states[i].rho),
              ex.boundary_fraction});
    p.times.push_back(f.t);
    p.rho.push_back(ex.rho);
  }
  return p;
}

inline void run_exact(const ScenarioConfig& cfg, RunSummary& out) {
  out.scheme = "closed-form";
  const auto m = HomogeneousModel::from_kernel(cfg.a, cfg.kappa, cfg.kernel(), cfg.beta00);
  csv::Writer w(out.dir / "exact.csv", {"t", "beta0", "rho0", "rho0_dt"});
  out.files.push_back("exact.csv");
  const auto n = cfg.exact_samples;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = cfg.t_end * static_cast<double>(i) / static_cast<double>(n - 1);
    w.row({t, beta0(t, m), rho0(t, m), rho0_dt(t, m)});
  }
  csv::Writer mk(out.dir / "markers.csv", {"quantity", "value"});
  out.files.push_back("markers.csv");
  mk.labelled_row("lambda0", {m.lambda0});
  mk.labelled_row("saturation_ratio", {m.saturation_ratio()});
  try {
    mk.labelled_row("rho_lim", {rho_lim(m)});
  } catch (const std::domain_error&) {
  }
  try {
    mk.labelled_row("t_max", {t_max(m)});
  } catch (const std::domain_error&) {
  }
  try {
    mk.labelled_row("t_quasi_steady", {t_quasi_steady(cfg.alpha, m)});
    mk.labelled_row("alpha", {cfg.alpha});
  } catch (const std::domain_error&) {
  }
}

inline void write_plot_script(const ScenarioConfig& cfg, RunSummary& out) {
  std::ofstream gp(out.dir / "plot.gp", std::ios::binary);
  gp << "# gnuplot script; run inside this directory: gnuplot plot.gp\n"
     << "set datafile separator ','\n"
     << "set terminal pngcairo size 900,600\n"
     << "set output '" << cfg.solver << ".png'\n";
  if (cfg.solver == "exact") {
    gp << "set xlabel 't'\nset multiplot layout 2,1\n"
       << "plot 'exact.csv' using 1:3 skip 1 with lines title 'rho0'\n"
       << "plot 'exact.csv' using 1:4 skip 1 with lines title 'd rho0/dt'\n"
       << "unset multiplot\n";
  } else {
    gp << "set xlabel 's'\nset ylabel 'rho'\nset xrange [-pi:pi]\nplot ";
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
      if (i) gp << ", \\\n     ";
      gp << "'" << snapshot_name(cfg.times[i]) << "' using 1:2 skip 1 with lines title 't=" << label(cfg.times[i])
         << "'";
    }
    if (cfg.compare_against != "none") {
      gp << ", \\\n     '" << cfg.compare_against << "_t" << label(cfg.times.back())
         << ".csv' using 1:2 skip 1 with lines dashtype 2 title '" << cfg.compare_against << "'";
    }
    gp << "\n";
  }
  out.files.push_back("plot.gp");
}

}  // namespace detail

/// Runs one scenario into `dir` and writes manifest.json last.
inline RunSummary run(const Config& config, const fs::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = ScenarioConfig::from(config);
  fs::create_directories(dir);
  RunSummary out;
  out.dir = dir;
  if (cfg.solver == "exact") {
    detail::run_exact(cfg, out);
  } else {
    Profiles p;
    if (cfg.solver == "grid") p = detail::run_grid(cfg, out);
    else if (cfg.solver == "spectral") p = detail::run_spectral(cfg, out);
    else if (cfg.solver == "asymptotic") p = detail::run_asymptotic(cfg, out);
    else if (cfg.solver == "manifold") p = detail::run_manifold(cfg, out);
    else p = detail::run_planar(cfg, out);
    detail::write_profiles(cfg, p, out);
  }
  if (cfg.plot) detail::write_plot_script(cfg, out);

  nlohmann::ordered_json manifest;
  manifest["version"] = SLD_VERSION;
  manifest["solver"] = cfg.solver;
  manifest["resolved_scheme"] = out.scheme;
  manifest["execution_mode"] = execution_mode() == ExecutionMode::parallel ? "parallel" : "reference";
  nlohmann::ordered_json resolved;
  for (const auto& [k, v] : config.values()) resolved[k] = v;
  manifest["config"] = resolved;
  manifest["files"] = out.files;
  if (out.compare_linf) {
    manifest["comparison"] = {{"against", cfg.compare_against},
                              {"final_linf", *out.compare_linf},
                              {"final_l2", *out.compare_l2},
                              {"pass", out.compare_pass}};
  }
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  return out;
}

// ---------------------------------------------------------------- sweep

struct SweepResult {
  std::vector<double> values;
  std::vector<RunSummary> runs;
};

/// One bundle per value under dir/<axis>_<value>, plus summary.csv with the final-time
/// diagnostics (and the final comparison error when a reference is configured).
inline SweepResult sweep(const Config& base, const std::string& axis, const std::vector<double>& values,
                         const fs::path& dir) {
  if (!base.values().contains(axis)) throw ValidationError("sweep.axis: unknown key '" + axis + "'");
  if (values.empty()) throw ValidationError("sweep.values: no values given");
  {
    const auto probe = ScenarioConfig::from(base);
    if (probe.solver == "exact") throw ValidationError("run.solver: sweeps need a profile-producing solver");
  }
  fs::create_directories(dir);
  SweepResult res;
  for (double v : values) {
    Config c = base;
    c.set(axis, csv::format(v));
    c.set("sweep.axis", "");
    c.set("sweep.values", "");
    res.values.push_back(v);
    res.runs.push_back(run(c, dir / (axis + "_" + label(v))));
  }
  const bool compared = res.runs.front().compare_linf.has_value();
  std::vector<std::string> header{"value", "n_peaks", "homogeneity", "mass"};
  if (compared) header.push_back("linf");
  csv::Writer w(dir / "summary.csv", header);
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    const auto& r = res.runs[i];
    std::vector<double> row{res.values[i], static_cast<double>(r.final.n_peaks), r.final.homogeneity, r.final.mass};
    if (compared) row.push_back(r.compare_linf.value_or(std::numeric_limits<double>::quiet_NaN()));
    w.row(row);
  }
  return res;
}

/// Runs a config as a sweep when sweep.axis is set, otherwise as a single scenario.
inline void run_or_sweep(const Config& c, const fs::path& dir) {
  if (c.get("sweep.axis").empty()) {
    run(c, dir);
  } else {
    sweep(c, c.get("sweep.axis"), c.list("sweep.values"), dir);
  }
}

// ---------------------------------------------------------------- compare

struct SnapshotComparison {
  double t = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
  bool pass = true;
};

struct CompareReport {
  std::vector<SnapshotComparison> rows;
  bool pass = true;
};

/// Linear interpolation of a periodic profile sampled at sorted s in [-pi, pi).
inline double periodic_interpolate(std::span<const double> s, std::span<const double> v, double x) {
  const std::size_t n = s.size();
  x = canonical_angle(x);
  auto upper = std::upper_bound(s.begin(), s.end(), x);
  const std::size_t hi = static_cast<std::size_t>(upper - s.begin()) % n;
  const std::size_t lo = (hi + n - 1) % n;
  double s_lo = s[lo];
  double s_hi = s[hi];
  double xx = x;
  if (s_hi <= s_lo) s_hi += two_pi;
  if (xx < s_lo) xx += two_pi;
  const double w = (xx - s_lo) / (s_hi - s_lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

inline std::map<double, fs::path> snapshots_in(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("compare: '" + dir.string() + "' is not a bundle directory");
  std::map<double, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("snapshot_t", 0) != 0 || entry.path().extension() != ".csv") continue;
    const auto stem = entry.path().stem().string().substr(10);
    out[csv::parse(stem)] = entry.path();
  }
  return out;
}

/// Relative errors of bundle b against bundle a (the reference) at their common
/// snapshot times; b is resampled onto a's grid when the grids differ.
inline CompareReport compare(const fs::path& a, const fs::path& b, double tol_linf, double tol_l2) {
  const auto sa = snapshots_in(a);
  const auto sb = snapshots_in(b);
  CompareReport rep;
  for (const auto& [t, pa] : sa) {
    const auto it = sb.find(t);
    if (it == sb.end()) continue;
    const auto ta = csv::read(pa);
    const auto tb = csv::read(it->second);
    const auto s_a = ta.values("s");
    const auto r_a = ta.values("rho");
    const auto s_b = tb.values("s");
    auto r_b = tb.values("rho");
    if (s_a.size() < 2 || s_b.size() < 2) throw ValidationError("compare: snapshot with fewer than two samples");
    if (s_a != s_b) {
      for (double x : s_b) {
        if (!(x >= -std::numbers::pi && x < std::numbers::pi)) {
          throw ValidationError("compare: s grid of '" + it->second.string() + "' is not in [-pi, pi)");
        }
      }
      if (!std::is_sorted(s_b.begin(), s_b.end())) throw ValidationError("compare: unsorted s grid");
      std::vector<double> res(s_a.size());
      for (std::size_t k = 0; k < s_a.size(); ++k) res[k] = periodic_interpolate(s_b, r_b, s_a[k]);
      r_b = std::move(res);
    }
    SnapshotComparison row;
    row.t = t;
    const bool zero_ref = std::all_of(r_a.begin(), r_a.end(), [](double v) { return v == 0.0; });
    if (zero_ref) {
      const bool same = r_a == r_b;
      row.linf = same ? 0.0 : std::numeric_limits<double>::infinity();
      row.l2 = row.linf;
    } else {
      row.linf = relative_linf(r_b, r_a);
      row.l2 = relative_l2(r_b, r_a);
    }
    row.pass = row.linf <= tol_linf && row.l2 <= tol_l2;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  if (rep.rows.empty()) throw ValidationError("compare: bundles share no snapshot times");
  return rep;
}

// ---------------------------------------------------------------- presets

inline fs::path preset_path(const fs::path& preset_dir, const std::string& name) {
  const auto p = preset_dir / (name + ".cfg");
  if (!fs::exists(p)) throw ValidationError("preset: no preset named '" + name + "' in " + preset_dir.string());
  return p;
}

inline std::vector<std::string> preset_names(const fs::path& preset_dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(preset_dir)) return names;
  for (const auto& e : fs::directory_iterator(preset_dir)) {
    if (e.path().extension() == ".cfg") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace sld::scenario
