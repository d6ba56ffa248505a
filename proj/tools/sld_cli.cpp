// Command-line scenario runner.
//
//   sld_cli <exact|spectral|simulate|manifold|planar2d|asymptotic> [config] [--out DIR] [--key.name=value ...]
//   sld_cli sweep [config] --axis KEY --values v1,v2,... [--out DIR] [--key.name=value ...]
//   sld_cli compare BUNDLE_A BUNDLE_B [--tol-linf X] [--tol-l2 Y]
//   sld_cli preset NAME [--out DIR] [--preset-dir DIR] [--key.name=value ...]
//   sld_cli presets [--preset-dir DIR]
//
// Exit codes: 0 success, 1 comparison outside tolerance, 2 validation error, 3 solver abort.

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "scenario.hpp"

#ifndef SLD_PRESET_DIR
#define SLD_PRESET_DIR "presets"
#endif

namespace {

using sld::scenario::Config;

// Pulls `--section.name=value` arguments out of argv; everything else goes to CLI11.
std::pair<std::vector<std::pair<std::string, std::string>>, std::vector<std::string>> split_overrides(int argc,
                                                                                                     char** argv) {
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> rest;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const auto eq = arg.find('=');
    const auto dot = arg.find('.');
    if (arg.rfind("--", 0) == 0 && eq != std::string::npos && dot != std::string::npos && dot < eq) {
      overrides.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
    } else {
      rest.push_back(arg);
    }
  }
  return {overrides, rest};
}

Config load(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  Config c = path.empty() ? Config{} : Config::from_file(path);
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  auto [overrides, rest] = split_overrides(argc, argv);

  CLI::App app{"Semiclassical density solvers on the circle and in the plane"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::string preset_dir = SLD_PRESET_DIR;

  struct SolverCommand {
    std::string name;
    std::string solver;
    CLI::App* app;
  };
  std::vector<SolverCommand> solver_cmds;
  for (const auto& [name, solver] : std::vector<std::pair<std::string, std::string>>{{"exact", "exact"},
                                                                                     {"spectral", "spectral"},
                                                                                     {"simulate", "grid"},
                                                                                     {"manifold", "manifold"},
                                                                                     {"planar2d", "planar2d"},
                                                                                     {"asymptotic", "asymptotic"}}) {
    auto* sub = app.add_subcommand(name, "Run the " + solver + " solver");
    sub->add_option("config", config_path, "Config file of key = value lines");
    sub->add_option("--out", out_dir, "Output bundle directory (default: output.dir)");
    solver_cmds.push_back({name, solver, sub});
  }

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one bundle per value of a config key");
  std::string axis;
  std::string values;
  sweep_cmd->add_option("config", config_path, "Base config file");
  sweep_cmd->add_option("--axis", axis, "Dotted config key to vary")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory");

  auto* compare_cmd = app.add_subcommand("compare", "Compare the snapshots of two bundles");
  std::string bundle_a;
  std::string bundle_b;
  double tol_linf = 0.1;
  double tol_l2 = std::numeric_limits<double>::infinity();
  compare_cmd->add_option("reference", bundle_a, "Reference bundle")->required();
  compare_cmd->add_option("candidate", bundle_b, "Candidate bundle")->required();
  compare_cmd->add_option("--tol-linf", tol_linf, "Relative L-infinity tolerance");
  compare_cmd->add_option("--tol-l2", tol_l2, "Relative L2 tolerance");

  auto* preset_cmd = app.add_subcommand("preset", "Run a committed preset");
  std::string preset_name;
  preset_cmd->add_option("name", preset_name, "Preset name, e.g. fig5b")->required();
  preset_cmd->add_option("--out", out_dir, "Output directory (default: output.dir/<name>)");
  preset_cmd->add_option("--preset-dir", preset_dir, "Directory holding <name>.cfg files");

  auto* list_cmd = app.add_subcommand("presets", "List available presets");
  list_cmd->add_option("--preset-dir", preset_dir, "Directory holding <name>.cfg files");

  try {
    std::vector<std::string> reversed(rest.rbegin(), rest.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    for (const auto& cmd : solver_cmds) {
      if (!cmd.app->parsed()) continue;
      Config c = load(config_path, overrides);
      c.set("run.solver", cmd.solver);
      const auto dir = out_dir.empty() ? c.get("output.dir") : out_dir;
      const auto r = sld::scenario::run(c, dir);
      std::cout << "wrote " << r.files.size() << " files to " << dir << "\n";
      if (r.compare_linf) {
        std::cout << "comparison (" << c.get("compare.against") << "): final relative Linf "
                  << sld::csv::format(*r.compare_linf) << (r.compare_pass ? " PASS" : " FAIL") << "\n";
      }
      return r.compare_pass ? 0 : 1;
    }
    if (sweep_cmd->parsed()) {
      Config c = load(config_path, overrides);
      const auto dir = out_dir.empty() ? c.get("output.dir") : out_dir;
      c.set("sweep.values", values);
      const auto res = sld::scenario::sweep(c, axis, c.list("sweep.values"), dir);
      std::cout << "value,n_peaks,homogeneity,mass\n";
      for (std::size_t i = 0; i < res.runs.size(); ++i) {
        const auto& d = res.runs[i].final;
        std::cout << sld::scenario::label(res.values[i]) << ',' << d.n_peaks << ',' << sld::csv::format(d.homogeneity)
                  << ',' << sld::csv::format(d.mass) << '\n';
      }
      return 0;
    }
    if (compare_cmd->parsed()) {
      const auto rep = sld::scenario::compare(bundle_a, bundle_b, tol_linf, tol_l2);
      std::cout << "t,linf,l2,pass\n";
      for (const auto& r : rep.rows) {
        std::cout << sld::csv::format(r.t) << ',' << sld::csv::format(r.linf) << ',' << sld::csv::format(r.l2) << ','
                  << (r.pass ? 1 : 0) << '\n';
      }
      std::cout << (rep.pass ? "compare: PASS\n" : "compare: FAIL\n");
      return rep.pass ? 0 : 1;
    }
    if (preset_cmd->parsed()) {
      Config c = Config::from_file(sld::scenario::preset_path(preset_dir, preset_name));
      for (const auto& [k, v] : overrides) c.set(k, v);
      const auto dir = out_dir.empty() ? (std::filesystem::path(c.get("output.dir")) / preset_name).string() : out_dir;
      sld::scenario::run_or_sweep(c, dir);
      std::cout << "preset " << preset_name << " written to " << dir << "\n";
      return 0;
    }
    if (list_cmd->parsed()) {
      for (const auto& n : sld::scenario::preset_names(preset_dir)) std::cout << n << "\n";
      return 0;
    }
  } catch (const sld::SolverAbort& e) {
    std::cerr << "solver abort: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
