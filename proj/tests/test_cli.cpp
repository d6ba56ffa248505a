#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "scenario.hpp"

namespace {

namespace fs = std::filesystem;
using sld::scenario::Config;
using sld::scenario::ScenarioConfig;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sld_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SLD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Config quick(const std::string& solver) {
  auto c = Config::from_text("run.solver = " + solver +
                             "\nnumerics.N = 64\nnumerics.J = 6\nnumerics.t_end = 1\nnumerics.times = 0, 0.5, 1\n");
  return c;
}

TEST(Config, DefaultsAndParsing) {
  const auto c = Config::from_text(
      "# comment\n"
      "model.a = 0.1   # trailing comment\n"
      "\n"
      "numerics.times = 0, 50 ,200\n"
      "output.plot = yes\n");
  EXPECT_EQ(c.number("model.a"), 0.1);
  EXPECT_EQ(c.number("model.kappa"), 0.2);
  EXPECT_EQ(c.list("numerics.times"), (std::vector<double>{0, 50, 200}));
  EXPECT_TRUE(c.flag("output.plot"));
  EXPECT_TRUE(c.is_auto("numerics.scheme"));
  EXPECT_EQ(c.number("compare.tol_l2"), std::numeric_limits<double>::infinity());
}

TEST(Config, ErrorsNameTheField) {
  auto expect_msg = [](auto&& fn, const std::string& needle) {
    try {
      fn();
      ADD_FAILURE() << "no exception, expected " << needle;
    } catch (const sld::ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_msg([] { Config::from_text("model.zeta = 1"); }, "model.zeta");
  expect_msg([] { Config::from_text("model.a 1", "x.cfg"); }, "x.cfg:1");
  expect_msg([] { (void)Config::from_text("model.a = abc").number("model.a"); }, "model.a");
  expect_msg([] { (void)Config::from_text("numerics.N = 3.5").integer("numerics.N"); }, "numerics.N");
  expect_msg([] { (void)Config::from_text("output.plot = maybe").flag("output.plot"); }, "output.plot");
  expect_msg([] { (void)Config::from_text("numerics.times = 1, x").list("numerics.times"); }, "numerics.times");
  expect_msg([] { ScenarioConfig::from(Config::from_text("numerics.N = 4")); }, "numerics.N");
  expect_msg([] { ScenarioConfig::from(Config::from_text("model.gamma = -1")); }, "model.gamma");
  expect_msg([] { ScenarioConfig::from(Config::from_text("run.solver = magic")); }, "run.solver");
  expect_msg([] { ScenarioConfig::from(Config::from_text("numerics.times = 5, 1")); }, "numerics.times");
}

TEST(Config, SchemeResolution) {
  auto c = Config::from_text("model.D = 0");
  EXPECT_EQ(ScenarioConfig::from(c).resolved_scheme(), sld::Scheme::rk4);
  c.set("model.D", "0.5");
  c.set("numerics.dt", "0.01");
  EXPECT_EQ(ScenarioConfig::from(c).resolved_scheme(), sld::Scheme::imex);
  c.set("numerics.scheme", "euler");
  EXPECT_EQ(ScenarioConfig::from(c).resolved_scheme(), sld::Scheme::euler);
}

TEST(Csv, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(sld::csv::parse(sld::csv::format(x)), x);
  }
  const auto path = scratch("roundtrip.csv");
  {
    sld::csv::Writer w(path, {"a", "b"});
    w.row({0.1, 1.0 / 3.0});
  }
  const auto t = sld::csv::read(path);
  EXPECT_EQ(t.values("b").front(), 1.0 / 3.0);
  fs::remove(path);
}

TEST(Scenario, BundleLayout) {
  const auto dir = scratch("bundle");
  auto c = quick("grid");
  c.set("output.plot", "true");
  c.set("output.ring", "true");
  const auto r = sld::scenario::run(c, dir);
  for (const char* f : {"snapshot_t0.csv", "snapshot_t0.5.csv", "snapshot_t1.csv", "diagnostics.csv", "manifest.json",
                        "plot.gp", "ring_t1.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["solver"], "grid");
  EXPECT_EQ(manifest["resolved_scheme"], "rk4");
  EXPECT_EQ(manifest["config"]["numerics.N"], "64");
  EXPECT_EQ(r.final.n_peaks, 1);
  fs::remove_all(dir);
}

TEST(Scenario, CompareIdenticalIsZero) {
  const auto a = scratch("cmp_a");
  sld::scenario::run(quick("spectral"), a);
  const auto rep = sld::scenario::compare(a, a, 1e-300, 1e-300);
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.linf, 0.0);
    EXPECT_EQ(row.l2, 0.0);
  }
  EXPECT_TRUE(rep.pass);

  // Different grids: candidate is resampled onto the reference grid.
  const auto b = scratch("cmp_b");
  auto c = quick("grid");
  c.set("numerics.N", "256");
  sld::scenario::run(c, b);
  const auto cross = sld::scenario::compare(a, b, 1e-3, 1e-3);
  EXPECT_TRUE(cross.pass);

  const auto d = scratch("cmp_d");
  auto late = quick("grid");
  late.set("numerics.times", "2");
  late.set("numerics.t_end", "2");
  sld::scenario::run(late, d);
  EXPECT_THROW(sld::scenario::compare(a, d, 1, 1), sld::ValidationError);
  for (const auto& p : {a, b, d}) fs::remove_all(p);
}

TEST(Scenario, PeriodicInterpolation) {
  const auto s = sld::periodic_grid(8);
  std::vector<double> v(8);
  for (std::size_t k = 0; k < 8; ++k) v[k] = static_cast<double>(k);
  EXPECT_NEAR(sld::scenario::periodic_interpolate(s, v, s[2]), 2.0, 1e-15);
  EXPECT_NEAR(sld::scenario::periodic_interpolate(s, v, 0.5 * (s[2] + s[3])), 2.5, 1e-14);
  // Between the last node and the wrap.
  EXPECT_NEAR(sld::scenario::periodic_interpolate(s, v, s[7] + 0.5 * (s[1] - s[0])), 3.5, 1e-14);
}

TEST(Scenario, DeterministicOutput) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const char* solver : {"grid", "spectral", "manifold", "asymptotic"}) {
    sld::scenario::run(quick(solver), a);
    sld::scenario::run(quick(solver), b);
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << solver << " " << e.path().filename();
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST(Scenario, SweepSummary) {
  const auto dir = scratch("sweep");
  const auto res = sld::scenario::sweep(quick("grid"), "model.gamma", {0.5, 2.0}, dir);
  EXPECT_EQ(res.runs.size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "model.gamma_0.5" / "manifest.json"));
  const auto t = sld::csv::read(dir / "summary.csv");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_THROW(sld::scenario::sweep(quick("exact"), "model.a", {1.0}, dir), sld::ValidationError);
  EXPECT_THROW(sld::scenario::sweep(quick("grid"), "model.zzz", {1.0}, dir), sld::ValidationError);
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  const auto out = dir.string();
  const std::string small = " --numerics.N=64 --numerics.t_end=1 --numerics.times=0,1";
  EXPECT_EQ(cli("simulate --out " + out + "/ok" + small), 0);
  EXPECT_EQ(cli("spectral --out " + out + "/sp" + small), 0);
  EXPECT_EQ(cli("compare " + out + "/ok " + out + "/sp --tol-linf 1"), 0);
  EXPECT_EQ(cli("compare " + out + "/ok " + out + "/sp --tol-linf 1e-300"), 1);
  EXPECT_EQ(cli("simulate --out " + out + "/cmp --compare.against=asymptotic --compare.tol_linf=1e-300" + small), 1);
  EXPECT_EQ(cli("simulate --out " + out + "/cmp --compare.against=asymptotic --compare.tol_linf=0.5" + small), 0);
  EXPECT_EQ(cli("simulate --out " + out + "/bad --model.nope=1"), 2);
  EXPECT_EQ(cli("simulate --out " + out + "/bad --numerics.N=2"), 2);
  EXPECT_EQ(cli("exact --out " + out + "/bad --model.a=-1"), 2);
  EXPECT_EQ(cli("exact --out " + out + "/bad --model.a=0"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("simulate --out " + out + "/boom --model.kappa=0 --model.a=40 --numerics.t_end=5 --numerics.N=64"), 3);
  EXPECT_EQ(cli("preset does_not_exist"), 2);
  EXPECT_EQ(cli("presets"), 0);
  fs::remove_all(dir);
}

}  // namespace
