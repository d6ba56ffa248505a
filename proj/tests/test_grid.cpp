#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "sld/analysis.hpp"
#include "sld/csv.hpp"
#include "sld/exact.hpp"
#include "sld/grid.hpp"

namespace {

const sld::CircleKernelParams kUnit{1.0, 1.0, 1.0};

sld::GridParams params(double D = 0.0, sld::Scheme scheme = sld::Scheme::rk4, double kappa = 0.2) {
  return {kUnit, 1.0, kappa, D, sld::Backend::fast, scheme, false};
}

TEST(Grid, NonlocalConstant) {
  for (std::size_t N : {64u, 256u}) {
    const std::vector<double> ones(N, 1.0);
    for (auto backend : {sld::Backend::direct, sld::Backend::fast}) {
      const sld::NonlocalOperator op(kUnit, N, backend);
      for (double v : op(ones)) EXPECT_NEAR(v, sld::eigenvalue(0, kUnit), 1e-12);
    }
  }
}

TEST(Grid, NonlocalEigenfunction) {
  const std::size_t N = 128;
  const auto s = sld::periodic_grid(N);
  const sld::NonlocalOperator op(kUnit, N, sld::Backend::fast);
  for (int j : {1, 3, 7}) {
    std::vector<double> f(N);
    for (std::size_t k = 0; k < N; ++k) f[k] = std::cos(j * s[k]);
    const auto out = op(f);
    for (std::size_t k = 0; k < N; ++k) EXPECT_NEAR(out[k], sld::eigenvalue(j, kUnit) * f[k], 1e-12);
  }
}

TEST(Grid, NonlocalMatchesOracle) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    for (std::size_t N : {32u, 100u, 256u}) {
      const auto rho = oracle::random_profile(N, seed);
      const auto ref = oracle::nonlocal(rho, 1.0, 1.0);
      for (auto backend : {sld::Backend::direct, sld::Backend::fast}) {
        const auto got = sld::NonlocalOperator(kUnit, N, backend, true)(rho);
        for (std::size_t k = 0; k < N; ++k) EXPECT_NEAR(got[k], ref[k], 1e-12) << N;
      }
    }
  }
}

TEST(Grid, HomogeneousFollowsExact) {
  const auto m = sld::HomogeneousModel::from_kernel(1.0, 0.2, kUnit);
  sld::GridSolver solver(params(0.1), 64);
  const std::vector<double> times{1.0, 5.0, 20.0};
  const auto out = solver.run(sld::make_initial(sld::InitialKind::homogeneous, {}, 64), times, 0.01);
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (double v : out[i].rho) EXPECT_NEAR(v, sld::rho0(times[i], m), 1e-9);
  }
}

TEST(Grid, NoCouplingGivesExponentialGrowth) {
  sld::GridSolver solver(params(0.0, sld::Scheme::rk4, 0.0), 64);
  const auto st0 = sld::make_initial(sld::InitialKind::gaussian_bump, {}, 64);
  const std::vector<double> times{2.0};
  const auto out = solver.run(st0, times, 0.001);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(out[0].rho[k], st0.rho[k] * std::exp(2.0), 1e-11);
}

TEST(Grid, StabilityBoundEnforced) {
  sld::GridSolver solver(params(0.5, sld::Scheme::rk4), 256);
  const auto st = sld::make_initial(sld::InitialKind::homogeneous, {}, 256);
  const double lim = solver.max_stable_dt(st);
  EXPECT_NEAR(lim, 0.8 * solver.ds() * solver.ds() / 1.0, 1e-15);
  EXPECT_THROW((void)solver.step(st, 2.0 * lim), sld::ValidationError);
  EXPECT_NO_THROW((void)solver.step(st, lim));
  sld::GridSolver imex(params(0.5, sld::Scheme::imex), 256);
  EXPECT_GT(imex.max_stable_dt(st), 100.0 * lim);
}

TEST(Grid, CutoffInitialData) {
  const auto st = sld::make_initial(sld::InitialKind::cutoff, {}, 512);
  const auto s = st.nodes();
  for (std::size_t k = 0; k < 512; ++k) {
    if (std::abs(s[k]) < 2.0) {
      EXPECT_EQ(st.rho[k], 1.0);
    } else if (std::abs(s[k]) > 2.0) {
      EXPECT_EQ(st.rho[k], 0.0);
    }
  }
  // Node placement: mass is 4 up to one cell on each side.
  EXPECT_NEAR(sld::total_mass(st), 4.0, 2.0 * st.ds());
  // A grid with a node exactly at +-2 is not available for even N on [-pi, pi); use half_width on a node.
  sld::InitialParams p;
  p.half_width = -sld::periodic_grid(16)[4];
  const auto st16 = sld::make_initial(sld::InitialKind::cutoff, p, 16);
  EXPECT_EQ(st16.rho[4], 0.5);
  EXPECT_EQ(st16.rho[12], 0.5);
}

TEST(Grid, InitialValidation) {
  sld::InitialParams p;
  p.samples = {1.0, 2.0};
  EXPECT_THROW(sld::make_initial(sld::InitialKind::from_samples, p, 8), sld::ValidationError);
  p.samples.assign(8, 1.0);
  p.samples[3] = -1.0;
  EXPECT_THROW(sld::make_initial(sld::InitialKind::from_samples, p, 8), sld::ValidationError);
  EXPECT_THROW(sld::parse_initial_kind("square"), sld::ValidationError);
  EXPECT_THROW(sld::parse_scheme("leapfrog"), sld::ValidationError);
}

TEST(Grid, MassRateIdentity) {
  // d m/dt = a m - kappa ds sum rho I (diffusion conserves mass on the periodic grid).
  const auto p = params(0.1, sld::Scheme::rk4);
  sld::GridSolver solver(p, 128);
  const auto st = sld::make_initial(sld::InitialKind::gaussian_bump, {}, 128);
  const auto r = solver.rate(st.rho);
  const auto I = sld::NonlocalOperator(kUnit, 128, sld::Backend::direct)(st.rho);
  double dm = 0.0;
  double ref = 0.0;
  for (std::size_t k = 0; k < 128; ++k) {
    dm += r[k] * st.ds();
    ref += (p.a * st.rho[k] - p.kappa * st.rho[k] * I[k]) * st.ds();
  }
  EXPECT_NEAR(dm, ref, 1e-12);
}

TEST(Grid, ConvergesInN) {
  const std::vector<double> times{5.0};
  auto run = [&](std::size_t N) {
    sld::GridSolver solver(params(0.0), N);
    return solver.run(sld::make_initial(sld::InitialKind::gaussian_bump, {}, N), times, 0.01)[0];
  };
  const auto fine = run(1024);
  double prev = 1e9;
  for (std::size_t N : {32u, 64u, 128u}) {
    const auto c = run(N);
    double err = 0.0;
    const std::size_t stride = 1024 / N;
    for (std::size_t k = 0; k < N; ++k) err = std::max(err, std::abs(c.rho[k] - fine.rho[k * stride]));
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-10);
}

TEST(Grid, ImexMatchesRk4) {
  const std::vector<double> times{5.0};
  const auto st0 = sld::make_initial(sld::InitialKind::gaussian_bump, {}, 128);
  sld::GridSolver rk(params(0.1, sld::Scheme::rk4), 128);
  const auto a = rk.run(st0, times, 0.001)[0];
  double prev = 1e9;
  for (double dt : {0.02, 0.01, 0.005}) {
    sld::GridSolver im(params(0.1, sld::Scheme::imex), 128);
    const auto b = im.run(st0, times, dt)[0];
    const double err = sld::relative_linf(b.rho, a.rho);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Grid, EulerFirstOrder) {
  const std::vector<double> times{2.0};
  const auto st0 = sld::make_initial(sld::InitialKind::gaussian_bump, {}, 64);
  sld::GridSolver rk(params(0.0), 64);
  const auto ref = rk.run(st0, times, 0.001)[0];
  auto err = [&](double dt) {
    sld::GridSolver eu(params(0.0, sld::Scheme::euler), 64);
    return sld::relative_linf(eu.run(st0, times, dt)[0].rho, ref.rho);
  };
  const double order = sld::richardson_order(err(0.02), err(0.01), 2.0);
  EXPECT_NEAR(order, 1.0, 0.1);
}

TEST(Grid, RunHitsRequestedTimes) {
  sld::GridSolver solver(params(), 32);
  const std::vector<double> times{0.0, 0.33, 1.0};
  const auto out = solver.run(sld::make_initial(sld::InitialKind::homogeneous, {}, 32), times, 0.1);
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out[i].t, times[i]);
  const std::vector<double> bad{1.0, 0.5};
  EXPECT_THROW(solver.run(out[0], bad, 0.1), sld::ValidationError);
}

TEST(Grid, SnapshotCsv) {
  const auto st = sld::make_initial(sld::InitialKind::gaussian_bump, {}, 16);
  const auto path = std::filesystem::temp_directory_path() / "sld_grid_snapshot.csv";
  sld::write_snapshot_csv(path, st);
  const auto t = sld::csv::read(path);
  ASSERT_EQ(t.rows.size(), 16u);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(t.rows[k][1], st.rho[k]);
  std::filesystem::remove(path);
}

}  // namespace
