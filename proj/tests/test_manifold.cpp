#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "sld/analysis.hpp"
#include "sld/csv.hpp"
#include "sld/grid.hpp"
#include "sld/manifold.hpp"

namespace {

std::vector<double> bump_profile(std::size_t N, double T = 10.0) {
  const auto s = sld::periodic_grid(N);
  std::vector<double> rho(N);
  for (std::size_t k = 0; k < N; ++k) rho[k] = sld::v0 + std::exp(-s[k] * s[k] / 0.6) / T;
  return rho;
}

double radius(const sld::ManifoldState& st, std::size_t i) { return std::hypot(st.point(i)[0], st.point(i)[1]); }

TEST(Manifold, CircleConstruction) {
  const auto st = sld::circle_manifold(2.0, bump_profile(16));
  ASSERT_EQ(st.size(), 16u);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_NEAR(radius(st, i), 2.0, 1e-15);
    EXPECT_NEAR(std::atan2(st.point(i)[1], st.point(i)[0]), sld::canonical_angle(st.s[i]), 1e-14);
  }
  EXPECT_NO_THROW(st.validate());
}

TEST(Manifold, ValidationRejectsBadStates) {
  auto st = sld::circle_manifold(1.0, bump_profile(16));
  st.rho[3] = -0.1;
  EXPECT_THROW(st.validate(), sld::ValidationError);
  st = sld::circle_manifold(1.0, bump_profile(16));
  st.point(5)[0] += 5.0;  // tear the curve
  EXPECT_THROW(st.validate(), sld::ValidationError);
  const std::vector<double> zeros(16, 0.0);
  EXPECT_THROW(sld::initial_correspondence(sld::circle_manifold(1.0, zeros)), sld::ValidationError);
}

TEST(Manifold, FrozenWithoutConvection) {
  const auto spec = sld::make_builtin_spec({});
  const auto st0 = sld::circle_manifold(1.0, bump_profile(64));
  const std::vector<double> times{5.0};
  const auto out = sld::integrate(st0, spec, times, 0.05).states.back();
  EXPECT_EQ(out.X, st0.X);
}

TEST(Manifold, ReducesToCircleEquation) {
  // Gaussian influence between circle points equals the circular kernel with mu = R^2/gamma^2.
  const std::size_t N = 128;
  const double R = 1.3;
  const double gamma = 0.9;
  const auto rho = bump_profile(N);
  const auto spec = sld::make_builtin_spec({1.0, 1.0, gamma, 0.0, 0.2});
  const std::vector<double> times{20.0};
  const auto m = sld::integrate(sld::circle_manifold(R, rho), spec, times, 0.01).states.back();

  sld::GridParams gp{{1.0, gamma, R}, 1.0, 0.2, 0.0, sld::Backend::direct, sld::Scheme::rk4, false};
  sld::GridSolver solver(gp, N);
  sld::InitialParams ip;
  ip.samples = rho;
  const auto g = solver.run(sld::make_initial(sld::InitialKind::from_samples, ip, N), times, 0.01)[0];
  for (std::size_t k = 0; k < N; ++k) EXPECT_NEAR(m.rho[k], g.rho[k], 1e-8);
}

TEST(Manifold, CompressionLaw) {
  const double k0 = 0.03;
  const auto spec = sld::make_builtin_spec({1.0, 1.0, 1.0, k0, 0.2});
  const std::vector<double> times{10.0, 50.0};
  const auto traj = sld::integrate(sld::circle_manifold(1.0, bump_profile(64)), spec, times, 0.05);
  for (const auto& st : traj.states) {
    for (std::size_t i = 0; i < st.size(); ++i) EXPECT_NEAR(radius(st, i), std::exp(-k0 * st.t), 1e-12);
  }
}

TEST(Manifold, NoInfluenceGivesExponential) {
  sld::ConvectionSpec spec;
  spec.a = sld::builtin::constant_rate(0.7);
  spec.b = [](sld::PointSpan, sld::PointSpan) { return 0.0; };
  const auto st0 = sld::circle_manifold(1.0, bump_profile(32));
  const std::vector<double> times{3.0};
  const auto out = sld::integrate(st0, spec, times, 0.01).states.back();
  for (std::size_t i = 0; i < 32; ++i) EXPECT_NEAR(out.rho[i], st0.rho[i] * std::exp(2.1), 1e-10 * out.rho[i]);
}

TEST(Manifold, MassRateIdentity) {
  // d m/dt = int a rho - kappa int int b rho rho, evaluated with plain loops.
  const auto spec = sld::make_builtin_spec({1.0, 1.0, 0.8, 0.02, 0.2});
  auto st = sld::circle_manifold(1.2, bump_profile(48));
  st.t = 1.0;
  const auto r = sld::ee_rhs(st, spec);
  const auto w = st.weights();
  double lhs = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    lhs += w[i] * r.rho_dot[i];
    ref += w[i] * 1.0 * st.rho[i];
    for (std::size_t j = 0; j < st.size(); ++j) {
      const double dx = st.point(i)[0] - st.point(j)[0];
      const double dy = st.point(i)[1] - st.point(j)[1];
      ref -= 0.2 * w[i] * w[j] * std::exp(-(dx * dx + dy * dy) / (2 * 0.64)) * st.rho[i] * st.rho[j];
    }
  }
  EXPECT_NEAR(lhs, ref, 1e-12);
  for (std::size_t i = 0; i < st.size(); ++i) {
    EXPECT_NEAR(r.X_dot[2 * i], -0.02 * st.point(i)[0], 1e-15);
  }
}

TEST(Manifold, AsymmetricInfluencePath) {
  auto spec = sld::make_builtin_spec({});
  const auto st = sld::circle_manifold(1.0, bump_profile(24));
  const auto sym = sld::ee_rhs(st, spec);
  spec.b_symmetric = false;
  const auto full = sld::ee_rhs(st, spec);
  for (std::size_t i = 0; i < 24; ++i) EXPECT_NEAR(sym.rho_dot[i], full.rho_dot[i], 1e-14);
}

TEST(Manifold, PairwiseVelocity) {
  // W(x, y) = y - x pulls every point toward the weighted centroid.
  auto spec = sld::make_builtin_spec({});
  spec.W = [](sld::PointSpan x, sld::PointSpan y, double, std::span<double> out) {
    out[0] = y[0] - x[0];
    out[1] = y[1] - x[1];
  };
  const std::vector<double> flat(32, 1.0);
  const auto st = sld::circle_manifold(1.0, flat);
  const auto r = sld::ee_rhs(st, spec);
  const double m = 2 * oracle::pi;
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_NEAR(r.X_dot[2 * i], -0.2 * m * st.point(i)[0], 1e-12);
  }
}

TEST(Manifold, BlowUpAborts) {
  sld::ConvectionSpec spec;
  spec.a = sld::builtin::constant_rate(40.0);
  spec.b = [](sld::PointSpan, sld::PointSpan) { return 0.0; };
  const std::vector<double> times{1.0};
  EXPECT_THROW(sld::integrate(sld::circle_manifold(1.0, bump_profile(16)), spec, times, 0.01), sld::SolverAbort);
}

TEST(Manifold, InitialCorrespondence) {
  const auto st = sld::circle_manifold(1.0, bump_profile(256));
  const auto m = sld::initial_correspondence(st);
  // sqrt(2 pi) + (1/10) sqrt(0.6 pi) erf(pi / sqrt(0.6))
  const double ref = std::sqrt(2 * oracle::pi) + 0.1 * std::sqrt(0.6 * oracle::pi) * std::erf(oracle::pi / std::sqrt(0.6));
  EXPECT_NEAR(m.mass, ref, 1e-8);
  EXPECT_GT(m.centroid[0], 0.0);
  EXPECT_NEAR(m.centroid[1], 0.0, 1e-14);
}

TEST(Manifold, OpenCurveWeights) {
  sld::ManifoldState st;
  st.periodic = false;
  st.s = {0.0, 0.5, 1.0};
  st.X = {0.0, 0.0, 0.5, 0.0, 1.0, 0.0};
  st.rho = {1.0, 1.0, 1.0};
  const auto w = st.weights();
  EXPECT_EQ(w, (std::vector<double>{0.25, 0.5, 0.25}));
  EXPECT_NEAR(sld::initial_correspondence(st).centroid[0], 0.5, 1e-15);
}

TEST(Manifold, CsvLayout) {
  const std::vector<double> times{0.0, 0.1};
  const auto traj = sld::integrate(sld::circle_manifold(1.0, bump_profile(8)), sld::make_builtin_spec({}), times, 0.05);
  const auto path = std::filesystem::temp_directory_path() / "sld_manifold.csv";
  sld::write_manifold_csv(path, traj);
  const auto t = sld::csv::read(path);
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "s", "x1", "x2", "rho"}));
  EXPECT_EQ(t.rows.size(), 16u);
  std::filesystem::remove(path);
}

}  // namespace
