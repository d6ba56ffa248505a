#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sld/bessel.hpp"
#include "sld/kernel.hpp"

namespace {

// mpmath, 30 digits
constexpr double kI0at1 = 1.2660658777520083;
constexpr double kLambda0Mu1 = 2.9264539231100913;

TEST(Bessel, TrivialValues) {
  EXPECT_EQ(sld::bessel_i(0, 0.0), 1.0);
  for (int j = 1; j <= 10; ++j) EXPECT_EQ(sld::bessel_i(j, 0.0), 0.0);
}

TEST(Bessel, QuadratureOracleAtOne) {
  const double q = oracle::bessel_i(0, 1.0);
  EXPECT_NEAR(q, kI0at1, 1e-13);
  EXPECT_NEAR(sld::bessel_i(0, 1.0), q, 1e-12 * q);
}

TEST(Bessel, MatchesStdLibraryOverRange) {
  for (double mu : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0, 100.0}) {
    for (int j = 0; j <= 64; ++j) {
      const double ref = std::cyl_bessel_i(static_cast<double>(j), mu);
      if (ref < 1e-290) continue;
      EXPECT_NEAR(sld::bessel_i(j, mu), ref, 1e-12 * ref) << "j=" << j << " mu=" << mu;
    }
  }
}

TEST(Bessel, SimpsonOracleSmallOrders) {
  for (double mu : {0.25, 1.0, 4.0}) {
    for (int j = 0; j <= 6; ++j) {
      const double ref = oracle::bessel_i(j, mu);
      EXPECT_NEAR(sld::bessel_i(j, mu), ref, 1e-11 * ref + 1e-15) << j << " " << mu;
    }
  }
}

TEST(Bessel, ThreeTermRecurrence) {
  for (double mu = 0.1; mu <= 50.0; mu *= 1.7) {
    for (int j = 1; j <= 30; ++j) {
      const double lhs = sld::bessel_i(j - 1, mu) - sld::bessel_i(j + 1, mu);
      const double rhs = 2.0 * j / mu * sld::bessel_i(j, mu);
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(rhs) + 1e-300) << j << " " << mu;
    }
  }
}

TEST(Bessel, Errors) {
  EXPECT_THROW(sld::bessel_i(0, -1.0), std::invalid_argument);
  EXPECT_THROW(sld::bessel_i(-1, 1.0), std::invalid_argument);
  EXPECT_THROW(sld::bessel_i(0, 1000.0), std::overflow_error);
  // The scaled form stays finite far beyond.
  EXPECT_NEAR(sld::scaled_bessel_i(0, 1000.0), 1.0 / std::sqrt(2 * oracle::pi * 1000.0), 2e-4 / std::sqrt(1000.0));
}

TEST(Kernel, Values) {
  const sld::CircleKernelParams k{1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(sld::kernel_value(0.3, 0.3, k), 1.0);
  EXPECT_NEAR(sld::kernel_value(oracle::pi, 0.0, k), 0.1353352832366127, 1e-15);
  // Same value from the planar Gaussian between the circle points.
  const double dx = std::cos(oracle::pi) - 1.0;
  const double dy = std::sin(oracle::pi);
  EXPECT_NEAR(sld::kernel_value(oracle::pi, 0.0, k), std::exp(-(dx * dx + dy * dy) / 2.0), 1e-15);
  const sld::CircleKernelParams wide{2.0, 1e6, 1.0};
  EXPECT_NEAR(sld::kernel_value(1.0, -2.0, wide), 2.0, 1e-11);
}

TEST(Kernel, SymmetryAndPeriodicity) {
  const sld::CircleKernelParams k{1.5, 0.7, 1.2};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double s = u(rng);
    const double t = u(rng);
    EXPECT_NEAR(sld::kernel_value(s, t, k), sld::kernel_value(t, s, k), 1e-15);
    EXPECT_NEAR(sld::kernel_value(s + 2 * oracle::pi, t, k), sld::kernel_value(s, t, k), 1e-12);
    EXPECT_NEAR(sld::kernel_value(s + 0.4, t + 0.4, k), sld::kernel_value(s, t, k), 1e-12);
  }
}

TEST(Kernel, InvalidParameters) {
  EXPECT_THROW(sld::kernel_value(0, 0, {0.0, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(sld::kernel_value(0, 0, {1.0, -1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(sld::eigenvalue(0, {1.0, 1.0, 0.0}), std::invalid_argument);
}

TEST(Kernel, EigenvaluesAgainstQuadrature) {
  EXPECT_NEAR(sld::eigenvalue(0, {1.0, 1.0, 1.0}), kLambda0Mu1, 1e-13);
  for (double mu : {0.25, 1.0, 4.0}) {
    const sld::CircleKernelParams k{1.0, 1.0 / std::sqrt(mu), 1.0};
    for (int j = -20; j <= 20; ++j) {
      EXPECT_NEAR(sld::eigenvalue(j, k), oracle::eigenvalue(j, mu), 1e-10) << j << " " << mu;
    }
  }
}

TEST(Kernel, EigenvalueSmallMuLimit) {
  const sld::CircleKernelParams k{1.0, 1e5, 1.0};
  EXPECT_NEAR(sld::eigenvalue(0, k), 2 * oracle::pi, 1e-8);
  EXPECT_NEAR(sld::eigenvalue(3, k), 0.0, 1e-20);
}

TEST(Kernel, EigenvaluesEvenAndDecreasing) {
  for (double mu : {0.25, 1.0, 4.0, 400.0}) {
    const sld::CircleKernelParams k{1.0, 1.0 / std::sqrt(mu), 1.0};
    for (int j = 1; j <= 40; ++j) {
      EXPECT_EQ(sld::eigenvalue(j, k), sld::eigenvalue(-j, k));
      EXPECT_LT(sld::eigenvalue(j, k), sld::eigenvalue(j - 1, k));
      EXPECT_GT(sld::eigenvalue(j, k), 0.0);
    }
  }
}

TEST(Kernel, DiagonalTraceIdentity) {
  for (double mu : {0.25, 1.0, 4.0}) {
    const sld::CircleKernelParams k{1.0, 1.0 / std::sqrt(mu), 1.0};
    double prev = 1e300;
    const int J_needed = static_cast<int>(std::ceil(8 * mu)) + 20;
    for (int J = 0; J <= J_needed; ++J) {
      const double err = std::abs(sld::spectral_reconstruction(0.0, 0.0, J, k) - 1.0);
      if (err > 1e-15) {
        EXPECT_LT(err, prev) << "J=" << J << " mu=" << mu;
      }
      prev = err;
    }
    EXPECT_LT(prev, 1e-10);
  }
}

TEST(Kernel, SpectralReconstruction) {
  const sld::CircleKernelParams k{1.0, 1.0, 1.0};
  EXPECT_NEAR(sld::spectral_reconstruction(0.0, 0.0, 10, k), 1.0, 1e-10);
  EXPECT_NEAR(sld::spectral_reconstruction(oracle::pi, 0.0, 0, k), 0.46575960759364044, 1e-14);
  const sld::CircleKernelParams wide{1.0, 1e7, 1.0};
  EXPECT_NEAR(sld::spectral_reconstruction(0.5, 2.5, 4, wide), 1.0, 1e-12);
  for (double d : {0.1, 1.0, 2.0, 3.0}) {
    EXPECT_NEAR(sld::spectral_reconstruction(d, 0.0, 30, k), sld::kernel_value(d, 0.0, k), 1e-14);
  }
}

TEST(Kernel, MercerPositivity) {
  const sld::CircleKernelParams k{1.0, 0.5, 1.0};
  const int N = 64;
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(N);
    double norm2 = 0.0;
    for (auto& v : x) {
      v = g(rng);
      norm2 += v * v;
    }
    double q = 0.0;
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        q += x[a] * x[b] * sld::kernel_value(2 * oracle::pi * a / N, 2 * oracle::pi * b / N, k);
      }
    }
    EXPECT_GE(q / norm2, -1e-8);
  }
}

TEST(Kernel, DefaultTruncationAndAngles) {
  EXPECT_EQ(sld::default_truncation({1.0, 1.0, 1.0}), 28);
  EXPECT_EQ(sld::default_truncation({1.0, 0.5, 1.0}), 52);
  EXPECT_NEAR(sld::canonical_angle(oracle::pi), -oracle::pi, 1e-15);
  EXPECT_NEAR(sld::canonical_angle(7.0), 7.0 - 2 * oracle::pi, 1e-15);
  EXPECT_NEAR(sld::canonical_angle(-4.0), -4.0 + 2 * oracle::pi, 1e-15);
  const auto pairs = sld::eigenpairs(3, {1.0, 1.0, 1.0});
  ASSERT_EQ(pairs.size(), 7u);
  EXPECT_EQ(pairs.front().j, -3);
  EXPECT_EQ(pairs.front().lambda, pairs.back().lambda);
}

}  // namespace
