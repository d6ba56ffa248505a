// Eigenvalues of the circle kernel, the homogeneous closed form, and a short grid run
// compared with the first-order composite formula.

#include <cstdio>

#include "sld/analysis.hpp"
#include "sld/asymptotics.hpp"
#include "sld/exact.hpp"
#include "sld/grid.hpp"
#include "sld/kernel.hpp"

int main() {
  const sld::CircleKernelParams k{1.0, 1.0, 1.0};  // b0, gamma, R
  for (int j = 0; j <= 4; ++j) std::printf("lambda_%d = %.12f\n", j, sld::eigenvalue(j, k));

  const auto m = sld::HomogeneousModel::from_kernel(1.0, 0.2, k);
  std::printf("rho0(5) = %.10f, limit = %.10f, T_c(0.95) = %.6f\n", sld::rho0(5.0, m), sld::rho_lim(m),
              sld::t_quasi_steady(0.95, m));

  // rho_phi(s) = v0 + exp(-s^2/0.6) / T with T = 10
  const double T = 10.0;
  sld::InitialParams ip;
  ip.amplitude = 1.0 / T;
  const std::size_t N = 256;
  sld::GridSolver solver({k, 1.0, 0.2, 0.0, sld::Backend::fast, sld::Scheme::rk4}, N);
  const double times[] = {5.0};
  const auto snap = solver.run(sld::make_initial(sld::InitialKind::gaussian_bump, ip, N), times, 0.01).back();

  auto beta1 = sld::beta1_initial([](double s) { return std::exp(-s * s / 0.6); }, 10);
  const sld::AsymptoticExpansion e(T, 1.0, beta1, k, 1.0, 0.2, 0.0);
  const auto ref = sld::composite_profile(5.0, sld::periodic_grid(N), e);
  std::printf("t = 5: peaks %d, relative Linf to composite %.3e\n", sld::count_peaks(snap.rho),
              sld::relative_linf(snap.rho, ref));
}
