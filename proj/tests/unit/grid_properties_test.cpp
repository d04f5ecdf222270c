#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "tfw/grid.hpp"

namespace tfw {
namespace {

class GridProperty : public ::testing::TestWithParam<std::uint64_t> {
 protected:
  Grid const grid{16, 5.0};
};

TEST_P(GridProperty, LaplacianInvertsPoisson) {
  ScalarField rho = testing::band_limited(grid, GetParam(), 4);
  double const m = mean(rho);
  for (double& v : rho.values()) v -= m;
  ScalarField const back = laplacian(poisson_solve(rho));
  ScalarField expected = rho;
  expected *= -4.0 * std::numbers::pi;
  EXPECT_LE(l2_norm(back - expected), 1e-12 * l2_norm(expected));
}

TEST_P(GridProperty, LaplacianIntegratesToZero) {
  ScalarField const f = testing::white_noise(grid, GetParam());
  EXPECT_LE(std::abs(integrate(laplacian(f))), 1e-12 * l2_norm(f));
}

TEST_P(GridProperty, LaplacianIsSelfAdjoint) {
  ScalarField const f = testing::white_noise(grid, GetParam());
  ScalarField const g = testing::white_noise(grid, GetParam() + 1000);
  double const a = inner(f, laplacian(g));
  double const b = inner(g, laplacian(f));
  EXPECT_LE(std::abs(a - b), 1e-12 * std::max(std::abs(a), l2_norm(f) * l2_norm(laplacian(g))));
}

TEST_P(GridProperty, ResultsAreFinite) {
  ScalarField const f = testing::white_noise(grid, GetParam());
  EXPECT_TRUE(all_finite(laplacian(f)));
  auto const g = gradient(f);
  for (int d = 0; d < 3; ++d) EXPECT_TRUE(all_finite(g[d]));
}

INSTANTIATE_TEST_SUITE_P(Seeds, GridProperty, ::testing::Values(1u, 2u, 3u, 17u, 99u));

// Second-order central differences converge to the spectral derivatives.
TEST(GridConvergence, FiniteDifferencesAgreeAtSecondOrder) {
  double const L = 2.0;
  double const k = 2.0 * std::numbers::pi / L;
  auto smooth = [k](Vec3 const& p) { return std::exp(std::sin(k * p[0]) + 0.5 * std::cos(k * p[1])); };
  std::vector<double> grad_err;
  std::vector<double> lap_err;
  for (int n : {16, 32, 64}) {
    Grid const g(n, L);
    ScalarField const f = testing::sample(g, smooth);
    ScalarField const lap = laplacian(f);
    ScalarField const dx = gradient(f)[0];
    double const h = g.spacing();
    double eg = 0.0;
    double el = 0.0;
    for (int kk = 0; kk < n; ++kk) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          auto at = [&](int a, int b, int c) { return f[g.index((a + n) % n, (b + n) % n, (c + n) % n)]; };
          double const fd_x = (at(i + 1, j, kk) - at(i - 1, j, kk)) / (2 * h);
          double const fd_lap = (at(i + 1, j, kk) + at(i - 1, j, kk) + at(i, j + 1, kk) + at(i, j - 1, kk) +
                                 at(i, j, kk + 1) + at(i, j, kk - 1) - 6 * at(i, j, kk)) /
                                (h * h);
          eg = std::max(eg, std::abs(fd_x - dx[g.index(i, j, kk)]));
          el = std::max(el, std::abs(fd_lap - lap[g.index(i, j, kk)]));
        }
      }
    }
    grad_err.push_back(eg);
    lap_err.push_back(el);
  }
  for (std::size_t i = 1; i < grad_err.size(); ++i) {
    EXPECT_NEAR(grad_err[i - 1] / grad_err[i], 4.0, 0.4);
    EXPECT_NEAR(lap_err[i - 1] / lap_err[i], 4.0, 0.4);
  }
}

}  // namespace
}  // namespace tfw
