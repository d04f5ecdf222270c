#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "test_support.hpp"
#include "tfw/errors.hpp"
#include "tfw/linear_response.hpp"
#include "tfw/nuclei.hpp"

namespace tfw {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(HomogeneousReference, Examples) {
  auto const a = homogeneous_reference(1.0);
  EXPECT_EQ(a.u0, 1.0);
  EXPECT_EQ(a.phi0, 0.0);
  EXPECT_NEAR(a.theta0, 5.0 / 3.0, 1e-15);
  auto const z = homogeneous_reference(0.0);
  EXPECT_EQ(z.u0, 0.0);
  EXPECT_EQ(z.theta0, 0.0);
  auto const e = homogeneous_reference(8.0);
  EXPECT_NEAR(e.u0, 2.0 * std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(e.theta0, 20.0 / 3.0, 1e-14);
  EXPECT_THROW(homogeneous_reference(-1.0), InvalidArgument);
}

TEST(ScreeningConstants, UnitDensityIsOscillatory) {
  auto const s = screening_constants(1.0, 1.0);
  EXPECT_LT((20.0 / 9.0) * (20.0 / 9.0) - 32.0 * kPi, 0.0);
  EXPECT_TRUE(s.oscillatory);
  EXPECT_LE(std::abs(s.dispersion(s.t_plus)), 1e-12 * s.c);
  EXPECT_LE(std::abs(s.dispersion(s.t_minus)), 1e-12 * s.c);
  EXPECT_GT(s.kappa_plus.real(), 0.0);
  EXPECT_GT(s.kappa_minus.real(), 0.0);
  EXPECT_EQ(s.beta.real(), 0.0);
  EXPECT_GT(s.beta.imag(), 0.0);
  EXPECT_NEAR(s.alpha, 1.74991, 1e-5);
  EXPECT_NEAR(s.oscillation_wavenumber, 1.396808, 1e-6);
  EXPECT_EQ(s.decay_rate, s.alpha);
  // kappa^2 = -t
  EXPECT_LE(std::abs(s.kappa_plus * s.kappa_plus + s.t_plus), 1e-12 * std::abs(s.t_plus));
}

TEST(ScreeningConstants, DenseGasIsMonotone) {
  double const m0 = 2e4;
  auto const s = screening_constants(m0, 1.0);
  EXPECT_FALSE(s.oscillatory);
  EXPECT_EQ(s.beta.imag(), 0.0);
  EXPECT_GT(s.beta.real(), 0.0);
  double const k1 = s.kappa_plus.real();
  double const k2 = s.kappa_minus.real();
  EXPECT_NEAR(s.alpha - s.beta.real(), std::min(k1, k2), 1e-12 * s.alpha);
  EXPECT_NEAR(s.decay_rate, std::min(k1, k2), 1e-12 * s.alpha);
  EXPECT_LE(std::abs(s.dispersion(s.t_plus)), 1e-12 * s.c);
}

TEST(ScreeningConstants, AlphaDecreasesWithCw) {
  double previous = 1e300;
  for (double cw : {0.25, 0.5, 1.0, 2.0, 4.0, 16.0, 64.0}) {
    double const alpha = screening_constants(1.0, cw).alpha;
    EXPECT_LT(alpha, previous) << "C_W = " << cw;
    previous = alpha;
  }
}

TEST(ScreeningConstants, RejectsNonPositive) {
  EXPECT_THROW(screening_constants(0.0), InvalidArgument);
  EXPECT_THROW(screening_constants(1.0, 0.0), InvalidArgument);
}

class HomogeneousResponse : public ::testing::Test {
 protected:
  Grid const grid{16, 8.0};
  GroundState const state = solve_ground_state(ScalarField(grid, 1.0));
};

// (|k|^2 + 20/9) ud - u0 (pd + td) = 0,  |k|^2 pd = 4 pi (md - 2 u0 ud)  per mode.
TEST_F(HomogeneousResponse, SingleFourierModeMatchesSymbol) {
  for (auto const& f : {std::array<int, 3>{1, 2, 0}, {3, 0, 1}, {0, 0, 5}}) {
    double const kx = grid.wavenumber(f[0]);
    double const ky = grid.wavenumber(f[1]);
    double const kz = grid.wavenumber(f[2]);
    double const k2 = kx * kx + ky * ky + kz * kz;
    double const eps = 0.01;
    auto const md = testing::sample(grid, [&](Vec3 const& p) { return eps * std::cos(kx * p[0] + ky * p[1] + kz * p[2]); });
    LinearOptions o;
    o.tol = 1e-12;
    auto const lin = solve_linearised(state, md, o);
    double const ud = 4.0 * kPi / (k2 * (k2 + 20.0 / 9.0) + 8.0 * kPi);
    double const pd = (k2 + 20.0 / 9.0) * ud;
    ScalarField eu = md;
    eu *= ud;
    ScalarField ep = md;
    ep *= pd;
    EXPECT_LE(testing::max_abs_diff(lin.u_dot, eu), 1e-10 * eps) << f[0] << f[1] << f[2];
    EXPECT_LE(testing::max_abs_diff(lin.phi_dot, ep), 1e-10 * eps);
    EXPECT_NEAR(lin.theta_dot, 0.0, 1e-12);
  }
}

TEST_F(HomogeneousResponse, ZeroSourceGivesZero) {
  auto const lin = solve_linearised(state, ScalarField(grid));
  EXPECT_EQ(sup_norm(lin.u_dot), 0.0);
  EXPECT_EQ(sup_norm(lin.phi_dot), 0.0);
  EXPECT_EQ(lin.theta_dot, 0.0);
}

TEST_F(HomogeneousResponse, ChargedSourceRejected) {
  EXPECT_THROW(solve_linearised(state, ScalarField(grid, 0.1)), NonNeutralSource);
}

class LatticeResponse : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    grid_ = new Grid(32, 8.0);
    auto sites = cubic_lattice(2, 8.0, {1.0, 1.0, 1.0});
    sites[1][1] += 0.4;
    sites[2][2] -= 0.3;
    sites[5][0] += 0.25;
    config_ = new NuclearConfig(make_config(sites, NucleusShape{1.0}, 0.0, 8.0));
    m_ = new ScalarField(assemble_density(*config_, *grid_));
    SolverOptions o;
    o.tol = 1e-12;
    state_ = new GroundState(solve_ground_state(*m_, o));
  }
  static void TearDownTestSuite() {
    delete state_;
    delete m_;
    delete config_;
    delete grid_;
  }
  static Grid* grid_;
  static NuclearConfig* config_;
  static ScalarField* m_;
  static GroundState* state_;
};
Grid* LatticeResponse::grid_ = nullptr;
NuclearConfig* LatticeResponse::config_ = nullptr;
ScalarField* LatticeResponse::m_ = nullptr;
GroundState* LatticeResponse::state_ = nullptr;

TEST_F(LatticeResponse, Linearity) {
  auto const md = density_derivative(*config_, *grid_, 0, {1.0, 0.5, 0.0});
  LinearOptions o;
  o.tol = 1e-12;
  auto const a = solve_linearised(*state_, md, o);
  ScalarField md2 = md;
  md2 *= 2.0;
  auto const b = solve_linearised(*state_, md2, o);
  ScalarField a2 = a.u_dot;
  a2 *= 2.0;
  EXPECT_LE(testing::max_abs_diff(a2, b.u_dot), 1e-10 * sup_norm(b.u_dot));
  EXPECT_NEAR(2.0 * a.theta_dot, b.theta_dot, 1e-10 * std::max(1.0, std::abs(b.theta_dot)));
  EXPECT_LE(a.residual, 1e-11);
}

TEST_F(LatticeResponse, Superposition) {
  auto const m1 = density_derivative(*config_, *grid_, 0, {1.0, 0.0, 0.0});
  auto const m2 = density_derivative(*config_, *grid_, 3, {0.0, 0.0, 1.0});
  LinearOptions o;
  o.tol = 1e-12;
  auto const a = solve_linearised(*state_, m1, o);
  auto const b = solve_linearised(*state_, m2, o);
  auto const c = solve_linearised(*state_, m1 + m2, o);
  EXPECT_LE(testing::max_abs_diff(a.u_dot + b.u_dot, c.u_dot), 1e-10 * sup_norm(c.u_dot));
  EXPECT_LE(testing::max_abs_diff(a.phi_dot + b.phi_dot, c.phi_dot), 1e-10 * sup_norm(c.phi_dot));
}

TEST_F(LatticeResponse, ChargeResponse) {
  auto const md = density_derivative(*config_, *grid_, 2, {0.2, 1.0, -0.4});
  auto const lin = solve_linearised(*state_, md);
  EXPECT_NEAR(2.0 * inner(state_->u, lin.u_dot), integrate(md), 1e-8);
}

TEST_F(LatticeResponse, SchrodingerPartIsNonNegative) {
  auto const md = density_derivative(*config_, *grid_, 1, {1.0, 1.0, 0.0});
  auto const lin = solve_linearised(*state_, md);
  ScalarField l1 = laplacian(lin.u_dot);
  l1 *= -1.0;
  for (std::size_t i = 0; i < l1.size(); ++i) {
    double const u = state_->u[i];
    l1[i] += ((35.0 / 9.0) * std::pow(u, 4.0 / 3.0) - state_->phi[i] - state_->theta) * lin.u_dot[i];
  }
  EXPECT_GE(inner(lin.u_dot, l1), -1e-8 * inner(lin.u_dot, lin.u_dot));
}

TEST_F(LatticeResponse, FiniteDifferenceRatiosAreFirstOrder) {
  Vec3 const v{1.0, 0.5, 0.0};
  auto const md = density_derivative(*config_, *grid_, 0, v);
  auto const lin = solve_linearised(*state_, md);
  SolverOptions warm;
  warm.tol = 1e-12;
  warm.init = Initialization::supplied;
  warm.initial = state_->u;
  auto const rows = fd_consistency(
      [&](double h) { return solve_ground_state(assemble_density(perturb(*config_, 0, v, h, 8.0), *grid_), warm).u; },
      *state_, lin, {0.2, 0.1, 0.05, 0.025});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].ratio, 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].ratio, 0.35) << "h = " << rows[i].step;
    EXPECT_LE(rows[i].ratio, 0.65) << "h = " << rows[i].step;
  }
}

TEST_F(LatticeResponse, FdConsistencyRejectsNonPositiveSteps) {
  LinearisedSolution const lin{ScalarField(*grid_), ScalarField(*grid_), ScalarField(*grid_), 0, 0, 0};
  EXPECT_THROW(fd_consistency([&](double) { return state_->u; }, *state_, lin, {0.1, 0.0}), InvalidArgument);
}

// A lattice whose sites sit on grid points is symmetric under x -> 2 Y_x - x
// through a nucleus; moving that nucleus along x gives an odd response.
TEST(LinearisedSymmetry, AxisDisplacementIsAntisymmetric) {
  Grid const g(32, 8.0);
  auto const config = make_config(cubic_lattice(2, 8.0, {2.0, 2.0, 2.0}), NucleusShape{1.0}, 0.0, 8.0);
  auto const m = assemble_density(config, g);
  SolverOptions o;
  o.tol = 1e-12;
  auto const state = solve_ground_state(m, o);
  auto const lin = solve_linearised(state, density_derivative(config, g, 0, {1.0, 0.0, 0.0}));
  int const n = g.n();
  int const i0 = 8;  // x = 2.0
  double err = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        int const ri = ((2 * i0 - i) % n + n) % n;
        err = std::max(err, std::abs(lin.u_dot[g.index(i, j, k)] + lin.u_dot[g.index(ri, j, k)]));
      }
    }
  }
  EXPECT_GT(sup_norm(lin.u_dot), 1e-3);
  EXPECT_LE(err, 1e-9 * sup_norm(lin.u_dot));
}

}  // namespace
}  // namespace tfw
