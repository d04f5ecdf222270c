#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "tfw/errors.hpp"
#include "tfw/ground_state.hpp"
#include "tfw/nuclei.hpp"

namespace tfw {
namespace {

SolverOptions tight(double tol = 1e-11) {
  SolverOptions o;
  o.tol = tol;
  return o;
}

// m = nuclear density of a small distorted lattice on a coarse grid.
ScalarField small_lattice_density(Grid const& g) {
  auto sites = cubic_lattice(2, g.length(), {1.0, 1.2, 0.9});
  sites[3][0] += 0.4;
  return assemble_density(make_config(sites, NucleusShape{1.0}, 0.0, g.length()), g);
}

TEST(Energy, ZeroStateIsZero) {
  Grid const g(8, 3.0);
  EXPECT_EQ(tfw_energy(ScalarField(g), ScalarField(g)), 0.0);
}

TEST(Energy, HomogeneousGas) {
  Grid const g(8, 3.0);
  double const u0 = 1.7;
  double const e = tfw_energy(ScalarField(g, u0), ScalarField(g, u0 * u0));
  EXPECT_NEAR(e / (std::pow(u0, 10.0 / 3.0) * 27.0), 1.0, 1e-14);
}

// Integration by parts is exact for fields without Nyquist content: v is
// band-limited to |frequency| <= 3 on n = 16, so v^2 stays below Nyquist.
TEST(Energy, FieldFormAgrees) {
  Grid const g(16, 5.0);
  ScalarField m = testing::band_limited(g, 6, 2);
  for (double& x : m.values()) x = 2.0 + 0.05 * x;
  ScalarField v = testing::band_limited(g, 5, 3);
  for (double& x : v.values()) x = 1.0 + 0.01 * x;
  v *= std::sqrt(integrate(m) / inner(v, v));
  double const a = tfw_energy(v, m);
  double const b = tfw_energy_field_form(v, m);
  EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
}

TEST(Energy, FieldFormAgreesOnGroundState) {
  Grid const g(24, 6.0);
  ScalarField const m = small_lattice_density(g);
  auto const s = solve_ground_state(m, tight());
  EXPECT_LE(std::abs(tfw_energy(s.u, m) - tfw_energy_field_form(s.u, m)), 1e-12 * std::abs(s.energy));
}

TEST(Energy, SignSymmetric) {
  Grid const g(16, 5.0);
  ScalarField const m = small_lattice_density(g);
  ScalarField v(g, 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= 1.0 + 0.05 * std::sin(static_cast<double>(i) * 0.37);
  v *= std::sqrt(integrate(m) / inner(v, v));
  ScalarField w = v;
  w *= -1.0;
  EXPECT_EQ(tfw_energy(v, m), tfw_energy(w, m));
}

TEST(Solve, UniformUnitDensity) {
  Grid const g(16, 4.0);
  ScalarField const m(g, 1.0);
  GroundState const s = solve_ground_state(m, tight());
  EXPECT_LE(testing::max_abs_diff(s.u, ScalarField(g, 1.0)), 1e-12);
  EXPECT_LE(sup_norm(s.phi), 1e-12);
  EXPECT_NEAR(s.theta, 5.0 / 3.0, 1e-12);
  auto const [ru, rp] = residuals(s, m);
  EXPECT_LE(ru, 1e-11);
  EXPECT_LE(rp, 1e-11);
}

TEST(Solve, UniformDensityEight) {
  Grid const g(8, 2.0);
  GroundState const s = solve_ground_state(ScalarField(g, 8.0), tight());
  EXPECT_LE(testing::max_abs_diff(s.u, ScalarField(g, std::sqrt(8.0))), 1e-12);
  EXPECT_NEAR(s.theta, 5.0 / 3.0 * 4.0, 1e-11);
}

TEST(Solve, ZeroDensityGivesZeroState) {
  Grid const g(8, 2.0);
  GroundState const s = solve_ground_state(ScalarField(g), tight());
  EXPECT_EQ(sup_norm(s.u), 0.0);
  EXPECT_EQ(s.theta, 0.0);
  auto const b = bounds_diagnostic(s);
  EXPECT_EQ(b.u_min, 0.0);
  EXPECT_EQ(b.u_max, 0.0);
  EXPECT_EQ(b.phi_min, 0.0);
  EXPECT_EQ(b.phi_max, 0.0);
  EXPECT_EQ(b.solovej_c, 0.0);
}

TEST(Solve, RejectsBadInput) {
  Grid const g(8, 2.0);
  ScalarField m(g, 1.0);
  m[5] = -0.1;
  EXPECT_THROW(solve_ground_state(m), InvalidArgument);
  m[5] = std::nan("");
  EXPECT_THROW(solve_ground_state(m), NonFiniteField);
  SolverOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(solve_ground_state(ScalarField(g, 1.0), bad), InvalidArgument);
}

TEST(Solve, LatticeStateContract) {
  Grid const g(24, 6.0);
  ScalarField const m = small_lattice_density(g);
  GroundState const s = solve_ground_state(m, tight(1e-10));
  EXPECT_LE(s.residual_u, 1e-10);
  EXPECT_LE(s.residual_phi, 1e-10);
  auto const [ru, rp] = residuals(s, m);
  EXPECT_LE(ru, 1e-10);
  EXPECT_LE(rp, 1e-10);
  EXPECT_NEAR(inner(s.u, s.u) / integrate(m), 1.0, 1e-10);
  EXPECT_GT(min_value(s.u), 0.0);
  EXPECT_NEAR(mean(s.phi), 0.0, 1e-12);
  EXPECT_NEAR(s.theta, extract_theta(s.u, s.phi), 1e-9);
  EXPECT_NEAR(s.energy, tfw_energy(s.u, m), 1e-12 * std::abs(s.energy));
  auto const b = bounds_diagnostic(s);
  EXPECT_GT(b.u_min, 0.0);
  EXPECT_GE(b.solovej_c, 0.0);
}

TEST(Solve, EnergyDescendsAlongIterates) {
  Grid const g(24, 6.0);
  SolverOptions o = tight(1e-10);
  o.init = Initialization::randomized;
  o.seed = 4;
  GroundState const s = solve_ground_state(small_lattice_density(g), o);
  ASSERT_GE(s.energy_history.size(), 2u);
  for (std::size_t i = 1; i < s.energy_history.size(); ++i) {
    // Steps that only reduce the residual may raise the energy by rounding noise.
    double const slack = 1e-13 * std::max(1.0, std::abs(s.energy_history[i - 1]));
    EXPECT_LE(s.energy_history[i], s.energy_history[i - 1] + slack) << "iterate " << i;
  }
  EXPECT_LT(s.energy_history.back(), s.energy_history.front());
}

TEST(Solve, RandomizedIsDeterministicPerSeed) {
  Grid const g(16, 6.0);
  ScalarField const m = small_lattice_density(g);
  SolverOptions o = tight(1e-10);
  o.init = Initialization::randomized;
  o.seed = 42;
  auto const a = solve_ground_state(m, o);
  auto const b = solve_ground_state(m, o);
  EXPECT_EQ(testing::max_abs_diff(a.u, b.u), 0.0);
  EXPECT_EQ(a.theta, b.theta);
}

TEST(Solve, UniquenessAcrossInitialisations) {
  Grid const g(64, 8.0);
  ScalarField const m = assemble_density(testing::centred_lattice(2, 8.0), g);
  auto const a = solve_ground_state(m, tight(1e-10));
  SolverOptions o = tight(1e-10);
  o.init = Initialization::randomized;
  o.seed = 7;
  auto const b = solve_ground_state(m, o);
  EXPECT_LE(testing::max_abs_diff(a.u, b.u), 1e-6);
}

TEST(Solve, TranslationEquivariance) {
  Grid const g(24, 6.0);
  auto sites = cubic_lattice(2, 6.0, {1.0, 1.2, 0.9});
  sites[3][0] += 0.4;
  auto const m = assemble_density(make_config(sites, NucleusShape{1.0}, 0.0, 6.0), g);
  for (auto& y : sites) y = y + Vec3{2 * g.spacing(), 0.0, -g.spacing()};
  auto const m2 = assemble_density(make_config(sites, NucleusShape{1.0}, 0.0, 6.0), g);
  auto const a = solve_ground_state(m, tight());
  auto const b = solve_ground_state(m2, tight());
  EXPECT_LE(testing::max_abs_diff(shift_field(a.u, {2, 0, -1}), b.u), 1e-8);
  EXPECT_LE(testing::max_abs_diff(shift_field(a.phi, {2, 0, -1}), b.phi), 1e-8);
}

TEST(Solve, MaxIterCarriesBestIterate) {
  Grid const g(16, 6.0);
  SolverOptions o = tight();
  o.max_iter = 2;
  try {
    solve_ground_state(small_lattice_density(g), o);
    FAIL() << "expected MaxIterExceeded";
  } catch (MaxIterExceeded const& e) {
    EXPECT_EQ(e.best().iterations, 2);
    EXPECT_GT(e.best().residual_u, 1e-11);
    EXPECT_TRUE(all_finite(e.best().u));
  }
}

TEST(Solve, WarmStartFromSuppliedField) {
  Grid const g(16, 6.0);
  ScalarField const m = small_lattice_density(g);
  auto const a = solve_ground_state(m, tight());
  SolverOptions o = tight();
  o.init = Initialization::supplied;
  o.initial = a.u;
  auto const b = solve_ground_state(m, o);
  EXPECT_LE(b.iterations, 2);
  EXPECT_LE(testing::max_abs_diff(a.u, b.u), 1e-9);
}

TEST(Residuals, ExactHomogeneousIsZero) {
  Grid const g(8, 2.0);
  GroundState s{ScalarField(g, 1.0), ScalarField(g), 5.0 / 3.0, 0, 0, 0, 0, {}};
  auto const [ru, rp] = residuals(s, ScalarField(g, 1.0));
  EXPECT_LE(ru, 1e-15);
  EXPECT_LE(rp, 1e-15);
}

TEST(Residuals, GrowLinearlyUnderPerturbation) {
  Grid const g(16, 6.0);
  ScalarField const m = small_lattice_density(g);
  auto const s = solve_ground_state(m, tight(1e-12));
  ScalarField const noise = testing::white_noise(g, 9);
  std::vector<double> r;
  for (double eps : {1e-4, 2e-4, 4e-4}) {
    GroundState p = s;
    for (std::size_t i = 0; i < p.u.size(); ++i) p.u[i] += eps * noise[i];
    r.push_back(residuals(p, m).first);
  }
  EXPECT_NEAR(r[1] / r[0], 2.0, 0.01);
  EXPECT_NEAR(r[2] / r[1], 2.0, 0.01);
}

TEST(Residuals, GaugeShiftLeavesResidualUnchanged) {
  Grid const g(16, 6.0);
  ScalarField const m = small_lattice_density(g);
  auto const s = solve_ground_state(m, tight());
  GroundState shifted = s;
  double const c = 0.75;
  for (double& v : shifted.phi.values()) v += c;
  shifted.theta -= c;
  EXPECT_NEAR(residuals(shifted, m).first, residuals(s, m).first, 1e-13);
}

TEST(Bounds, HomogeneousUnitDensity) {
  Grid const g(8, 2.0);
  auto const s = solve_ground_state(ScalarField(g, 1.0), tight());
  auto const b = bounds_diagnostic(s);
  EXPECT_NEAR(b.u_min, 1.0, 1e-12);
  EXPECT_NEAR(b.u_max, 1.0, 1e-12);
  EXPECT_EQ(b.solovej_c, 0.0);
}

}  // namespace
}  // namespace tfw
