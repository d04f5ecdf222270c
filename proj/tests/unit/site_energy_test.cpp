#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "tfw/errors.hpp"
#include "tfw/site_energy.hpp"

namespace tfw {
namespace {

SolverOptions tight() {
  SolverOptions o;
  o.tol = 1e-12;
  return o;
}

struct Solved {
  Grid grid;
  NuclearConfig config;
  ScalarField m;
  GroundState state;
};

Solved solve(Grid const& grid, NuclearConfig config) {
  ScalarField m = assemble_density(config, grid);
  GroundState s = solve_ground_state(m, tight());
  return {grid, std::move(config), std::move(m), std::move(s)};
}

NuclearConfig dimer(double length, double separation, Vec3 const& mid) {
  return make_config({mid - Vec3{0.5 * separation, 0, 0}, mid + Vec3{0.5 * separation, 0, 0}}, NucleusShape{1.0}, 0.0,
                     length);
}

// Two-nucleus dimer plus a third nucleus off axis, shared by several tests.
Solved const& asymmetric() {
  static Solved const s = solve(Grid(32, 8.0), make_config({{2.0, 2.5, 3.0}, {5.2, 3.0, 4.1}, {3.7, 6.0, 5.5}},
                                                           NucleusShape{1.0}, 0.0, 8.0));
  return s;
}

TEST(Partition, SingleNucleusIsOne) {
  Grid const g(16, 8.0);
  auto const p = build_partition(make_config({{1.0, 2.0, 3.0}}, NucleusShape{1.0}, 0.0, 8.0), g);
  ASSERT_EQ(p.size(), 1u);
  for (double v : p.weights[0].values()) EXPECT_EQ(v, 1.0);
}

TEST(Partition, SumsToOneAndBounded) {
  Grid const g(24, 8.0);
  auto const p = build_partition(asymmetric().config, g, 0.7);
  ScalarField total(g);
  for (auto const& w : p.weights) {
    total += w;
    EXPECT_GE(min_value(w), 0.0);
    EXPECT_LE(max_value(w), 1.0);
  }
  for (double v : total.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Partition, MirrorDimerWeightsAreReflections) {
  Grid const g(32, 8.0);
  auto const p = build_partition(dimer(8.0, 2.0, {4.0, 4.0, 4.0}), g);
  int const n = g.n();
  double err = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        int const ri = (2 * 16 - i + n) % n;  // reflection through x = 4
        err = std::max(err, std::abs(p.weights[0][g.index(i, j, k)] - p.weights[1][g.index(ri, j, k)]));
      }
    }
  }
  EXPECT_LE(err, 1e-13);
}

TEST(Partition, EmptyConfigurationRejected) {
  Grid const g(16, 8.0);
  NuclearConfig const empty = make_config({}, NucleusShape{1.0}, 1.0, 8.0);
  EXPECT_THROW(build_partition(empty, g), EmptyConfiguration);
  EXPECT_THROW(build_partition(make_config({{1, 1, 1}}, NucleusShape{1.0}, 0.0, 8.0), g, 0.0), InvalidArgument);
}

TEST(Partition, DerivativeMatchesFiniteDifference) {
  Grid const g(24, 8.0);
  auto const& config = asymmetric().config;
  Vec3 const v{0.6, -0.3, 0.8};
  auto const analytic = partition_derivative(build_partition(config, g), 1, v);
  double const h = 1e-5;
  auto const plus = build_partition(perturb(config, 1, v, h, 8.0), g);
  auto const minus = build_partition(perturb(config, 1, v, -h, 8.0), g);
  for (std::size_t j = 0; j < analytic.size(); ++j) {
    ScalarField fd = plus.weights[j] - minus.weights[j];
    fd *= 1.0 / (2.0 * h);
    EXPECT_LE(testing::max_abs_diff(fd, analytic[j]), 1e-7 * std::max(1.0, sup_norm(analytic[j]))) << "j = " << j;
  }
}

TEST(EnergyDensity, Homogeneous) {
  Grid const g(16, 6.0);
  double const m0 = 2.0;
  ScalarField const m(g, m0);
  auto const s = solve_ground_state(m);
  for (auto flavor : {EnergyFlavor::e1, EnergyFlavor::e2}) {
    auto const e = energy_density(s, m, flavor);
    for (double v : e.values()) EXPECT_NEAR(v, std::pow(m0, 5.0 / 3.0), 1e-12);
  }
}

TEST(EnergyDensity, ZeroDensityIsZero) {
  Grid const g(16, 6.0);
  ScalarField const m(g);
  auto const s = solve_ground_state(m);
  EXPECT_EQ(sup_norm(energy_density(s, m, EnergyFlavor::e1)), 0.0);
  EXPECT_EQ(sup_norm(energy_density(s, m, EnergyFlavor::e2)), 0.0);
}

TEST(EnergyDensity, FlavoursShareIntegralNotValues) {
  auto const& s = asymmetric();
  auto const e1 = energy_density(s.state, s.m, EnergyFlavor::e1);
  auto const e2 = energy_density(s.state, s.m, EnergyFlavor::e2);
  double const i1 = integrate(e1);
  EXPECT_NEAR(i1, integrate(e2), 1e-9 * std::abs(i1));
  EXPECT_NEAR(i1, tfw_energy(s.state.u, s.m), 1e-9 * std::abs(i1));
  EXPECT_GT(testing::max_abs_diff(e1, e2), 1e-3 * sup_norm(e1));
}

TEST(EnergyDensity, FlavourNames) {
  EXPECT_EQ(parse_flavor("E1"), EnergyFlavor::e1);
  EXPECT_EQ(parse_flavor("E2"), EnergyFlavor::e2);
  EXPECT_EQ(to_string(EnergyFlavor::e2), "E2");
  EXPECT_THROW(parse_flavor("E3"), InvalidArgument);
}

TEST(SiteEnergies, SingleNucleusOwnsEverything) {
  auto const s = solve(Grid(24, 8.0), make_config({{3.0, 4.0, 5.0}}, NucleusShape{1.0}, 0.0, 8.0));
  auto const p = build_partition(s.config, s.grid);
  for (auto flavor : {EnergyFlavor::e1, EnergyFlavor::e2}) {
    auto const r = site_energies(s.state, s.m, p, flavor);
    ASSERT_EQ(r.energies.size(), 1u);
    EXPECT_NEAR(r.energies[0], r.reference_energy, 1e-10 * std::abs(r.reference_energy));
  }
}

TEST(SiteEnergies, SumEqualsTotal) {
  auto const& s = asymmetric();
  auto const p = build_partition(s.config, s.grid);
  for (auto flavor : {EnergyFlavor::e1, EnergyFlavor::e2}) {
    auto const r = site_energies(s.state, s.m, p, flavor);
    EXPECT_NEAR(r.total, r.density_integral, 1e-12 * std::abs(r.total));
    EXPECT_NEAR(r.total, r.reference_energy, 1e-9 * std::abs(r.total));
  }
}

TEST(SiteEnergies, SymmetricDimerSplitsEvenly) {
  auto const s = solve(Grid(32, 8.0), dimer(8.0, 2.0, {4.0, 4.0, 4.0}));
  auto const p = build_partition(s.config, s.grid);
  for (auto flavor : {EnergyFlavor::e1, EnergyFlavor::e2}) {
    auto const r = site_energies(s.state, s.m, p, flavor);
    EXPECT_NEAR(r.energies[0], r.energies[1], 1e-10 * std::abs(r.energies[0]));
  }
}

TEST(SiteEnergies, PerfectLatticeSitesAreEqual) {
  auto const s = solve(Grid(32, 8.0), make_config(cubic_lattice(2, 8.0, {1.0, 1.0, 1.0}), NucleusShape{1.0}, 0.0, 8.0));
  auto const p = build_partition(s.config, s.grid);
  for (auto flavor : {EnergyFlavor::e1, EnergyFlavor::e2}) {
    auto const r = site_energies(s.state, s.m, p, flavor);
    auto const [lo, hi] = std::minmax_element(r.energies.begin(), r.energies.end());
    EXPECT_LE(*hi - *lo, 1e-8 * std::abs(*hi));
  }
}

TEST(SiteEnergies, PermutationRelabelsExactly) {
  auto const& s = asymmetric();
  auto coords = s.config.coords;
  std::rotate(coords.begin(), coords.begin() + 1, coords.end());
  auto const permuted = make_config(coords, s.config.shape, 0.0, 8.0);
  auto const m2 = assemble_density(permuted, s.grid);
  ASSERT_EQ(testing::max_abs_diff(m2, s.m), 0.0);
  auto const a = site_energies(s.state, s.m, build_partition(s.config, s.grid), EnergyFlavor::e2);
  auto const b = site_energies(s.state, m2, build_partition(permuted, s.grid), EnergyFlavor::e2);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(b.energies[j], a.energies[(j + 1) % 3]);
}

TEST(SiteEnergies, InvarianceSuite) {
  auto const& s = asymmetric();
  auto const r = invariance_suite(s.config, s.grid, tight(), EnergyFlavor::e1);
  EXPECT_EQ(r.permutation, 0.0);
  EXPECT_LE(r.translation, 1e-8);
  EXPECT_LE(r.rotation, 1e-8);
}

TEST(SiteForces, RowsSumToTotalForce) {
  auto const& s = asymmetric();
  auto const p = build_partition(s.config, s.grid);
  Vec3 const v{0.0, 1.0, 0.0};
  double const hf = total_force(s.state, s.config, 0, v);
  auto const rows = site_forces_linearised(s.state, s.m, s.config, p, 0, v, {EnergyFlavor::e1, EnergyFlavor::e2});
  ASSERT_EQ(rows.size(), 2u);
  for (auto const& row : rows) {
    double const sum = compensated_sum(row.entries);
    EXPECT_NEAR(sum, hf, 1e-6 * std::max(std::abs(hf), 1e-10));
    EXPECT_EQ(row.distances[0], 0.0);
  }
}

TEST(SiteForces, LinearisedMatchesCentralDifference) {
  auto const& s = asymmetric();
  auto const p = build_partition(s.config, s.grid);
  Vec3 const v{1.0, 0.0, 0.0};
  ForceOptions o;
  o.solver = tight();
  auto const lin = site_forces(s.state, s.m, s.config, p, 1, v, EnergyFlavor::e1, ForceMethod::linearised, o);
  auto const fd = site_forces(s.state, s.m, s.config, p, 1, v, EnergyFlavor::e1, ForceMethod::central_difference, o);
  EXPECT_EQ(fd.step, o.step);
  for (std::size_t j = 0; j < lin.entries.size(); ++j) {
    EXPECT_NEAR(lin.entries[j], fd.entries[j], std::max(1e-6, 10.0 * o.step * o.step) * std::max(1.0, std::abs(lin.entries[j])))
        << "j = " << j;
  }
}

TEST(SiteForces, SymmetricDimerTotalForceVanishesAlongAxisNormal) {
  auto const s = solve(Grid(32, 8.0), dimer(8.0, 2.0, {4.0, 4.0, 4.0}));
  // Moving a nucleus perpendicular to the axis is a symmetry-odd perturbation.
  EXPECT_NEAR(total_force(s.state, s.config, 0, {0.0, 0.0, 1.0}), 0.0, 1e-10);
  // Along the axis the two nuclei feel opposite forces.
  EXPECT_NEAR(total_force(s.state, s.config, 0, {1.0, 0.0, 0.0}), -total_force(s.state, s.config, 1, {1.0, 0.0, 0.0}),
              1e-10);
}

TEST(SiteForces, BadArguments) {
  auto const& s = asymmetric();
  auto const p = build_partition(s.config, s.grid);
  EXPECT_THROW(site_forces(s.state, s.m, s.config, p, 7, {1, 0, 0}, EnergyFlavor::e1, ForceMethod::linearised),
               InvalidArgument);
  ForceOptions o;
  o.step = 0.0;
  EXPECT_THROW(site_forces(s.state, s.m, s.config, p, 0, {1, 0, 0}, EnergyFlavor::e1, ForceMethod::central_difference, o),
               InvalidArgument);
}

}  // namespace
}  // namespace tfw
