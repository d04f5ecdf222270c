#pragma once

// Site energies: the TFW energy density split among nuclei by a smooth
// partition of unity, and their derivatives with respect to nuclear positions.
//
// The electrostatic potential in the first energy density is the zero-mean
// one stored in GroundState. Totals and forces do not depend on that choice;
// individual site energies of the first flavour do.

#include <cstddef>
#include <string>
#include <vector>

#include "tfw/ground_state.hpp"
#include "tfw/grid.hpp"
#include "tfw/linear_response.hpp"
#include "tfw/nuclei.hpp"

namespace tfw {

/// phi_j(x) = w(x - Y_j) / sum_i w(x - Y_i), w(x) = exp(-gamma |x|^2) summed
/// over the 27 nearest periodic images of each nucleus.
struct Partition {
  double gamma_tilde = 0.5;
  std::vector<Vec3> centers;
  std::vector<ScalarField> weights;

  std::size_t size() const { return weights.size(); }
};

Partition build_partition(NuclearConfig const& config, Grid const& grid, double gamma_tilde = 0.5);

/// V . grad_{Y_k} of every partition weight (analytic quotient rule).
std::vector<ScalarField> partition_derivative(Partition const& partition, std::size_t k, Vec3 const& direction);

enum class EnergyFlavor { e1, e2 };

std::string to_string(EnergyFlavor flavor);
EnergyFlavor parse_flavor(std::string const& name);

/// e1 = |grad u|^2 + u^(10/3) + 1/2 phi (m - u^2)
/// e2 = |grad u|^2 + u^(10/3) + |grad phi|^2 / (8 pi)
ScalarField energy_density(GroundState const& state, ScalarField const& m, EnergyFlavor flavor);

/// First-order change of the energy density under the linear response `lin`.
ScalarField energy_density_derivative(GroundState const& state, ScalarField const& m, LinearisedSolution const& lin,
                                      EnergyFlavor flavor);

struct SiteEnergyReport {
  EnergyFlavor flavor = EnergyFlavor::e1;
  std::vector<double> energies;
  /// Compensated sum of the site energies.
  double total = 0.0;
  /// Integral of the energy density over the cell.
  double density_integral = 0.0;
  /// tfw_energy of the state.
  double reference_energy = 0.0;
};

SiteEnergyReport site_energies(GroundState const& state, ScalarField const& m, Partition const& partition,
                               EnergyFlavor flavor);

enum class ForceMethod { linearised, central_difference };

std::string to_string(ForceMethod method);

struct ForceOptions {
  /// Step of the central difference.
  double step = 1e-3;
  SolverOptions solver;
  LinearOptions linear;
};

/// dE_j/dY_k . V for every j.
struct ForceMatrixRow {
  std::size_t k = 0;
  Vec3 direction{};
  std::vector<double> entries;
  std::vector<double> distances;  // minimum-image |Y_j - Y_k|
  ForceMethod method = ForceMethod::linearised;
  double step = 0.0;  // central-difference step, 0 for the linearised method
};

/// Entries whose magnitude is below this are reported as exactly zero.
inline constexpr double kForceZero = 1e-14;

ForceMatrixRow site_forces(GroundState const& state, ScalarField const& m, NuclearConfig const& config,
                           Partition const& partition, std::size_t k, Vec3 const& direction, EnergyFlavor flavor,
                           ForceMethod method, ForceOptions const& opts = {});

/// Linearised rows for several flavours sharing one linear solve.
std::vector<ForceMatrixRow> site_forces_linearised(GroundState const& state, ScalarField const& m,
                                                   NuclearConfig const& config, Partition const& partition,
                                                   std::size_t k, Vec3 const& direction,
                                                   std::vector<EnergyFlavor> const& flavors,
                                                   LinearOptions const& opts = {});

/// Hellmann-Feynman side of the total-force identity: int phi m_dot.
double total_force(GroundState const& state, NuclearConfig const& config, std::size_t k, Vec3 const& direction);

struct InvarianceReport {
  EnergyFlavor flavor = EnergyFlavor::e1;
  std::vector<double> energies;
  /// max |E_j(permuted) - E_j| after undoing the permutation; expected to be exactly 0.
  double permutation = 0.0;
  /// Translation by one grid spacing along x.
  double translation = 0.0;
  /// Rotation (x, y, z) -> (-y, x, z) of the configuration about the origin.
  double rotation = 0.0;
};

InvarianceReport invariance_suite(NuclearConfig const& config, Grid const& grid, SolverOptions const& opts,
                                  EnergyFlavor flavor = EnergyFlavor::e1, double gamma_tilde = 0.5);

}  // namespace tfw
