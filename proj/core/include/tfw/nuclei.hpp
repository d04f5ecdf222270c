#pragma once

// Smeared nuclei and the nuclear charge density m_Y they generate.

#include <cstdint>
#include <vector>

#include "tfw/grid.hpp"

namespace tfw {

/// Radial mollifier bump c * exp(-1 / (1 - (r/R0)^2)) supported in the ball of radius R0.
struct NucleusShape {
  double radius = 1.0;

  /// Unnormalised profile exp(-1 / (1 - (r/R0)^2)).
  double profile(double r) const;
  /// d(profile)/dr.
  double profile_derivative(double r) const;
  /// Continuum constant c with c * integral(profile) = 1.
  double normalization() const;
};

struct NuclearConfig {
  std::vector<Vec3> coords;
  NucleusShape shape;
  double background = 0.0;
  /// Per-nucleus charge; empty means every nucleus carries unit charge.
  std::vector<double> charges;

  std::size_t size() const { return coords.size(); }
  double charge(std::size_t j) const { return charges.empty() ? 1.0 : charges[j]; }
  double total_nuclear_charge() const;
};

/// Wraps all coordinates into [0, L)^3 and validates the charges.
NuclearConfig make_config(std::vector<Vec3> coords, NucleusShape shape, double background, double length,
                          std::vector<double> charges = {});

/// Simple-cubic lattice with `cells` sites per axis filling the cell.
std::vector<Vec3> cubic_lattice(int cells, double length, Vec3 const& origin = {0.0, 0.0, 0.0});

/// m(x) = background + sum_j q_j eta_j(x - Y_j), each eta_j renormalised so that
/// its grid quadrature is exactly one. The nuclear part is then smoothed with a
/// [1/4, 1/2, 1/4] filter per axis, which removes the Nyquist planes of the
/// sampled bumps while keeping m >= 0 and every charge. Order-independent in
/// the coordinate list.
ScalarField assemble_density(NuclearConfig const& config, Grid const& grid);

/// Renormalised contribution of a single nucleus of unit charge at `position`.
ScalarField nucleus_density(Vec3 const& position, NucleusShape const& shape, Grid const& grid);

/// d/dh of assemble_density for Y_k -> Y_k + h V at h = 0, evaluated analytically
/// (including the derivative of the renormalisation, so its integral vanishes).
ScalarField density_derivative(NuclearConfig const& config, Grid const& grid, std::size_t k, Vec3 const& direction);

/// Y^h: nucleus k moved by h V and wrapped; the rest unchanged.
NuclearConfig perturb(NuclearConfig const& config, std::size_t k, Vec3 const& direction, double step, double length);

/// Quadrature of f over the periodic ball B_R(center), with a linear ramp of
/// width h across the sphere to suppress lattice-point noise.
double ball_integral(ScalarField const& f, Vec3 const& center, double radius);

struct AdmissibilityReport {
  /// sup over sampled centres of ||m||_{L^2(B_1(x))}.
  double m_estimate = 0.0;
  std::vector<double> radii;
  /// inf over sampled centres of the integral of m over B_R(x), one per radius.
  std::vector<double> omega_table;
};

AdmissibilityReport admissibility(NuclearConfig const& config, Grid const& grid, int sample_centers,
                                  std::vector<double> const& radii, std::uint64_t seed = 0);

}  // namespace tfw
