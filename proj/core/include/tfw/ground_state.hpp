#pragma once

// Discrete TFW ground state on the periodic cell (C_W = C_TF = 1):
//
//   E(v) = int |grad v|^2 + int v^(10/3) + 1/2 int phi_v (m - v^2),
//   -lap phi_v = 4 pi (m - v^2),   mean(phi_v) = 0,
//
// minimised over v >= 0 with int v^2 = int m. The minimiser solves
//
//   -lap u + 5/3 u^(7/3) - (phi + theta) u = 0,
//
// where theta is the multiplier of the charge constraint. phi is stored in
// the zero-mean gauge; phi + theta is the full potential.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tfw/errors.hpp"
#include "tfw/grid.hpp"

namespace tfw {

enum class Initialization { uniform, supplied, randomized };

struct SolverOptions {
  double tol = 1e-9;
  int max_iter = 50000;
  Initialization init = Initialization::uniform;
  /// Starting field for Initialization::supplied; rescaled onto the constraint.
  std::optional<ScalarField> initial;
  std::uint64_t seed = 0;

  // Line search on the energy.
  double armijo = 1e-4;
  int max_backtracks = 50;
  /// Shift s of the (-lap + s)^-1 preconditioner; <= 0 selects one from the mean density.
  double preconditioner_shift = 0.0;
  /// Relative residual ||r|| / ||u|| below which Newton refinement is attempted.
  double newton_switch = 1e-3;
  bool newton = true;
};

struct GroundState {
  ScalarField u;
  ScalarField phi;
  double theta = 0.0;
  double residual_u = 0.0;
  double residual_phi = 0.0;
  double energy = 0.0;
  int iterations = 0;
  /// Energy of every accepted iterate, starting with the initial guess.
  std::vector<double> energy_history;
};

/// Iteration budget exhausted (or descent stalled) before reaching tol.
class MaxIterExceeded : public Error {
 public:
  MaxIterExceeded(std::string const& what, GroundState best) : Error(what), best_(std::move(best)) {}
  GroundState const& best() const { return best_; }

 private:
  GroundState best_;
};

struct EnergyTerms {
  double gradient = 0.0;
  double thomas_fermi = 0.0;
  double coulomb = 0.0;
  double total() const { return gradient + thomas_fermi + coulomb; }
};

/// TFW energy with the Coulomb term as 1/2 int phi_v (m - v^2).
double tfw_energy(ScalarField const& v, ScalarField const& m);
/// Same energy with the Coulomb term as 1/(8 pi) int |grad phi_v|^2.
double tfw_energy_field_form(ScalarField const& v, ScalarField const& m);
EnergyTerms tfw_energy_terms(ScalarField const& v, ScalarField const& m);

GroundState solve_ground_state(ScalarField const& m, SolverOptions const& opts = {});

/// L^2 norms of -lap u + 5/3 u^(7/3) - (phi + theta) u and of
/// -lap phi - 4 pi (m - u^2); the latter with the cell mean of the source removed.
std::pair<double, double> residuals(GroundState const& state, ScalarField const& m);

/// theta := <u, -lap u + 5/3 u^(7/3) - phi u> / <u, u>.
double extract_theta(ScalarField const& u, ScalarField const& phi);

struct BoundsDiagnostic {
  double u_min = 0.0;
  double u_max = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  /// Smallest C >= 0 with (10/9) u^(4/3) <= phi + theta + C everywhere.
  double solovej_c = 0.0;
};

BoundsDiagnostic bounds_diagnostic(GroundState const& state);

}  // namespace tfw
