#pragma once

// Experiment harnesses: pairs of ground states whose differences are measured
// as functions of distance and fitted to exponential decay.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "tfw/decay_fit.hpp"
#include "tfw/ground_state.hpp"
#include "tfw/grid.hpp"
#include "tfw/linear_response.hpp"
#include "tfw/nuclei.hpp"

namespace tfw {

/// Tabulated curve, written out as CSV.
struct Curve {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct NamedFit {
  std::string name;
  std::optional<DecayFit> fit;  // empty when too few points survived the floor
  double r_min = 0.0;
  double r_max = 0.0;
  std::string note;
};

/// One pass/fail criterion. The thresholds are this harness's own choice.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // one of "<=", "<", ">=", ">", "=="
  bool passed = false;
};

/// Evaluates `value relation threshold`; relation is one of "<=", "<", ">=", ">", "==".
Check make_check(std::string name, double value, std::string relation, double threshold);

struct FieldDump {
  std::string name;
  ScalarField field;
};

struct ExperimentReport {
  std::string name;
  std::vector<Curve> curves;
  std::vector<NamedFit> fits;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<FieldDump> fields;
  /// Both configurations coincide; every response vanishes and the checks pass trivially.
  bool trivial = false;
  double solver_tol = 0.0;
  double noise_floor = 0.0;
  double runtime_seconds = 0.0;

  bool passed() const;
  double scalar(std::string const& key) const;
  NamedFit const& fit(std::string const& name) const;
  Check const& check(std::string const& name) const;
};

struct ExperimentOptions {
  SolverOptions solver = [] {
    SolverOptions s;
    s.tol = 1e-11;
    return s;
  }();
  /// Inner edge of the fit window; negative means twice the nuclear radius.
  double r_min = -1.0;
  /// Outer edge of the fit window as a fraction of L.
  double r_max_fraction = 0.4;
  bool keep_fields = true;
};

/// Maxima of |f| over shells of width h around `center` (minimum-image
/// distance in [r_min, r_max]); each point carries the distance at which its
/// shell's maximum is attained.
std::vector<DecayPoint> shell_max_profile(ScalarField const& f, Vec3 const& center, double r_min, double r_max);

/// |integral of f over B_R(center)| for every R.
std::vector<DecayPoint> ball_profile(ScalarField const& f, Vec3 const& center, std::vector<double> const& radii);

/// Samples f at the grid points center + i h e_axis, i = 0 .. n/2; `center`
/// must be a grid point. Returns (r, f) pairs.
std::vector<DecayPoint> axis_profile(ScalarField const& f, Vec3 const& center, int axis);

/// Two-term Prony fit y_i = A z1^i + B z2^i of equally spaced samples.
struct PronyFit {
  std::complex<double> z1;
  std::complex<double> z2;
  /// Slowest decay rate -log|z|/spacing over the two roots.
  double rate = 0.0;
  /// |arg z| / spacing of the slowest root.
  double wavenumber = 0.0;
  double relative_residual = 0.0;
};

PronyFit prony_fit(std::vector<double> const& samples, double spacing);

/// Number of sign changes in a sequence, ignoring entries with |y| <= floor.
int sign_changes(std::vector<double> const& values, double floor);

/// Ground states of two configurations and their differences
/// w = u2 - u1 and psi = (phi2 + theta2) - (phi1 + theta1).
struct PairSolution {
  ScalarField m1;
  ScalarField m2;
  GroundState s1;
  GroundState s2;
  ScalarField w;
  ScalarField psi;
  bool identical = false;
};

PairSolution solve_pair(NuclearConfig const& c1, NuclearConfig const& c2, Grid const& grid, SolverOptions const& opts);

/// Nucleus `nucleus` of `base` displaced by `displacement`; decay of |w|,
/// |grad w|, |lap w| and |psi| away from its original position.
ExperimentReport locality_experiment(NuclearConfig const& base, std::size_t nucleus, Vec3 const& displacement,
                                     Grid const& grid, ExperimentOptions const& opts = {});

/// Adds an impurity of charge Z and then 2Z at `site` and compares the fits:
/// C should double and gamma stay put in the linear regime.
ExperimentReport charge_scaling_experiment(NuclearConfig const& base, Vec3 const& site, double charge,
                                           Grid const& grid, ExperimentOptions const& opts = {});

/// Impurity of charge Z (shape `shape`) at the cell centre of m0 jellium.
ExperimentReport screening_experiment(double m0, double charge, NucleusShape const& shape, Grid const& grid,
                                      ExperimentOptions const& opts = {});

/// Full configuration against copies with every nucleus farther than R_n
/// from `center` deleted; sup errors of u and of the potential over B_R(center).
ExperimentReport tdl_experiment(NuclearConfig const& full, Vec3 const& center, std::vector<double> const& radii,
                                double observation_radius, Grid const& grid, ExperimentOptions const& opts = {});

/// |integral over B_R(center) of rho12|, rho12 = m1 - u1^2 - m2 + u2^2.
/// Empty `radii` selects shells of width h across the fit window.
ExperimentReport neutrality_experiment(NuclearConfig const& c1, NuclearConfig const& c2, Vec3 const& center,
                                       std::vector<double> const& radii, Grid const& grid,
                                       ExperimentOptions const& opts = {});

}  // namespace tfw
