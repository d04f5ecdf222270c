#pragma once

// First-order response of a ground state to a change of the nuclear density,
// and the screening constants of the homogeneous electron gas.

#include <complex>
#include <functional>
#include <vector>

#include "tfw/ground_state.hpp"
#include "tfw/grid.hpp"

namespace tfw {

struct HomogeneousReference {
  double u0 = 0.0;
  double phi0 = 0.0;
  double theta0 = 0.0;
};

/// Constant solution for a uniform nuclear density m0: u0 = sqrt(m0), phi0 = 0,
/// theta0 = 5/3 m0^(2/3).
HomogeneousReference homogeneous_reference(double m0);

/// Linearising about (u0, 0, theta0) and Fourier transforming gives, with t = |k|^2,
///   t^2 + a t + c = 0,   a = (20/9) u0^(4/3) / C_W,   c = 8 pi u0^2 / C_W.
/// Decay wavenumbers are kappa = sqrt(-t) (Re kappa > 0); alpha and beta are
/// their mean and half difference, so the response decays like
/// exp(-(alpha -+ beta) r). beta is real below the critical C_W and purely
/// imaginary (oscillating response) above it.
struct ScreeningConstants {
  double u0 = 0.0;
  double c_w = 1.0;
  double a = 0.0;
  double c = 0.0;
  std::complex<double> t_plus;
  std::complex<double> t_minus;
  std::complex<double> kappa_plus;
  std::complex<double> kappa_minus;
  double alpha = 0.0;
  std::complex<double> beta;
  /// Slowest decay rate, min Re kappa (= alpha in the oscillatory regime).
  double decay_rate = 0.0;
  /// |Im kappa|; non-zero only in the oscillatory regime.
  double oscillation_wavenumber = 0.0;
  bool oscillatory = false;

  /// Dispersion polynomial q(t) = t^2 + a t + c.
  std::complex<double> dispersion(std::complex<double> t) const { return t * t + a * t + c; }
};

ScreeningConstants screening_constants(double m0, double c_w = 1.0);

struct LinearOptions {
  double tol = 1e-10;  // relative residual
  int max_iter = 4000;
};

struct LinearisedSolution {
  ScalarField u_dot;
  ScalarField phi_dot;  // zero mean
  ScalarField m_dot;
  /// Response of the multiplier; phi_dot + theta_dot is the full potential response.
  double theta_dot = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Solves
///   -lap ud + (35/9 u^(4/3) - phi - theta) ud - u (phid + thetad) = 0,
///   -lap phid = 4 pi (md - 2 u ud),
/// with int md = 0 and int u ud = 0.
LinearisedSolution solve_linearised(GroundState const& state, ScalarField const& m_dot, LinearOptions const& opts = {});

/// Relative residual of the coupled linear system for a candidate solution.
double linearised_residual(GroundState const& state, LinearisedSolution const& sol);

struct FdConsistencyRow {
  double step = 0.0;
  double error = 0.0;  // || (u_h - u)/h - ud ||_inf
  double ratio = 0.0;  // error(this) / error(previous row); 0 on the first row
};

/// Ground states u_h for nuclear densities m(h), compared against the linear
/// response: e(h) = ||(u_h - u)/h - ud||_inf. `solve_at` returns u_h.
std::vector<FdConsistencyRow> fd_consistency(std::function<ScalarField(double)> const& solve_at,
                                             GroundState const& state, LinearisedSolution const& lin,
                                             std::vector<double> const& steps);

}  // namespace tfw
