#include "tfw/linear_response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tfw/errors.hpp"
#include "tfw/spectral.hpp"
#include "tfw_operator.hpp"

namespace tfw {

using detail::kFourPi;

HomogeneousReference homogeneous_reference(double m0) {
  if (m0 < 0.0) throw InvalidArgument("homogeneous_reference: m0 must be non-negative");
  return {std::sqrt(m0), 0.0, (5.0 / 3.0) * std::cbrt(m0 * m0)};
}

ScreeningConstants screening_constants(double m0, double c_w) {
  if (!(m0 > 0.0)) throw InvalidArgument("screening_constants: m0 must be positive");
  if (!(c_w > 0.0)) throw InvalidArgument("screening_constants: C_W must be positive");
  ScreeningConstants s;
  s.u0 = std::sqrt(m0);
  s.c_w = c_w;
  s.a = (20.0 / 9.0) * std::pow(s.u0, 4.0 / 3.0) / c_w;
  s.c = 8.0 * std::numbers::pi * s.u0 * s.u0 / c_w;

  std::complex<double> const disc = std::sqrt(std::complex<double>(s.a * s.a - 4.0 * s.c, 0.0));
  s.t_plus = 0.5 * (-s.a + disc);
  s.t_minus = 0.5 * (-s.a - disc);
  s.kappa_plus = std::sqrt(-s.t_plus);
  s.kappa_minus = std::sqrt(-s.t_minus);
  if (s.kappa_plus.real() < 0.0) s.kappa_plus = -s.kappa_plus;
  if (s.kappa_minus.real() < 0.0) s.kappa_minus = -s.kappa_minus;

  s.oscillatory = s.a * s.a < 4.0 * s.c;
  if (s.oscillatory) {
    // Conjugate pair: same real part.
    s.alpha = s.kappa_plus.real();
    s.beta = std::complex<double>(0.0, std::abs(s.kappa_plus.imag()));
    s.decay_rate = s.alpha;
    s.oscillation_wavenumber = std::abs(s.kappa_plus.imag());
  } else {
    double const k1 = s.kappa_plus.real();
    double const k2 = s.kappa_minus.real();
    s.alpha = 0.5 * (k1 + k2);
    s.beta = std::complex<double>(0.5 * std::abs(k1 - k2), 0.0);
    s.decay_rate = std::min(k1, k2);
    s.oscillation_wavenumber = 0.0;
  }
  return s;
}

namespace {

struct CoupledResidual {
  double eq_u = 0.0;
  double eq_phi = 0.0;
};

CoupledResidual coupled_residual(GroundState const& state, ScalarField const& u_dot, ScalarField const& phi_dot,
                                 double theta_dot, ScalarField const& m_dot) {
  ScalarField const& u = state.u;
  ScalarField r1 = minus_laplacian(u_dot);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    double const pot = (35.0 / 9.0) * std::pow(std::abs(u[i]), 4.0 / 3.0) - state.phi[i] - state.theta;
    r1[i] += pot * u_dot[i] - u[i] * (phi_dot[i] + theta_dot);
  }
  ScalarField source(u.grid());
  for (std::size_t i = 0; i < source.size(); ++i) source[i] = m_dot[i] - 2.0 * u[i] * u_dot[i];
  source = remove_mean(source);
  ScalarField r2 = minus_laplacian(phi_dot);
  for (std::size_t i = 0; i < r2.size(); ++i) r2[i] -= kFourPi * source[i];
  return {l2_norm(r1), l2_norm(r2)};
}

double residual_scale(GroundState const& state, ScalarField const& m_dot) {
  // || 4 pi u (-lap)^+ md || + || 4 pi md ||
  ScalarField f = detail::coulomb_potential(m_dot);
  f = multiply(state.u, f);
  return l2_norm(f) + kFourPi * l2_norm(m_dot);
}

}  // namespace

double linearised_residual(GroundState const& state, LinearisedSolution const& sol) {
  double const scale = residual_scale(state, sol.m_dot);
  if (scale == 0.0) return l2_norm(sol.u_dot) + l2_norm(sol.phi_dot) + std::abs(sol.theta_dot);
  auto const r = coupled_residual(state, sol.u_dot, sol.phi_dot, sol.theta_dot, sol.m_dot);
  return (r.eq_u + r.eq_phi) / scale;
}

LinearisedSolution solve_linearised(GroundState const& state, ScalarField const& m_dot, LinearOptions const& opts) {
  Grid const& grid = state.u.grid();
  if (!(m_dot.grid() == grid)) throw InvalidArgument("solve_linearised: m_dot lives on another grid");
  require_finite(m_dot, "solve_linearised");
  double abs_mass = 0.0;
  for (double v : m_dot.values()) abs_mass += std::abs(v);
  abs_mass *= grid.cell_volume();
  double const net = integrate(m_dot);
  if (std::abs(net) > 1e-10 * std::max(abs_mass, 1e-300)) {
    throw NonNeutralSource("solve_linearised: integral of m_dot is " + std::to_string(net) + ", must vanish");
  }

  LinearisedSolution sol{ScalarField(grid), ScalarField(grid), m_dot, 0.0, 0.0, 0};
  if (abs_mass == 0.0) return sol;
  if (max_value(state.u) <= 0.0) throw SingularOperator("solve_linearised: ground state has no electrons");

  detail::TfwHessian const hess(state.u, state.phi, state.theta);
  double const charge = inner(state.u, state.u);
  double const kmin = 2.0 * std::numbers::pi / grid.length();
  double const shift = (20.0 / 9.0) * std::pow(charge / grid.volume(), 2.0 / 3.0) + kmin * kmin;
  auto apply_h = [&](ScalarField const& d) { return hess.apply(d); };
  auto apply_m = [shift](ScalarField const& r) { return screened_inverse(r, shift); };

  ScalarField const f = multiply(state.u, detail::coulomb_potential(m_dot));

  // PCG plus a few rounds of iterative refinement against the true residual.
  ScalarField x(grid);
  ScalarField rhs = f;
  double const fnorm = l2_norm(detail::project_out(f, state.u));
  for (int round = 0; round < 4; ++round) {
    auto const pcg = detail::projected_pcg(apply_h, apply_m, state.u, rhs, opts.tol * 0.1, opts.max_iter);
    sol.iterations += pcg.iterations;
    if (pcg.breakdown) throw SingularOperator("solve_linearised: operator lost positivity (state is not a ground state?)");
    x += pcg.x;
    ScalarField hx = hess.apply(x);
    rhs = f - hx;
    double const rel = fnorm > 0.0 ? l2_norm(detail::project_out(rhs, state.u)) / fnorm : 0.0;
    if (rel <= opts.tol) break;
    if (!pcg.converged && round == 3) {
      throw SingularOperator("solve_linearised: iteration stagnated at relative residual " + std::to_string(rel));
    }
  }

  ScalarField const hx = hess.apply(x);
  sol.theta_dot = (inner(state.u, hx) - inner(state.u, f)) / charge;
  ScalarField source = m_dot;
  for (std::size_t i = 0; i < source.size(); ++i) source[i] -= 2.0 * state.u[i] * x[i];
  sol.phi_dot = detail::coulomb_potential(source);
  sol.u_dot = std::move(x);
  sol.residual = linearised_residual(state, sol);
  if (!(sol.residual <= std::max(opts.tol, 1e-13) * 10.0)) {
    throw SingularOperator("solve_linearised: residual " + std::to_string(sol.residual) + " above tolerance");
  }
  return sol;
}

std::vector<FdConsistencyRow> fd_consistency(std::function<ScalarField(double)> const& solve_at,
                                             GroundState const& state, LinearisedSolution const& lin,
                                             std::vector<double> const& steps) {
  std::vector<FdConsistencyRow> rows;
  for (double h : steps) {
    if (!(h > 0.0)) throw InvalidArgument("fd_consistency: steps must be strictly positive");
    ScalarField const uh = solve_at(h);
    double err = 0.0;
    for (std::size_t i = 0; i < uh.size(); ++i) {
      err = std::max(err, std::abs((uh[i] - state.u[i]) / h - lin.u_dot[i]));
    }
    FdConsistencyRow row{h, err, 0.0};
    if (!rows.empty() && rows.back().error > 0.0) row.ratio = err / rows.back().error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tfw
