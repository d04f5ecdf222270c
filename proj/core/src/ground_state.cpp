#include "tfw/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tfw/spectral.hpp"
#include "tfw_operator.hpp"

namespace tfw {

namespace {

using detail::coulomb_potential;
using detail::kFourPi;

double thomas_fermi_integral(ScalarField const& v) {
  std::vector<double> terms(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) terms[i] = std::pow(std::abs(v[i]), 10.0 / 3.0);
  return v.grid().cell_volume() * compensated_sum(terms);
}

ScalarField charge_density(ScalarField const& v, ScalarField const& m) {
  ScalarField rho = m;
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] -= v[i] * v[i];
  return rho;
}

// Everything the iteration needs about one trial amplitude v.
struct Iterate {
  ScalarField v;
  ScalarField phi;
  ScalarField residual;  // -lap v + 5/3 |v|^(4/3) v - (phi + theta) v
  double theta = 0.0;
  double energy = 0.0;
  double residual_norm = 0.0;
};

Iterate evaluate(ScalarField v, ScalarField const& m) {
  ScalarField const rho = charge_density(v, m);
  ScalarField phi = coulomb_potential(rho);
  ScalarField kv = minus_laplacian(v);
  double const gradient_term = inner(v, kv);
  for (std::size_t i = 0; i < v.size(); ++i) {
    kv[i] += (5.0 / 3.0) * std::pow(std::abs(v[i]), 4.0 / 3.0) * v[i] - phi[i] * v[i];
  }
  Iterate it{std::move(v), std::move(phi), std::move(kv)};
  it.energy = gradient_term + thomas_fermi_integral(it.v) + 0.5 * inner(it.phi, rho);
  double const vv = inner(it.v, it.v);
  it.theta = vv > 0.0 ? inner(it.v, it.residual) / vv : 0.0;
  for (std::size_t i = 0; i < it.v.size(); ++i) it.residual[i] -= it.theta * it.v[i];
  it.residual_norm = l2_norm(it.residual);
  return it;
}

ScalarField onto_constraint(ScalarField v, double charge) {
  for (double& x : v.values()) x = std::abs(x);
  double const vv = inner(v, v);
  if (vv > 0.0) v *= std::sqrt(charge / vv);
  return v;
}

ScalarField initial_guess(ScalarField const& m, SolverOptions const& opts, double charge) {
  Grid const& grid = m.grid();
  switch (opts.init) {
    case Initialization::uniform:
      return ScalarField(grid, std::sqrt(charge / grid.volume()));
    case Initialization::supplied: {
      if (!opts.initial) throw InvalidArgument("solve_ground_state: supplied initialisation without a field");
      if (!(opts.initial->grid() == grid)) throw InvalidArgument("solve_ground_state: initial field on another grid");
      require_finite(*opts.initial, "solve_ground_state");
      ScalarField v = *opts.initial;
      double const floor = 1e-3 * std::sqrt(charge / grid.volume());
      for (double& x : v.values()) x = std::max(std::abs(x), floor);
      return v;
    }
    case Initialization::randomized: {
      std::mt19937_64 rng(opts.seed);
      std::uniform_real_distribution<double> noise(0.5, 1.5);
      ScalarField v(grid);
      for (double& x : v.values()) x = noise(rng);
      v = screened_inverse(v, 1.0);
      double const floor = 0.1 * mean(v);
      for (double& x : v.values()) x = std::max(x, floor);
      return v;
    }
  }
  return ScalarField(grid);
}

GroundState package(Iterate const& it, ScalarField const& m, int iterations, std::vector<double> history) {
  GroundState s{it.v, it.phi, it.theta, it.residual_norm, 0.0, it.energy, iterations, std::move(history)};
  s.residual_phi = residuals(s, m).second;
  return s;
}

double energy_slack(double e) { return 1e-13 * std::max(1.0, std::abs(e)); }

}  // namespace

EnergyTerms tfw_energy_terms(ScalarField const& v, ScalarField const& m) {
  ScalarField const rho = charge_density(v, m);
  ScalarField const phi = poisson_solve(rho);
  VectorField const g = gradient(v);
  EnergyTerms t;
  for (int d = 0; d < 3; ++d) t.gradient += inner(g[d], g[d]);
  t.thomas_fermi = thomas_fermi_integral(v);
  t.coulomb = 0.5 * inner(phi, rho);
  return t;
}

double tfw_energy(ScalarField const& v, ScalarField const& m) { return tfw_energy_terms(v, m).total(); }

double tfw_energy_field_form(ScalarField const& v, ScalarField const& m) {
  ScalarField const rho = charge_density(v, m);
  ScalarField const phi = poisson_solve(rho);
  VectorField const gv = gradient(v);
  VectorField const gp = gradient(phi);
  double grad = 0.0;
  double field = 0.0;
  for (int d = 0; d < 3; ++d) {
    grad += inner(gv[d], gv[d]);
    field += inner(gp[d], gp[d]);
  }
  return grad + thomas_fermi_integral(v) + field / (2.0 * kFourPi);
}

double extract_theta(ScalarField const& u, ScalarField const& phi) {
  ScalarField ku = minus_laplacian(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    ku[i] += (5.0 / 3.0) * std::pow(std::abs(u[i]), 4.0 / 3.0) * u[i] - phi[i] * u[i];
  }
  double const uu = inner(u, u);
  return uu > 0.0 ? inner(u, ku) / uu : 0.0;
}

std::pair<double, double> residuals(GroundState const& state, ScalarField const& m) {
  ScalarField const& u = state.u;
  ScalarField ru = minus_laplacian(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    ru[i] += (5.0 / 3.0) * std::pow(std::abs(u[i]), 4.0 / 3.0) * u[i] - (state.phi[i] + state.theta) * u[i];
  }
  // Source projected onto the range of the discrete Laplacian.
  ScalarField source = charge_density(u, m);
  source = remove_mean(source);
  ScalarField rp = minus_laplacian(state.phi);
  for (std::size_t i = 0; i < rp.size(); ++i) rp[i] -= kFourPi * source[i];
  return {l2_norm(ru), l2_norm(rp)};
}

GroundState solve_ground_state(ScalarField const& m, SolverOptions const& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("solve_ground_state: tol must be positive");
  require_finite(m, "solve_ground_state");
  Grid const& grid = m.grid();
  if (min_value(m) < 0.0) throw InvalidArgument("solve_ground_state: nuclear density must be non-negative");
  double const charge = integrate(m);
  if (max_value(m) == 0.0) {
    GroundState zero{ScalarField(grid), ScalarField(grid), 0.0, 0.0, 0.0, 0.0, 0, {0.0}};
    return zero;
  }
  if (!(charge > 0.0)) throw InvalidArgument("solve_ground_state: nuclear charge must be positive");

  double const mean_density = charge / grid.volume();
  double const kmin = 2.0 * std::numbers::pi / grid.length();
  double const shift = opts.preconditioner_shift > 0.0
                           ? opts.preconditioner_shift
                           : (20.0 / 9.0) * std::pow(mean_density, 2.0 / 3.0) + kmin * kmin;
  auto precondition = [shift](ScalarField const& r) { return screened_inverse(r, shift); };

  Iterate it = evaluate(onto_constraint(initial_guess(m, opts, charge), charge), m);
  std::vector<double> history{it.energy};
  double const scale = std::sqrt(charge);

  ScalarField direction(grid);
  ScalarField z_prev(grid);
  ScalarField r_prev(grid);
  bool have_direction = false;
  double step = 1.0;
  int newton_cooldown = 0;
  int iterations = 0;
  bool last_crossed_zero = false;

  auto accept = [&](Iterate next) {
    it = std::move(next);
    history.push_back(it.energy);
    ++iterations;
  };

  while (it.residual_norm > opts.tol) {
    if (iterations >= opts.max_iter) {
      throw MaxIterExceeded("solve_ground_state: no convergence after " + std::to_string(iterations) +
                                " iterations (residual " + std::to_string(it.residual_norm) + ")",
                            package(it, m, iterations, history));
    }

    // Newton refinement: H d = -r on the tangent space of the constraint.
    if (opts.newton && newton_cooldown == 0 && it.residual_norm <= opts.newton_switch * scale) {
      detail::TfwHessian const hess(it.v, it.phi, it.theta);
      double const forcing = std::clamp(it.residual_norm / scale, 1e-13, 0.1);
      ScalarField rhs = it.residual;
      rhs *= -1.0;
      auto const sol = detail::projected_pcg([&](ScalarField const& d) { return hess.apply(d); }, precondition, it.v,
                                             rhs, forcing, 1000);
      bool accepted = false;
      if (!sol.breakdown && sol.iterations > 0) {
        for (double damp : {1.0, 0.5, 0.25}) {
          ScalarField trial_v = it.v;
          for (std::size_t i = 0; i < trial_v.size(); ++i) trial_v[i] += damp * sol.x[i];
          Iterate trial = evaluate(onto_constraint(std::move(trial_v), charge), m);
          if (trial.energy <= it.energy + energy_slack(it.energy) && trial.residual_norm < it.residual_norm) {
            accept(std::move(trial));
            accepted = true;
            break;
          }
        }
      }
      if (accepted) {
        have_direction = false;
        continue;
      }
      newton_cooldown = 20;
    }
    if (newton_cooldown > 0) --newton_cooldown;

    // Preconditioned nonlinear CG (Polak-Ribiere+) on the constraint sphere.
    ScalarField z = detail::project_out(precondition(it.residual), it.v);
    double beta = 0.0;
    if (have_direction) {
      double const num = inner(it.residual, z) - inner(it.residual, z_prev);
      double const den = inner(r_prev, z_prev);
      beta = den > 0.0 ? std::max(0.0, num / den) : 0.0;
    }
    ScalarField d = z;
    d *= -1.0;
    if (beta > 0.0) {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += beta * direction[i];
      d = detail::project_out(d, it.v);
    }
    double slope = 2.0 * inner(it.residual, d);
    if (!(slope < 0.0)) {
      d = z;
      d *= -1.0;
      slope = 2.0 * inner(it.residual, d);
    }

    ScalarField r_now = it.residual;
    ScalarField z_now = z;
    bool found = false;
    for (int attempt = 0; attempt < 2 && !found; ++attempt) {
      double a = step;
      for (int bt = 0; bt <= opts.max_backtracks; ++bt, a *= 0.5) {
        ScalarField trial_v = it.v;
        for (std::size_t i = 0; i < trial_v.size(); ++i) trial_v[i] += a * d[i];
        last_crossed_zero = min_value(trial_v) < 0.0;
        Iterate trial = evaluate(onto_constraint(std::move(trial_v), charge), m);
        bool const armijo = trial.energy <= it.energy + opts.armijo * a * slope;
        bool const flat = trial.energy <= it.energy + energy_slack(it.energy) && trial.residual_norm < it.residual_norm;
        if (armijo || flat) {
          step = std::min(4.0 * a, 1e3);
          found = true;
          accept(std::move(trial));
          break;
        }
      }
      if (!found) {
        // Retry along steepest descent with a fresh step.
        d = z;
        d *= -1.0;
        slope = 2.0 * inner(it.residual, d);
        step = 1.0;
      }
    }
    if (!found) {
      if (last_crossed_zero) {
        throw NegativeDensity("solve_ground_state: energy descent stalled after leaving the positive cone");
      }
      throw MaxIterExceeded("solve_ground_state: energy descent stalled at residual " +
                                std::to_string(it.residual_norm),
                            package(it, m, iterations, history));
    }
    r_prev = std::move(r_now);
    z_prev = std::move(z_now);
    direction = d;
    have_direction = true;
  }
  return package(it, m, iterations, history);
}

BoundsDiagnostic bounds_diagnostic(GroundState const& state) {
  BoundsDiagnostic b;
  b.u_min = min_value(state.u);
  b.u_max = max_value(state.u);
  b.phi_min = min_value(state.phi);
  b.phi_max = max_value(state.phi);
  double c = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    c = std::max(c, (10.0 / 9.0) * std::pow(std::abs(state.u[i]), 4.0 / 3.0) - state.phi[i] - state.theta);
  }
  b.solovej_c = c;
  return b;
}

}  // namespace tfw
