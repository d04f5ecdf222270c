#include "tfw/site_energy.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>

#include "tfw/errors.hpp"
#include "tfw_operator.hpp"

namespace tfw {

namespace {

using detail::kFourPi;

double wrap_signed(double t, double length) { return t - length * std::round(t / length); }

// log of sum_{s=-1,0,1} exp(-gamma (t + sL)^2) and its t-derivative.
struct AxisKernel {
  std::vector<double> log_value;
  std::vector<double> log_slope;
};

AxisKernel axis_kernel(Grid const& grid, double center, double gamma) {
  int const n = grid.n();
  double const length = grid.length();
  AxisKernel out{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    double const t = wrap_signed(i * grid.spacing() - center, length);
    double e[3];
    double top = -std::numeric_limits<double>::infinity();
    for (int s = -1; s <= 1; ++s) {
      double const ts = t + s * length;
      e[s + 1] = -gamma * ts * ts;
      top = std::max(top, e[s + 1]);
    }
    double sum = 0.0;
    double slope = 0.0;
    for (int s = -1; s <= 1; ++s) {
      double const w = std::exp(e[s + 1] - top);
      sum += w;
      slope += w * (-2.0 * gamma * (t + s * length));
    }
    out.log_value[i] = top + std::log(sum);
    out.log_slope[i] = slope / sum;
  }
  return out;
}

std::vector<std::size_t> coordinate_order(std::vector<Vec3> const& centers) {
  std::vector<std::size_t> order(centers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
  return order;
}

ScalarField gradient_square(ScalarField const& f) {
  VectorField const g = gradient(f);
  ScalarField out(f.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = g[0][i] * g[0][i] + g[1][i] * g[1][i] + g[2][i] * g[2][i];
  }
  return out;
}

std::vector<double> weighted_integrals(ScalarField const& density, std::vector<ScalarField> const& weights) {
  std::vector<double> out(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) out[j] = inner(density, weights[j]);
  return out;
}

void flush_tiny(std::vector<double>& entries) {
  for (double& e : entries) {
    if (std::abs(e) < kForceZero) e = 0.0;
  }
}

std::vector<double> pair_distances(NuclearConfig const& config, std::size_t k, double length) {
  std::vector<double> d(config.size());
  for (std::size_t j = 0; j < config.size(); ++j) d[j] = min_distance(config.coords[j], config.coords[k], length);
  return d;
}

void require_partition(Partition const& partition, Grid const& grid, std::size_t nuclei) {
  if (partition.size() == 0) throw EmptyConfiguration("site energies: partition has no nuclei");
  if (!(partition.weights.front().grid() == grid)) throw InvalidArgument("site energies: partition on another grid");
  if (nuclei != 0 && partition.size() != nuclei) {
    throw InvalidArgument("site energies: partition does not match the configuration");
  }
}

}  // namespace

Partition build_partition(NuclearConfig const& config, Grid const& grid, double gamma_tilde) {
  if (config.size() == 0) throw EmptyConfiguration("build_partition: configuration has no nuclei");
  if (!(gamma_tilde > 0.0)) throw InvalidArgument("build_partition: gamma_tilde must be positive");
  int const n = grid.n();
  std::size_t const count = config.size();

  Partition p;
  p.gamma_tilde = gamma_tilde;
  p.centers.reserve(count);
  for (auto const& y : config.coords) p.centers.push_back(wrap(y, grid.length()));

  std::vector<std::array<AxisKernel, 3>> kernels(count);
  for (std::size_t j = 0; j < count; ++j) {
    for (int a = 0; a < 3; ++a) kernels[j][a] = axis_kernel(grid, p.centers[j][a], gamma_tilde);
  }
  // Sum in coordinate order so that relabelling nuclei gives bit-identical weights.
  std::vector<std::size_t> const order = coordinate_order(p.centers);

  p.weights.assign(count, ScalarField(grid));
  std::vector<double> logs(count);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        std::size_t const idx = grid.index(i, j, k);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < count; ++c) {
          auto const& kc = kernels[c];
          logs[c] = kc[0].log_value[i] + kc[1].log_value[j] + kc[2].log_value[k];
          top = std::max(top, logs[c]);
        }
        double sum = 0.0;
        for (std::size_t c : order) sum += std::exp(logs[c] - top);
        for (std::size_t c = 0; c < count; ++c) p.weights[c][idx] = std::exp(logs[c] - top) / sum;
      }
    }
  }
  return p;
}

std::vector<ScalarField> partition_derivative(Partition const& partition, std::size_t k, Vec3 const& direction) {
  if (k >= partition.size()) throw InvalidArgument("partition_derivative: nucleus index out of range");
  Grid const& grid = partition.weights.front().grid();
  int const n = grid.n();
  std::array<AxisKernel, 3> kk;
  for (int a = 0; a < 3; ++a) kk[a] = axis_kernel(grid, partition.centers[k][a], partition.gamma_tilde);

  // V . grad_{Y_k} log w(x - Y_k)
  ScalarField dlog(grid);
  for (int z = 0; z < n; ++z) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        dlog[grid.index(x, y, z)] = -(direction[0] * kk[0].log_slope[x] + direction[1] * kk[1].log_slope[y] +
                                      direction[2] * kk[2].log_slope[z]);
      }
    }
  }
  ScalarField const& phik = partition.weights[k];
  std::vector<ScalarField> out;
  out.reserve(partition.size());
  for (std::size_t j = 0; j < partition.size(); ++j) {
    ScalarField const& phij = partition.weights[j];
    ScalarField d(grid);
    double const delta = j == k ? 1.0 : 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = phij[i] * (delta - phik[i]) * dlog[i];
    out.push_back(std::move(d));
  }
  return out;
}

std::string to_string(EnergyFlavor flavor) { return flavor == EnergyFlavor::e1 ? "E1" : "E2"; }

EnergyFlavor parse_flavor(std::string const& name) {
  if (name == "E1" || name == "e1") return EnergyFlavor::e1;
  if (name == "E2" || name == "e2") return EnergyFlavor::e2;
  throw InvalidArgument("unknown energy density flavour '" + name + "' (expected E1 or E2)");
}

std::string to_string(ForceMethod method) {
  return method == ForceMethod::linearised ? "linearised" : "central-difference";
}

ScalarField energy_density(GroundState const& state, ScalarField const& m, EnergyFlavor flavor) {
  ScalarField const& u = state.u;
  ScalarField e = gradient_square(u);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += std::pow(std::abs(u[i]), 10.0 / 3.0);
  if (flavor == EnergyFlavor::e1) {
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += 0.5 * state.phi[i] * (m[i] - u[i] * u[i]);
  } else {
    ScalarField const gp = gradient_square(state.phi);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += gp[i] / (2.0 * kFourPi);
  }
  return e;
}

ScalarField energy_density_derivative(GroundState const& state, ScalarField const& m, LinearisedSolution const& lin,
                                      EnergyFlavor flavor) {
  ScalarField const& u = state.u;
  ScalarField const& ud = lin.u_dot;
  VectorField const gu = gradient(u);
  VectorField const gud = gradient(ud);
  ScalarField e(u.grid());
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = 2.0 * (gu[0][i] * gud[0][i] + gu[1][i] * gud[1][i] + gu[2][i] * gud[2][i]) +
           (10.0 / 3.0) * std::pow(std::abs(u[i]), 7.0 / 3.0) * ud[i];
  }
  if (flavor == EnergyFlavor::e1) {
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i] += 0.5 * lin.phi_dot[i] * (m[i] - u[i] * u[i]) + 0.5 * state.phi[i] * (lin.m_dot[i] - 2.0 * u[i] * ud[i]);
    }
  } else {
    VectorField const gp = gradient(state.phi);
    VectorField const gpd = gradient(lin.phi_dot);
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i] += (gp[0][i] * gpd[0][i] + gp[1][i] * gpd[1][i] + gp[2][i] * gpd[2][i]) / kFourPi;
    }
  }
  return e;
}

SiteEnergyReport site_energies(GroundState const& state, ScalarField const& m, Partition const& partition,
                               EnergyFlavor flavor) {
  require_partition(partition, state.u.grid(), 0);
  ScalarField const e = energy_density(state, m, flavor);
  SiteEnergyReport r;
  r.flavor = flavor;
  r.energies = weighted_integrals(e, partition.weights);
  r.total = compensated_sum(r.energies);
  r.density_integral = integrate(e);
  r.reference_energy = tfw_energy(state.u, m);
  return r;
}

std::vector<ForceMatrixRow> site_forces_linearised(GroundState const& state, ScalarField const& m,
                                                   NuclearConfig const& config, Partition const& partition,
                                                   std::size_t k, Vec3 const& direction,
                                                   std::vector<EnergyFlavor> const& flavors,
                                                   LinearOptions const& opts) {
  Grid const& grid = state.u.grid();
  if (config.size() == 0) throw EmptyConfiguration("site_forces: configuration has no nuclei");
  require_partition(partition, grid, config.size());
  if (k >= config.size()) throw InvalidArgument("site_forces: nucleus index out of range");

  ScalarField const md = density_derivative(config, grid, k, direction);
  LinearisedSolution const lin = solve_linearised(state, md, opts);
  std::vector<ScalarField> const dphi = partition_derivative(partition, k, direction);
  std::vector<double> const distances = pair_distances(config, k, grid.length());

  std::vector<ForceMatrixRow> rows;
  for (EnergyFlavor flavor : flavors) {
    ScalarField const e = energy_density(state, m, flavor);
    ScalarField const ed = energy_density_derivative(state, m, lin, flavor);
    ForceMatrixRow row{k, direction, std::vector<double>(config.size()), distances, ForceMethod::linearised, 0.0};
    for (std::size_t j = 0; j < config.size(); ++j) {
      row.entries[j] = inner(ed, partition.weights[j]) + inner(e, dphi[j]);
    }
    flush_tiny(row.entries);
    rows.push_back(std::move(row));
  }
  return rows;
}

ForceMatrixRow site_forces(GroundState const& state, ScalarField const& m, NuclearConfig const& config,
                           Partition const& partition, std::size_t k, Vec3 const& direction, EnergyFlavor flavor,
                           ForceMethod method, ForceOptions const& opts) {
  if (method == ForceMethod::linearised) {
    return site_forces_linearised(state, m, config, partition, k, direction, {flavor}, opts.linear).front();
  }
  Grid const& grid = state.u.grid();
  if (config.size() == 0) throw EmptyConfiguration("site_forces: configuration has no nuclei");
  require_partition(partition, grid, config.size());
  if (k >= config.size()) throw InvalidArgument("site_forces: nucleus index out of range");
  if (!(opts.step > 0.0)) throw InvalidArgument("site_forces: central-difference step must be positive");

  SolverOptions solver = opts.solver;
  solver.init = Initialization::supplied;
  solver.initial = state.u;
  auto energies_at = [&](double h) {
    NuclearConfig const moved = perturb(config, k, direction, h, grid.length());
    ScalarField const mh = assemble_density(moved, grid);
    GroundState const sh = solve_ground_state(mh, solver);
    Partition const ph = build_partition(moved, grid, partition.gamma_tilde);
    return site_energies(sh, mh, ph, flavor).energies;
  };
  std::vector<double> const plus = energies_at(opts.step);
  std::vector<double> const minus = energies_at(-opts.step);
  ForceMatrixRow row{k,       direction, std::vector<double>(config.size()), pair_distances(config, k, grid.length()),
                     method, opts.step};
  for (std::size_t j = 0; j < config.size(); ++j) row.entries[j] = (plus[j] - minus[j]) / (2.0 * opts.step);
  flush_tiny(row.entries);
  return row;
}

double total_force(GroundState const& state, NuclearConfig const& config, std::size_t k, Vec3 const& direction) {
  ScalarField const md = density_derivative(config, state.u.grid(), k, direction);
  return inner(state.phi, md);
}

InvarianceReport invariance_suite(NuclearConfig const& config, Grid const& grid, SolverOptions const& opts,
                                  EnergyFlavor flavor, double gamma_tilde) {
  if (config.size() == 0) throw EmptyConfiguration("invariance_suite: configuration has no nuclei");
  double const length = grid.length();
  auto energies_of = [&](NuclearConfig const& c) {
    ScalarField const m = assemble_density(c, grid);
    GroundState const s = solve_ground_state(m, opts);
    return site_energies(s, m, build_partition(c, grid, gamma_tilde), flavor).energies;
  };
  auto max_dev = [](std::vector<double> const& a, std::vector<double> const& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
  };

  InvarianceReport r;
  r.flavor = flavor;
  r.energies = energies_of(config);

  std::size_t const count = config.size();
  NuclearConfig permuted = config;
  std::reverse(permuted.coords.begin(), permuted.coords.end());
  if (!permuted.charges.empty()) std::reverse(permuted.charges.begin(), permuted.charges.end());
  std::vector<double> ep = energies_of(permuted);
  std::reverse(ep.begin(), ep.end());
  r.permutation = max_dev(r.energies, ep);

  NuclearConfig shifted = config;
  for (auto& y : shifted.coords) y = wrap(y + Vec3{grid.spacing(), 0.0, 0.0}, length);
  r.translation = max_dev(r.energies, energies_of(shifted));

  NuclearConfig rotated = config;
  for (std::size_t j = 0; j < count; ++j) {
    Vec3 const& y = config.coords[j];
    rotated.coords[j] = wrap(Vec3{-y[1], y[0], y[2]}, length);
  }
  r.rotation = max_dev(r.energies, energies_of(rotated));
  return r;
}

}  // namespace tfw
