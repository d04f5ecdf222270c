#include "tfw/nuclei.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "tfw/errors.hpp"

namespace tfw {

double NucleusShape::profile(double r) const {
  double const s = r / radius;
  if (s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

double NucleusShape::profile_derivative(double r) const {
  double const s = r / radius;
  if (s >= 1.0) return 0.0;
  double const q = 1.0 - s * s;
  return profile(r) * (-2.0 * s / (q * q)) / radius;
}

double NucleusShape::normalization() const {
  // Composite Simpson on [0, R0]; the integrand is flat at both ends.
  int const panels = 4000;
  double const dr = radius / panels;
  double sum = 0.0;
  for (int i = 0; i <= panels; ++i) {
    double const r = i * dr;
    double const w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * r * r * profile(r);
  }
  double const integral = 4.0 * std::numbers::pi * sum * dr / 3.0;
  return 1.0 / integral;
}

double NuclearConfig::total_nuclear_charge() const {
  double q = 0.0;
  for (std::size_t j = 0; j < size(); ++j) q += charge(j);
  return q;
}

NuclearConfig make_config(std::vector<Vec3> coords, NucleusShape shape, double background, double length,
                          std::vector<double> charges) {
  if (!(shape.radius > 0.0)) throw InvalidArgument("nuclei: R0 must be positive");
  if (background < 0.0) throw InvalidArgument("nuclei: background density must be non-negative");
  if (!charges.empty() && charges.size() != coords.size()) {
    throw InvalidArgument("nuclei: charges list must match the coordinate list");
  }
  for (double q : charges) {
    if (!(q >= 0.0)) throw InvalidArgument("nuclei: charges must be non-negative");
  }
  for (auto& y : coords) y = wrap(y, length);
  return NuclearConfig{std::move(coords), shape, background, std::move(charges)};
}

std::vector<Vec3> cubic_lattice(int cells, double length, Vec3 const& origin) {
  if (cells < 1) throw InvalidArgument("cubic_lattice: need at least one cell per axis");
  double const a = length / cells;
  std::vector<Vec3> sites;
  sites.reserve(static_cast<std::size_t>(cells) * cells * cells);
  for (int k = 0; k < cells; ++k) {
    for (int j = 0; j < cells; ++j) {
      for (int i = 0; i < cells; ++i) sites.push_back(wrap(origin + Vec3{i * a, j * a, k * a}, length));
    }
  }
  return sites;
}

namespace {

void require_shape_fits(NucleusShape const& shape, Grid const& grid) {
  if (shape.radius >= 0.5 * grid.length()) {
    throw ShapeTooWide("nuclei: R0 = " + std::to_string(shape.radius) + " must be below L/2 = " +
                       std::to_string(0.5 * grid.length()));
  }
}

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

// Visits every grid point within `radius` of `center` once, with the unwrapped
// displacement point - center. Requires radius < L/2.
template <class Visit>
void for_each_in_support(Grid const& grid, Vec3 const& center, double radius, Visit&& visit) {
  double const h = grid.spacing();
  int const n = grid.n();
  int lo[3];
  int hi[3];
  for (int d = 0; d < 3; ++d) {
    lo[d] = static_cast<int>(std::ceil((center[d] - radius) / h));
    hi[d] = static_cast<int>(std::floor((center[d] + radius) / h));
    if (hi[d] - lo[d] + 1 > n) hi[d] = lo[d] + n - 1;
  }
  for (int k = lo[2]; k <= hi[2]; ++k) {
    double const dz = k * h - center[2];
    for (int j = lo[1]; j <= hi[1]; ++j) {
      double const dy = j * h - center[1];
      for (int i = lo[0]; i <= hi[0]; ++i) {
        double const dx = i * h - center[0];
        Vec3 const d{dx, dy, dz};
        double const r = norm(d);
        if (r < radius) visit(grid.index(wrap_index(i, n), wrap_index(j, n), wrap_index(k, n)), d, r);
      }
    }
  }
}

struct Footprint {
  std::vector<std::size_t> index;
  std::vector<Vec3> displacement;
  std::vector<double> weight;
  double sum = 0.0;  // compensated sum of weights
};

Footprint footprint(Grid const& grid, Vec3 const& center, NucleusShape const& shape) {
  Footprint fp;
  for_each_in_support(grid, center, shape.radius, [&](std::size_t idx, Vec3 const& d, double r) {
    fp.index.push_back(idx);
    fp.displacement.push_back(d);
    fp.weight.push_back(shape.profile(r));
  });
  fp.sum = compensated_sum(fp.weight);
  return fp;
}

// Canonical order: lexicographic in (x, y, z, charge).
std::vector<std::size_t> canonical_order(NuclearConfig const& config) {
  std::vector<std::size_t> order(config.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto const& ya = config.coords[a];
    auto const& yb = config.coords[b];
    if (ya != yb) return ya < yb;
    return config.charge(a) < config.charge(b);
  });
  return order;
}

// Separable [1/4, 1/2, 1/4] filter. Its symbol cos^2(k h / 2) vanishes on the
// Nyquist planes, where first derivatives are blind; the kernel is
// non-negative and sums to one, so positivity and charge are kept.
void binomial_filter(ScalarField& f) {
  Grid const& grid = f.grid();
  int const n = grid.n();
  std::vector<double> line(n);
  for (int axis = 0; axis < 3; ++axis) {
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a < n; ++a) {
        auto at = [&](int t) -> double& {
          if (axis == 0) return f[grid.index(t, a, b)];
          if (axis == 1) return f[grid.index(a, t, b)];
          return f[grid.index(a, b, t)];
        };
        for (int t = 0; t < n; ++t) line[t] = at(t);
        for (int t = 0; t < n; ++t) {
          at(t) = 0.25 * line[(t + n - 1) % n] + 0.5 * line[t] + 0.25 * line[(t + 1) % n];
        }
      }
    }
  }
}

}  // namespace

ScalarField assemble_density(NuclearConfig const& config, Grid const& grid) {
  require_shape_fits(config.shape, grid);
  ScalarField m(grid);
  double const inv_h3 = 1.0 / grid.cell_volume();
  for (std::size_t j : canonical_order(config)) {
    double const q = config.charge(j);
    if (q == 0.0) continue;
    Footprint const fp = footprint(grid, wrap(config.coords[j], grid.length()), config.shape);
    if (fp.sum <= 0.0) throw InvalidArgument("nuclei: R0 too small to be resolved by the grid");
    double const scale = q * inv_h3 / fp.sum;
    for (std::size_t p = 0; p < fp.index.size(); ++p) m[fp.index[p]] += scale * fp.weight[p];
  }
  binomial_filter(m);
  if (config.background != 0.0) {
    for (double& v : m.values()) v += config.background;
  }
  return m;
}

ScalarField nucleus_density(Vec3 const& position, NucleusShape const& shape, Grid const& grid) {
  NuclearConfig single{{position}, shape, 0.0, {}};
  return assemble_density(single, grid);
}

ScalarField density_derivative(NuclearConfig const& config, Grid const& grid, std::size_t k, Vec3 const& direction) {
  require_shape_fits(config.shape, grid);
  if (k >= config.size()) throw InvalidArgument("density_derivative: nucleus index out of range");
  ScalarField mdot(grid);
  double const q = config.charge(k);
  if (q == 0.0) return mdot;
  Footprint const fp = footprint(grid, wrap(config.coords[k], grid.length()), config.shape);
  // d/dY [b(x - Y) V] = -grad b . V
  std::vector<double> db(fp.index.size());
  for (std::size_t p = 0; p < fp.index.size(); ++p) {
    double const r = norm(fp.displacement[p]);
    db[p] = r > 0.0 ? -config.shape.profile_derivative(r) * dot(fp.displacement[p], direction) / r : 0.0;
  }
  double const dsum = compensated_sum(db);
  double const scale = q / (grid.cell_volume() * fp.sum);
  for (std::size_t p = 0; p < fp.index.size(); ++p) {
    mdot[fp.index[p]] += scale * (db[p] - fp.weight[p] * dsum / fp.sum);
  }
  binomial_filter(mdot);
  return mdot;
}

NuclearConfig perturb(NuclearConfig const& config, std::size_t k, Vec3 const& direction, double step, double length) {
  if (k >= config.size()) throw InvalidArgument("perturb: nucleus index out of range");
  Vec3 const shift = step * direction;
  if (norm(shift) >= 0.5 * length) throw InvalidArgument("perturb: |h V| must be below L/2");
  NuclearConfig out = config;
  out.coords[k] = wrap(config.coords[k] + shift, length);
  return out;
}

double ball_integral(ScalarField const& f, Vec3 const& center, double radius) {
  Grid const& grid = f.grid();
  double const h = grid.spacing();
  int const n = grid.n();
  double const outer = radius + 0.5 * h;
  int lo[3];
  int hi[3];
  for (int d = 0; d < 3; ++d) {
    lo[d] = static_cast<int>(std::ceil((center[d] - outer) / h));
    hi[d] = static_cast<int>(std::floor((center[d] + outer) / h));
    if (hi[d] - lo[d] + 1 > n) {
      lo[d] = 0;
      hi[d] = n - 1;
    }
  }
  std::vector<double> terms;
  for (int k = lo[2]; k <= hi[2]; ++k) {
    for (int j = lo[1]; j <= hi[1]; ++j) {
      for (int i = lo[0]; i <= hi[0]; ++i) {
        int const wi = wrap_index(i, n);
        int const wj = wrap_index(j, n);
        int const wk = wrap_index(k, n);
        double const r = min_distance(center, grid.point(wi, wj, wk), grid.length());
        double const w = std::clamp((radius - r) / h + 0.5, 0.0, 1.0);
        if (w > 0.0) terms.push_back(w * f[grid.index(wi, wj, wk)]);
      }
    }
  }
  return grid.cell_volume() * compensated_sum(terms);
}

AdmissibilityReport admissibility(NuclearConfig const& config, Grid const& grid, int sample_centers,
                                  std::vector<double> const& radii, std::uint64_t seed) {
  if (sample_centers < 1) throw InvalidArgument("admissibility: need at least one sample centre");
  for (double r : radii) {
    if (!(r > 0.0) || r > 0.5 * grid.length()) throw InvalidArgument("admissibility: radii must lie in (0, L/2]");
  }
  std::vector<double> sorted = radii;
  std::sort(sorted.begin(), sorted.end());

  ScalarField const m = assemble_density(config, grid);
  ScalarField const m2 = multiply(m, m);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, grid.length());

  AdmissibilityReport report;
  report.radii = sorted;
  report.omega_table.assign(sorted.size(), std::numeric_limits<double>::infinity());
  double const unit_ball = std::min(1.0, 0.5 * grid.length());
  for (int s = 0; s < sample_centers; ++s) {
    Vec3 const c{coord(rng), coord(rng), coord(rng)};
    report.m_estimate = std::max(report.m_estimate, std::sqrt(std::max(0.0, ball_integral(m2, c, unit_ball))));
    for (std::size_t r = 0; r < sorted.size(); ++r) {
      report.omega_table[r] = std::min(report.omega_table[r], ball_integral(m, c, sorted[r]));
    }
  }
  // Weights are monotone in R, so each centre's curve is too; enforce it against rounding.
  for (std::size_t r = 1; r < sorted.size(); ++r) {
    report.omega_table[r] = std::max(report.omega_table[r], report.omega_table[r - 1]);
  }
  return report;
}

}  // namespace tfw
