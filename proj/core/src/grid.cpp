#include "tfw/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tfw/errors.hpp"
#include "tfw/spectral.hpp"

namespace tfw {

double norm(Vec3 const& a) { return std::sqrt(dot(a, a)); }
double dot(Vec3 const& a, Vec3 const& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Grid::Grid(int n, double length) : n_(n), length_(length) {
  if (n < 4) throw InvalidArgument("grid: n must be at least 4, got " + std::to_string(n));
  if (n % 2 != 0) throw InvalidArgument("grid: n must be even, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("grid: L must be positive and finite");
}

double Grid::cell_volume() const {
  double const h = spacing();
  return h * h * h;
}

Vec3 Grid::point(int i, int j, int k) const {
  double const h = spacing();
  return {i * h, j * h, k * h};
}

Vec3 Grid::point(std::size_t flat) const {
  auto const n = static_cast<std::size_t>(n_);
  return point(static_cast<int>(flat % n), static_cast<int>((flat / n) % n), static_cast<int>(flat / (n * n)));
}

double Grid::wavenumber(int bin) const {
  int const f = bin < n_ / 2 ? bin : bin - n_;
  return 2.0 * std::numbers::pi * f / length_;
}

double Grid::derivative_wavenumber(int bin) const { return bin == n_ / 2 ? 0.0 : wavenumber(bin); }

Grid make_grid(int n, double length) { return Grid(n, length); }

ScalarField::ScalarField(Grid const& grid, double value) : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(Grid const& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("field: value count does not match grid");
}

namespace {
void require_same_grid(ScalarField const& a, ScalarField const& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("fields live on different grids");
}
}  // namespace

ScalarField& ScalarField::operator+=(ScalarField const& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(ScalarField const& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, ScalarField const& b) { return a += b; }
ScalarField operator-(ScalarField a, ScalarField const& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField multiply(ScalarField const& a, ScalarField const& b) {
  require_same_grid(a, b);
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

ScalarField magnitude(VectorField const& v) {
  ScalarField out(v.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::sqrt(v[0][i] * v[0][i] + v[1][i] * v[1][i] + v[2][i] * v[2][i]);
  }
  return out;
}

ScalarField dot(VectorField const& a, VectorField const& b) {
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[0][i] * b[0][i] + a[1][i] * b[1][i] + a[2][i] * b[2][i];
  return out;
}

bool all_finite(ScalarField const& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double v) { return std::isfinite(v); });
}

void require_finite(ScalarField const& f, char const* what) {
  if (!all_finite(f)) throw NonFiniteField(std::string(what) + ": field contains NaN or Inf");
}

ScalarField laplacian(ScalarField const& f) {
  require_finite(f, "laplacian");
  return apply_k2_symbol(f, [](double k2) { return -k2; });
}

VectorField gradient(ScalarField const& f) {
  require_finite(f, "gradient");
  Spectrum const s = forward(f);
  auto component = [&](int axis) {
    Spectrum d = s;
    d.multiply([axis](double kx, double ky, double kz) {
      double const k = axis == 0 ? kx : (axis == 1 ? ky : kz);
      return std::complex<double>(0.0, k);
    });
    return backward(d);
  };
  return VectorField{{component(0), component(1), component(2)}};
}

ScalarField divergence(VectorField const& v) {
  Spectrum total(v.grid());
  for (int axis = 0; axis < 3; ++axis) {
    Spectrum d = forward(v[axis]);
    d.multiply([axis](double kx, double ky, double kz) {
      double const k = axis == 0 ? kx : (axis == 1 ? ky : kz);
      return std::complex<double>(0.0, k);
    });
    for (std::size_t i = 0; i < d.size(); ++i) total.data()[i] += d.data()[i];
  }
  return backward(total);
}

ScalarField poisson_solve(ScalarField const& rho, double neutrality_tol) {
  require_finite(rho, "poisson_solve");
  double const m = mean(rho);
  double const r = rms(rho);
  if (std::abs(m) > neutrality_tol * r) {
    throw NonNeutralSource("poisson_solve: source mean " + std::to_string(m) + " exceeds neutrality tolerance (rms " +
                           std::to_string(r) + ")");
  }
  ScalarField phi = inverse_minus_laplacian(rho);
  phi *= 4.0 * std::numbers::pi;
  return phi;
}

double compensated_sum(std::span<double const> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    double const t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

double integrate(ScalarField const& f) { return f.grid().cell_volume() * compensated_sum(f.values()); }

double inner(ScalarField const& f, ScalarField const& g) {
  require_same_grid(f, g);
  double sum = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double const v = f[i] * g[i];
    double const t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return f.grid().cell_volume() * (sum + c);
}

double l2_norm(ScalarField const& f) { return std::sqrt(inner(f, f)); }

double sup_norm(ScalarField const& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double mean(ScalarField const& f) { return compensated_sum(f.values()) / static_cast<double>(f.size()); }

double rms(ScalarField const& f) { return std::sqrt(inner(f, f) / f.grid().volume()); }

double min_value(ScalarField const& f) { return *std::min_element(f.values().begin(), f.values().end()); }
double max_value(ScalarField const& f) { return *std::max_element(f.values().begin(), f.values().end()); }

Vec3 min_image(Vec3 const& x, Vec3 const& y, double length) {
  Vec3 d = y - x;
  for (double& c : d) c -= length * std::round(c / length);
  return d;
}

double min_distance(Vec3 const& x, Vec3 const& y, double length) { return norm(min_image(x, y, length)); }

Vec3 wrap(Vec3 const& x, double length) {
  Vec3 out = x;
  for (double& c : out) {
    c = std::fmod(c, length);
    if (c < 0.0) c += length;
    if (c >= length) c = 0.0;
  }
  return out;
}

ScalarField shift_field(ScalarField const& f, std::array<int, 3> const& shift) {
  Grid const& g = f.grid();
  int const n = g.n();
  auto wrap_index = [n](int i) { return ((i % n) + n) % n; };
  ScalarField out(g);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        out[g.index(wrap_index(i + shift[0]), wrap_index(j + shift[1]), wrap_index(k + shift[2]))] = f[g.index(i, j, k)];
      }
    }
  }
  return out;
}

}  // namespace tfw
