#pragma once

// Periodic cubic grid, sampled fields and the spectral operators built on them.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace tfw {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(Vec3 const& a, Vec3 const& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(Vec3 const& a, Vec3 const& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, Vec3 const& a) { return {s * a[0], s * a[1], s * a[2]}; }
double norm(Vec3 const& a);
double dot(Vec3 const& a, Vec3 const& b);

/// Uniform periodic grid on the cube [0, L)^3 with n points per axis.
class Grid {
 public:
  Grid(int n, double length);

  int n() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / n_; }
  double volume() const { return length_ * length_ * length_; }
  double cell_volume() const;
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  // x runs fastest.
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_) * k);
  }
  Vec3 point(int i, int j, int k) const;
  Vec3 point(std::size_t flat) const;

  /// Signed angular wavenumber 2*pi*f/L for FFT bin `bin` (f in [-n/2, n/2)).
  double wavenumber(int bin) const;
  /// Wavenumber used by first derivatives; zero at the Nyquist bin.
  double derivative_wavenumber(int bin) const;

  friend bool operator==(Grid const& a, Grid const& b) { return a.n_ == b.n_ && a.length_ == b.length_; }

 private:
  int n_;
  double length_;
};

Grid make_grid(int n, double length);

/// Real samples of a function on a Grid.
class ScalarField {
 public:
  explicit ScalarField(Grid const& grid, double value = 0.0);
  ScalarField(Grid const& grid, std::vector<double> values);

  Grid const& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<double const> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double const* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  ScalarField& operator+=(ScalarField const& other);
  ScalarField& operator-=(ScalarField const& other);
  ScalarField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, ScalarField const& b);
ScalarField operator-(ScalarField a, ScalarField const& b);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product.
ScalarField multiply(ScalarField const& a, ScalarField const& b);

struct VectorField {
  std::array<ScalarField, 3> component;

  Grid const& grid() const { return component[0].grid(); }
  ScalarField const& operator[](int d) const { return component[d]; }
  ScalarField& operator[](int d) { return component[d]; }
};

/// Pointwise Euclidean magnitude.
ScalarField magnitude(VectorField const& v);
/// Pointwise dot product.
ScalarField dot(VectorField const& a, VectorField const& b);

bool all_finite(ScalarField const& f);
void require_finite(ScalarField const& f, char const* what);

/// Spectral Laplacian, symbol -|k|^2. First derivatives drop the Nyquist bin,
/// so divergence(gradient(f)) differs from laplacian(f) on the Nyquist planes.
ScalarField laplacian(ScalarField const& f);
VectorField gradient(ScalarField const& f);
ScalarField divergence(VectorField const& v);

/// Solves -lap(phi) = 4 pi rho with mean(phi) = 0.
/// Throws NonNeutralSource if |mean(rho)| > neutrality_tol * rms(rho).
ScalarField poisson_solve(ScalarField const& rho, double neutrality_tol = 1e-10);

/// h^3 * sum of values, compensated.
double integrate(ScalarField const& f);
/// h^3 * sum f g, compensated.
double inner(ScalarField const& f, ScalarField const& g);
double l2_norm(ScalarField const& f);
double sup_norm(ScalarField const& f);
double mean(ScalarField const& f);
double rms(ScalarField const& f);
double min_value(ScalarField const& f);
double max_value(ScalarField const& f);

/// Neumaier-compensated sum.
double compensated_sum(std::span<double const> values);

/// Minimum-image displacement y - x on the torus of edge L.
Vec3 min_image(Vec3 const& x, Vec3 const& y, double length);
double min_distance(Vec3 const& x, Vec3 const& y, double length);
/// Reduce a point into [0, L)^3.
Vec3 wrap(Vec3 const& x, double length);

/// Shift a field by an integer number of grid points along each axis:
/// out(p + shift) = f(p).
ScalarField shift_field(ScalarField const& f, std::array<int, 3> const& shift);

}  // namespace tfw
