#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "tfw/grid.hpp"
#include "tfw/nuclei.hpp"

namespace tfw::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline ScalarField sample(Grid const& grid, std::function<double(Vec3 const&)> const& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.point(i));
  return out;
}

/// Smooth random field made of the Fourier modes with |frequency| <= kmax per axis.
inline ScalarField band_limited(Grid const& grid, std::uint64_t seed, int kmax = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> coef;
  ScalarField out(grid);
  double const L = grid.length();
  for (int a = -kmax; a <= kmax; ++a) {
    for (int b = -kmax; b <= kmax; ++b) {
      for (int c = 0; c <= kmax; ++c) {
        double const ca = coef(rng);
        double const cb = coef(rng);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          Vec3 const p = grid.point(i);
          double const arg = kTwoPi * (a * p[0] + b * p[1] + c * p[2]) / L;
          out[i] += ca * std::cos(arg) + cb * std::sin(arg);
        }
      }
    }
  }
  return out;
}

inline ScalarField white_noise(Grid const& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  ScalarField f(grid);
  for (double& v : f.values()) v = dist(rng);
  return f;
}

inline double max_abs_diff(ScalarField const& a, ScalarField const& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

/// Simple-cubic lattice of `cells`^3 unit nuclei, sites at (i + 1/2) a.
inline NuclearConfig centred_lattice(int cells, double length, double radius = 1.0) {
  double const origin = 0.5 * length / cells;
  return make_config(cubic_lattice(cells, length, {origin, origin, origin}), NucleusShape{radius}, 0.0, length);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(std::string const& name) {
  auto const dir = std::filesystem::temp_directory_path() / ("tfw-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tfw::testing
