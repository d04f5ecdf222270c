#pragma once

// Half-complex Fourier representation of real fields (FFTW r2c layout).

#include <complex>
#include <vector>

#include "tfw/grid.hpp"

namespace tfw {

class Spectrum {
 public:
  explicit Spectrum(Grid const& grid);

  Grid const& grid() const { return grid_; }
  int nx_half() const { return grid_.n() / 2 + 1; }
  std::size_t size() const { return coeff_.size(); }
  std::complex<double>* data() { return coeff_.data(); }
  std::complex<double> const* data() const { return coeff_.data(); }
  std::complex<double>& at(int bx, int by, int bz) { return coeff_[flat(bx, by, bz)]; }
  std::complex<double> const& at(int bx, int by, int bz) const { return coeff_[flat(bx, by, bz)]; }

  // Row-major (z, y, x) with x halved.
  std::size_t flat(int bx, int by, int bz) const {
    return static_cast<std::size_t>(bx) + static_cast<std::size_t>(nx_half()) * (static_cast<std::size_t>(by) + static_cast<std::size_t>(grid_.n()) * bz);
  }

  /// Multiply every coefficient by fn(|k|^2), with the Nyquist wavenumber kept.
  template <class Fn>
  void multiply_k2(Fn&& fn) {
    int const n = grid_.n();
    for (int bz = 0; bz < n; ++bz) {
      double const kz = grid_.wavenumber(bz);
      for (int by = 0; by < n; ++by) {
        double const ky = grid_.wavenumber(by);
        double const kyz = ky * ky + kz * kz;
        std::complex<double>* row = coeff_.data() + flat(0, by, bz);
        for (int bx = 0; bx < nx_half(); ++bx) {
          double const kx = grid_.wavenumber(bx);
          row[bx] *= fn(kx * kx + kyz);
        }
      }
    }
  }

  /// Multiply every coefficient by symbol(kx, ky, kz), the derivative wavenumbers.
  template <class Symbol>
  void multiply(Symbol&& symbol) {
    int const n = grid_.n();
    for (int bz = 0; bz < n; ++bz) {
      double const kz = grid_.derivative_wavenumber(bz);
      for (int by = 0; by < n; ++by) {
        double const ky = grid_.derivative_wavenumber(by);
        std::complex<double>* row = coeff_.data() + flat(0, by, bz);
        for (int bx = 0; bx < nx_half(); ++bx) {
          row[bx] *= symbol(grid_.derivative_wavenumber(bx), ky, kz);
        }
      }
    }
  }

 private:
  Grid grid_;
  std::vector<std::complex<double>> coeff_;
};

/// Unnormalised forward transform.
Spectrum forward(ScalarField const& f);
/// Inverse transform including the 1/n^3 normalisation.
ScalarField backward(Spectrum const& s);

/// Returns the field with Fourier symbol applied: F^-1[symbol(k) F[f]].
template <class Symbol>
ScalarField apply_symbol(ScalarField const& f, Symbol&& symbol) {
  Spectrum s = forward(f);
  s.multiply(symbol);
  return backward(s);
}

/// Returns F^-1[fn(|k|^2) F[f]].
template <class Fn>
ScalarField apply_k2_symbol(ScalarField const& f, Fn&& fn) {
  Spectrum s = forward(f);
  s.multiply_k2(fn);
  return backward(s);
}

/// -lap f with symbol |k|^2, including the Nyquist wavenumber.
ScalarField minus_laplacian(ScalarField const& f);
/// f with its cell mean removed (the projection onto the range of the Laplacian).
ScalarField remove_mean(ScalarField const& f);

/// Pseudo-inverse of -lap: zero on the mean.
ScalarField inverse_minus_laplacian(ScalarField const& f);
/// (-lap + shift)^-1 with shift > 0.
ScalarField screened_inverse(ScalarField const& f, double shift);

/// Number of FFTW threads used for subsequent plans (>= 1).
void set_fft_threads(int threads);

}  // namespace tfw
