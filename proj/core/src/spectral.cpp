#include "tfw/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

namespace tfw {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// FFTW_ESTIMATE keeps plans (and therefore results) reproducible run to run.
struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<int, int>, fftw_plan> r2c;
  std::map<std::pair<int, int>, fftw_plan> c2r;
  int threads = 1;
  bool threads_ready = false;

  ~PlanCache() {
    for (auto& [key, plan] : r2c) fftw_destroy_plan(plan);
    for (auto& [key, plan] : c2r) fftw_destroy_plan(plan);
  }

  void prepare_threads() {
#ifdef TFW_HAVE_FFTW_THREADS
    if (!threads_ready) {
      fftw_init_threads();
      threads_ready = true;
    }
    fftw_plan_with_nthreads(threads);
#endif
  }

  fftw_plan forward_plan(int n) {
    std::lock_guard lock(mutex);
    auto key = std::make_pair(n, threads);
    if (auto it = r2c.find(key); it != r2c.end()) return it->second;
    prepare_threads();
    std::size_t const nr = static_cast<std::size_t>(n) * n * n;
    std::size_t const nc = static_cast<std::size_t>(n) * n * (n / 2 + 1);
    double* in = fftw_alloc_real(nr);
    fftw_complex* out = fftw_alloc_complex(nc);
    fftw_plan plan = fftw_plan_dft_r2c_3d(n, n, n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    r2c.emplace(key, plan);
    return plan;
  }

  fftw_plan backward_plan(int n) {
    std::lock_guard lock(mutex);
    auto key = std::make_pair(n, threads);
    if (auto it = c2r.find(key); it != c2r.end()) return it->second;
    prepare_threads();
    std::size_t const nr = static_cast<std::size_t>(n) * n * n;
    std::size_t const nc = static_cast<std::size_t>(n) * n * (n / 2 + 1);
    double* out = fftw_alloc_real(nr);
    fftw_complex* in = fftw_alloc_complex(nc);
    fftw_plan plan = fftw_plan_dft_c2r_3d(n, n, n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    c2r.emplace(key, plan);
    return plan;
  }
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

}  // namespace

Spectrum::Spectrum(Grid const& grid)
    : grid_(grid), coeff_(static_cast<std::size_t>(grid.n()) * grid.n() * (grid.n() / 2 + 1)) {}

Spectrum forward(ScalarField const& f) {
  Spectrum s(f.grid());
  fftw_plan plan = plans().forward_plan(f.grid().n());
  // r2c out-of-place leaves the input untouched.
  fftw_execute_dft_r2c(plan, const_cast<double*>(f.data()), reinterpret_cast<fftw_complex*>(s.data()));
  return s;
}

ScalarField backward(Spectrum const& s) {
  Grid const& grid = s.grid();
  ScalarField out(grid);
  // c2r overwrites its input.
  std::vector<std::complex<double>> scratch(s.data(), s.data() + s.size());
  fftw_plan plan = plans().backward_plan(grid.n());
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  double const scale = 1.0 / static_cast<double>(grid.size());
  for (double& v : out.values()) v *= scale;
  return out;
}

ScalarField minus_laplacian(ScalarField const& f) {
  return apply_k2_symbol(f, [](double k2) { return k2; });
}

ScalarField remove_mean(ScalarField const& f) {
  ScalarField out = f;
  double const mu = mean(f);
  for (double& v : out.values()) v -= mu;
  return out;
}

ScalarField inverse_minus_laplacian(ScalarField const& f) {
  return apply_k2_symbol(f, [](double k2) { return k2 > 0.0 ? 1.0 / k2 : 0.0; });
}

ScalarField screened_inverse(ScalarField const& f, double shift) {
  return apply_k2_symbol(f, [shift](double k2) { return 1.0 / (k2 + shift); });
}

void set_fft_threads(int threads) {
  auto& cache = plans();
  std::lock_guard lock(cache.mutex);
  cache.threads = std::max(1, threads);
}

}  // namespace tfw
