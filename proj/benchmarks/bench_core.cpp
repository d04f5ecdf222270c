#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "tfw/field_io.hpp"
#include "tfw/grid.hpp"
#include "tfw/ground_state.hpp"
#include "tfw/linear_response.hpp"
#include "tfw/nuclei.hpp"
#include "tfw/site_energy.hpp"

namespace {

tfw::ScalarField random_field(tfw::Grid const& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  tfw::ScalarField f(grid);
  for (double& v : f.values()) v = dist(rng);
  return f;
}

tfw::NuclearConfig lattice(double length, int cells) {
  double const origin = 0.5 * length / cells;
  return tfw::make_config(tfw::cubic_lattice(cells, length, {origin, origin, origin}), tfw::NucleusShape{1.0}, 0.0,
                          length);
}

void BM_Laplacian(benchmark::State& state) {
  tfw::Grid const grid(static_cast<int>(state.range(0)), 12.8);
  auto const f = random_field(grid, 1);
  for (auto _ : state) benchmark::DoNotOptimize(tfw::laplacian(f));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_Laplacian)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PoissonSolve(benchmark::State& state) {
  tfw::Grid const grid(static_cast<int>(state.range(0)), 12.8);
  auto rho = random_field(grid, 2);
  double const m = tfw::mean(rho);
  for (double& v : rho.values()) v -= m;
  for (auto _ : state) benchmark::DoNotOptimize(tfw::poisson_solve(rho));
}
BENCHMARK(BM_PoissonSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
  tfw::Grid const grid(64, 12.8);
  auto const f = random_field(grid, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tfw::gradient(f));
}
BENCHMARK(BM_Gradient)->Unit(benchmark::kMillisecond);

void BM_AssembleDensity(benchmark::State& state) {
  tfw::Grid const grid(64, 12.8);
  auto const config = lattice(12.8, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tfw::assemble_density(config, grid));
}
BENCHMARK(BM_AssembleDensity)->Unit(benchmark::kMillisecond);

void BM_GroundState(benchmark::State& state) {
  tfw::Grid const grid(static_cast<int>(state.range(0)), 8.0);
  auto const m = tfw::assemble_density(lattice(8.0, 2), grid);
  tfw::SolverOptions opts;
  opts.tol = 1e-10;
  for (auto _ : state) benchmark::DoNotOptimize(tfw::solve_ground_state(m, opts));
}
BENCHMARK(BM_GroundState)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_LinearisedSolve(benchmark::State& state) {
  tfw::Grid const grid(32, 8.0);
  auto const config = lattice(8.0, 2);
  auto const m = tfw::assemble_density(config, grid);
  auto const ground = tfw::solve_ground_state(m);
  auto const mdot = tfw::density_derivative(config, grid, 0, {1.0, 0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(tfw::solve_linearised(ground, mdot));
}
BENCHMARK(BM_LinearisedSolve)->Unit(benchmark::kMillisecond);

void BM_Partition(benchmark::State& state) {
  tfw::Grid const grid(64, 12.8);
  auto const config = lattice(12.8, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tfw::build_partition(config, grid));
}
BENCHMARK(BM_Partition)->Unit(benchmark::kMillisecond);

void BM_EncodeField(benchmark::State& state) {
  tfw::Grid const grid(64, 12.8);
  auto const f = random_field(grid, 4);
  for (auto _ : state) benchmark::DoNotOptimize(tfw::encode_field(f));
}
BENCHMARK(BM_EncodeField)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
