#include <benchmark/benchmark.h>

#include "biot/assembly.hpp"
#include "biot/bench.hpp"
#include "biot/precond.hpp"
#include "biot/sparse.hpp"

using namespace biot;

namespace {

BlockSystem make_system(int dim, int level) {
  return assemble_biot_system(footing_mesh(dim, level), PhysicalParams{}, 0.01, 0.25);
}

void BM_assembly(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int level = static_cast<int>(state.range(1));
  const Mesh mesh = footing_mesh(dim, level);
  for (auto _ : state) {
    BlockSystem sys = assemble_biot_system(mesh, PhysicalParams{}, 0.01, 0.25);
    benchmark::DoNotOptimize(sys.A_u.values().data());
  }
  state.SetItemsProcessed(state.iterations() * mesh.n_cells());
}

void BM_elasticity_spmv(benchmark::State& state) {
  const BlockSystem sys = make_system(static_cast<int>(state.range(0)),
                                      static_cast<int>(state.range(1)));
  Vector x(static_cast<std::size_t>(sys.n_u), 1.0), y;
  for (auto _ : state) {
    sys.A_u.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sys.A_u.nnz()));
}

void BM_block_operator_apply(benchmark::State& state) {
  const BlockSystem sys = make_system(static_cast<int>(state.range(0)),
                                      static_cast<int>(state.range(1)));
  const BlockOperator op = sys.make_operator(true);
  Vector x(static_cast<std::size_t>(sys.n_total()), 1.0), y;
  for (auto _ : state) {
    op.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_exact_diagonal_apply(benchmark::State& state) {
  const BlockSystem sys = make_system(static_cast<int>(state.range(0)),
                                      static_cast<int>(state.range(1)));
  const Preconditioner pre = build_preconditioner(sys, PreconditionerSpec{});
  Vector r(static_cast<std::size_t>(sys.n_total()), 1.0), z;
  for (auto _ : state) {
    pre.apply(r, z);
    benchmark::DoNotOptimize(z.data());
  }
}

void BM_inexact_upper_apply(benchmark::State& state) {
  const BlockSystem sys = make_system(static_cast<int>(state.range(0)),
                                      static_cast<int>(state.range(1)));
  PreconditionerSpec spec;
  spec.shape = BlockShape::Upper;
  spec.mode = BlockMode::Inexact;
  const Preconditioner pre = build_preconditioner(sys, spec);
  Vector r(static_cast<std::size_t>(sys.n_total()), 1.0), z;
  for (auto _ : state) {
    pre.apply(r, z);
    benchmark::DoNotOptimize(z.data());
  }
}

}  // namespace

BENCHMARK(BM_assembly)->Args({2, 2})->Args({2, 3})->Args({3, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_elasticity_spmv)->Args({2, 4})->Args({3, 2});
BENCHMARK(BM_block_operator_apply)->Args({2, 4})->Args({3, 2});
BENCHMARK(BM_exact_diagonal_apply)->Args({2, 3})->Args({3, 1})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_inexact_upper_apply)->Args({2, 3})->Args({3, 1})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
