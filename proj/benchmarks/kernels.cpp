#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "kdg/box.hpp"
#include "kdg/transport.hpp"

using namespace kdg;

namespace {

VelocitySet d3q4() { return builtin_velocity_set("D3Q4", std::sqrt(3.0)); }

KineticField random_kinetic(const Discretization& disc, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  KineticField f(disc.num_velocities(),
                 NodalField(disc.mesh().num_cells(), disc.space().num_nodes(), disc.num_components()));
  for (auto& fk : f)
    for (double& x : fk.values()) x = u(rng);
  return f;
}

void BM_Sweep(benchmark::State& state) {
  const Mesh mesh = make_unit_cube(static_cast<int>(state.range(0)));
  MaxwellModel model;
  Discretization disc(mesh, model, MaterialTable{}, d3q4(), {static_cast<int>(state.range(1)), 0.5, 2.0});
  disc.set_dt(compute_dt(mesh, model, 5.0));
  const KineticField f = random_kinetic(disc, 1);
  NodalField out = f[0];
  const BoundarySpec bc(BoundaryCondition::homogeneous());
  for (auto _ : state) {
    sweep_levels(disc, 0, disc.dag(0).levels, f[0], out, bc, 0.0);
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * mesh.num_cells());
}
BENCHMARK(BM_Sweep)->Args({4, 1})->Args({4, 2})->Args({8, 2})->Unit(benchmark::kMillisecond);

void BM_Relax(benchmark::State& state) {
  const Mesh mesh = make_unit_cube(static_cast<int>(state.range(0)));
  MaxwellModel model;
  Discretization disc(mesh, model, MaterialTable{}, d3q4());
  KineticField f = random_kinetic(disc, 2);
  const NodalField w = macro(f);
  for (auto _ : state) {
    relax(f, w, 2.0 - 1e-12, disc.system());
    benchmark::DoNotOptimize(f[0].values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(w.values().size() / 6));
}
BENCHMARK(BM_Relax)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_Maxwellian(benchmark::State& state) {
  const VelocitySet set = state.range(0) == 0 ? d3q4() : builtin_velocity_set("D2Q3", std::sqrt(3.0));
  MaxwellModel model;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  double w[6], out[24];
  for (double& x : w) x = u(rng);
  for (auto _ : state) {
    maxwellian(set, model, Material{}, w, out);
    benchmark::DoNotOptimize(out);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Maxwellian)->Arg(0)->Arg(1);

void BM_TopoLevels(benchmark::State& state) {
  const Mesh mesh = make_unit_cube(static_cast<int>(state.range(0)));
  const Vec3 v = d3q4().v[0];
  const std::vector<Edge> edges = orient_edges(mesh, v);
  for (auto _ : state) {
    const VelocityDag dag = topo_levels(edges, mesh.num_cells());
    benchmark::DoNotOptimize(dag.levels.data());
  }
  state.SetItemsProcessed(state.iterations() * mesh.num_cells());
}
BENCHMARK(BM_TopoLevels)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
