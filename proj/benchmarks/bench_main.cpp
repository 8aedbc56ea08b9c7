#include <benchmark/benchmark.h>

#include "synthforge/fractal2d.hpp"
#include "synthforge/geometry.hpp"
#include "synthforge/morphgen.hpp"
#include "synthforge/procgen.hpp"
#include "synthforge/renderer.hpp"

namespace {

using namespace synthforge;

Mesh bench_mesh() {
  ProcGenConfig c;
  c.n = 1;
  c.seed = 3;
  return generate_class_mesh(c, 0).mesh;
}

void BM_Rasterize(benchmark::State& state) {
  const auto mesh = std::make_shared<const Mesh>(bench_mesh());
  RenderJob job = sample_render_plan(1, 1, false)[0];
  job.mesh = mesh;
  job.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(job));
  state.counters["faces"] = static_cast<double>(mesh->faces.size());
}
BENCHMARK(BM_Rasterize)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ChaosGame(benchmark::State& state) {
  IfsSystem s;
  s.maps = {{{0.5, 0.0, 0.0, 0.5}, {0.0, 0.0}}, {{0.5, 0.0, 0.0, 0.5}, {0.5, 0.0}}, {{0.5, 0.0, 0.0, 0.5}, {0.0, 0.5}}};
  s.weights = {0.25, 0.25, 0.5};
  for (auto _ : state) {
    RngStream rng(0, 0);
    benchmark::DoNotOptimize(chaos_game(s, static_cast<std::size_t>(state.range(0)), 256, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ChaosGame)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_CatmullClark(benchmark::State& state) {
  PrimitiveSpec spec;
  spec.kind = PrimitiveKind::torus;
  spec.size_a = 1.0;
  spec.size_b = 0.3;
  const Mesh m = make_primitive(spec);
  for (auto _ : state) benchmark::DoNotOptimize(apply_subdivide(m, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_CatmullClark)->DenseRange(1, 2)->Unit(benchmark::kMillisecond);

void BM_ProcClass(benchmark::State& state) {
  ProcGenConfig c;
  c.n = 1000;
  c.seed = 7;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_class_mesh(c, i++ % c.n));
}
BENCHMARK(BM_ProcClass)->Unit(benchmark::kMillisecond);

void BM_KernelBasis(benchmark::State& state) {
  std::vector<Vec3> pts;
  RngStream rng(1, 0);
  for (int i = 0; i < state.range(0); ++i) pts.push_back({rng.uniform(0, 30), rng.uniform(0, 30), rng.uniform(0, 30)});
  for (auto _ : state) benchmark::DoNotOptimize(kernel_basis(pts, 50.0, 300.0, 50));
}
BENCHMARK(BM_KernelBasis)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
