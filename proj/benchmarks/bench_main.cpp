#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "pfml/local_likelihood.hpp"
#include "pfml/models.hpp"
#include "pfml/particle_filter.hpp"
#include "pfml/simulate.hpp"

namespace {

using namespace pfml;

// Example 1 data shared by every benchmark; T = 100 as in the replication.
const Dataset& example1_data() {
  static const Dataset data =
      simulate(*make_example1(), Example1Model::true_params(), 100, RngStream(1, 1));
  return data;
}

void BM_FrozenBootstrap(benchmark::State& state) {
  const auto model = make_example1();
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t stream = 0;
  for (auto _ : state) {
    auto sys = run_frozen_bootstrap(*model, Example1Model::true_params(), n, example1_data(),
                                    RngStream(2, stream++));
    benchmark::DoNotOptimize(sys.online_loglik());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 100));
}
BENCHMARK(BM_FrozenBootstrap)->Arg(100)->Arg(1000);

void BM_SurfaceBuild(benchmark::State& state) {
  const auto model = make_example1();
  auto sys = std::make_shared<const ParticleSystem>(run_frozen_bootstrap(
      *model, Example1Model::true_params(), static_cast<std::size_t>(state.range(0)),
      example1_data(), RngStream(3, 0)));
  for (auto _ : state) {
    LocalLikelihoodSurface surface(sys, model, example1_data());
    benchmark::DoNotOptimize(&surface);
  }
}
BENCHMARK(BM_SurfaceBuild)->Arg(100)->Arg(1000);

void BM_SurfaceEval(benchmark::State& state) {
  const auto model = make_example1();
  const auto n = static_cast<std::size_t>(state.range(0));
  auto sys = std::make_shared<const ParticleSystem>(
      run_frozen_bootstrap(*model, Example1Model::true_params(), n, example1_data(), RngStream(4, 0)));
  const LocalLikelihoodSurface surface(sys, model, example1_data());
  const ParamVector theta = Example1Model::true_params().with_values({24.0, 0.35});
  for (auto _ : state) benchmark::DoNotOptimize(surface.loglik(theta));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 100));
}
BENCHMARK(BM_SurfaceEval)->Arg(100)->Arg(1000);

void BM_CategoricalResample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream init(5, 0);
  std::vector<double> w(n);
  for (double& v : w) v = init.uniform();
  RngStream rng(5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(categorical_resample(w, n, rng, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_CategoricalResample)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
