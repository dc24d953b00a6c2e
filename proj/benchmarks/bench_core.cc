// Copyright 2026 The blockpost Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "blockpost/divergence.h"
#include "blockpost/harness.h"
#include "blockpost/posterior.h"
#include "blockpost/rate.h"
#include "blockpost/sampling.h"

namespace blockpost {
namespace {

ModelSpec AsymmetricSbm() {
  return ModelSpec(ModelVariant::Sbm(false, false), {0.5, 0.5}, {},
                   ConnectivityMatrix(2, 2, {Param{0.8}, Param{0.2}, Param{0.2}, Param{0.2}}),
                   Family::Bernoulli(0.1));
}

void BM_ExactPosterior(benchmark::State& state) {
  const ModelSpec spec = AsymmetricSbm();
  const int n = static_cast<int>(state.range(0));
  const Configuration c = SampleConfiguration(spec, n, n, 1);
  const ObservationMatrix x = SampleObservations(spec, c, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ExactPosterior(x, spec).log_normalizer());
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_ExactPosterior)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_IcmMap(benchmark::State& state) {
  const ModelSpec spec = AsymmetricSbm();
  const int n = static_cast<int>(state.range(0));
  const Configuration truth = SampleConfiguration(spec, n, n, 3);
  const ObservationMatrix x = SampleObservations(spec, truth, 4);
  const LogDensityTable table(x, spec.pi(), spec.family());
  const std::vector<Configuration> starts{SampleConfiguration(spec, n, n, 5)};
  for (auto _ : state) benchmark::DoNotOptimize(IcmMap(table, spec, starts));
}
BENCHMARK(BM_IcmMap)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_KlGaussScale(benchmark::State& state) {
  const Family f = Family::GaussScale(0.0, 0.5, 3.0);
  double p = 0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(KlDivergence(f, Param{p}, Param{2.1}));
    p = p < 2.9 ? p + 1e-3 : 0.7;
  }
}
BENCHMARK(BM_KlGaussScale);

void BM_ExactChernoffRate(benchmark::State& state) {
  const Family f = Family::Poisson(0.5, 6.0);
  for (auto _ : state) benchmark::DoNotOptimize(ExactChernoffRate(f, 0.5, 0.3));
}
BENCHMARK(BM_ExactChernoffRate)->Unit(benchmark::kMicrosecond);

void BM_SampleObservations(benchmark::State& state) {
  const ModelSpec spec = AsymmetricSbm();
  const Configuration c = SampleConfiguration(spec, 256, 256, 1);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(SampleObservations(spec, c, ++seed));
}
BENCHMARK(BM_SampleObservations)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace blockpost

BENCHMARK_MAIN();
