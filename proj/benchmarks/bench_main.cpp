// Microbenchmarks for the library's hot paths. Sizes mirror the default
// replication settings so regressions here translate directly into longer
// benchmark-suite wall times.
#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "cpce/bench.hpp"
#include "cpce/estimators.hpp"
#include "cpce/identification.hpp"
#include "cpce/learners.hpp"
#include "cpce/rng.hpp"
#include "cpce/sim.hpp"

namespace {

using namespace cpce;

SampleTable MakeSample(Index n, std::uint64_t seed) {
  DgpSpec spec;
  spec.name = DgpName::kStudy1;
  spec.scenario = 1;
  spec.n = n;
  spec.seed = seed;
  return Generate(spec);
}

void BM_GenerateSample(benchmark::State& state) {
  const Index n = state.range(0);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(MakeSample(n, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_GenerateSample)->Arg(1000)->Arg(4000);

void BM_FitLogisticLinear(benchmark::State& state) {
  const Index n = state.range(0);
  const SampleTable table = MakeSample(n, 7);
  ProbModelConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitLogistic(table.x, table.z, cfg));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FitLogisticLinear)->Arg(1000)->Arg(4000)->Arg(16000);

void BM_FitLogisticSpline(benchmark::State& state) {
  const Index n = state.range(0);
  const SampleTable table = MakeSample(n, 7);
  ProbModelConfig cfg;
  cfg.kind = ProbModelKind::kLogisticAdditiveSpline;
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitLogistic(table.x, table.z, cfg));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FitLogisticSpline)->Arg(1000)->Arg(4000);

void BM_FitAdditiveSpline(benchmark::State& state) {
  const Index n = state.range(0);
  const SampleTable table = MakeSample(n, 7);
  SmootherConfig cfg;
  cfg.kind = SmootherKind::kAdditiveSpline;
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitSmoother(table.x, table.y, cfg));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FitAdditiveSpline)->Arg(1000)->Arg(4000);

void BM_LocalLinearWeights(benchmark::State& state) {
  const Index n = state.range(0);
  const SampleTable table = MakeSample(n, 7);
  SmootherConfig cfg;
  cfg.kind = SmootherKind::kLocalLinear;
  const Smoother fit = FitSmoother(table.x, table.y, cfg);
  const Eigen::RowVectorXd q = Eigen::RowVectorXd::Constant(4, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit.WeightsAt(q));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LocalLinearWeights)->Arg(1000)->Arg(4000);

void BM_PseudoOutcomeRow(benchmark::State& state) {
  // Per-row identification math: influence pieces plus both pseudo-outcome
  // constructions at a fixed nuisance point.
  const PointNuisanceValues v{0.55, 0.7, 0.35, 1.8, -0.6, 0.9, 0.4};
  const double pi_s = SubsetPropensity(v.pi, v.p1, v.p0, Stratum::k10);
  Rng rng(3);
  for (auto _ : state) {
    const int z = rng.Bernoulli(v.pi) ? 1 : 0;
    const int s = rng.Bernoulli(z == 1 ? v.p1 : v.p0) ? 1 : 0;
    const double y = 0.5 + 0.3 * rng.Normal();
    const EifParts parts = EifComponentsAt(Stratum::k10, v, z, s, y);
    benchmark::DoNotOptimize(parts);
    double one = OneStepPseudoAt(Stratum::k10, v, z, s, y, 0.0, 1e-12);
    benchmark::DoNotOptimize(one);
    if (InSubset(Stratum::k10, z, s)) {
      double sub = SubsetPseudoAt(Stratum::k10, v, pi_s, z, y);
      benchmark::DoNotOptimize(sub);
    }
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PseudoOutcomeRow);

void BM_EstimateSubsetParametric(benchmark::State& state) {
  const Index n = state.range(0);
  const SampleTable table = MakeSample(n, 7);
  EstimatorConfig cfg = PresetEstimatorConfig(
      DgpName::kStudy1, EstimatorKind::kSubsetDr, Stratum::k10);
  cfg.seed = 11;
  const Eigen::MatrixXd queries =
      SampleCovariates(DgpName::kStudy1, 200, 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Estimate(table, queries, cfg));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EstimateSubsetParametric)->Arg(1000)->Arg(4000);

void BM_EstimateSubsetSpline(benchmark::State& state) {
  const Index n = state.range(0);
  DgpSpec spec;
  spec.name = DgpName::kStudy2;
  spec.n = n;
  spec.seed = 7;
  const SampleTable table = Generate(spec);
  EstimatorConfig cfg = PresetEstimatorConfig(
      DgpName::kStudy2, EstimatorKind::kSubsetDr, Stratum::k10);
  cfg.seed = 11;
  const Eigen::MatrixXd queries = SampleCovariates(DgpName::kStudy2, 200, 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Estimate(table, queries, cfg));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EstimateSubsetSpline)->Arg(1000)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
