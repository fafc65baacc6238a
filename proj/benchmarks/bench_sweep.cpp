#include <benchmark/benchmark.h>

#include "jointmap/mcmc.hpp"
#include "jointmap/model.hpp"
#include "jointmap/simulate.hpp"

using namespace jointmap;

namespace {

struct Problem {
  ModelSpec spec;
  AdjacencyGraph graph;
  StructureMatrix spatial;
  StructureMatrix temporal;
  CancerDataset data;
  HyperParameters hyper;
  ParameterState truth;
};

Problem make_problem(Variant v, std::size_t areas) {
  Rng rng(splitmix64(areas));
  const Dims d{areas, 5, 3};
  const ComponentMap map({"c0", "c1"}, {{true, true, true}, {false, true, true}});
  ModelSpec spec(v, map, d);
  auto g = random_connected_graph(areas, 0.2, rng);
  auto truth = draw_true_state(spec, rng, 0.3);
  SimulationRecipe recipe{spec, truth, Expected(d, 200.0), rng(), g.labels(), {}, {}};
  auto data = simulate_dataset(recipe);
  auto q = structure_matrix(g);
  return Problem{spec, std::move(g), std::move(q), rw1_structure(5), std::move(data),
                 HyperParameters::defaults(3), std::move(truth)};
}

void BM_Sweep(benchmark::State& st, Variant v) {
  const auto p = make_problem(v, static_cast<std::size_t>(st.range(0)));
  McmcConfig config;
  Sampler sampler(p.data, p.spec, p.hyper, p.spatial, p.temporal, config, p.truth);
  Rng rng(1);
  for (auto _ : st) sampler.sweep(rng);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(p.spec.dims().cells()));
}

void BM_LogPosterior(benchmark::State& st) {
  const auto p = make_problem(Variant::D, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    benchmark::DoNotOptimize(log_posterior(p.data, p.truth, p.spec, p.hyper, p.spatial, p.temporal));
  }
}

void BM_CarLogpdf(benchmark::State& st) {
  const auto p = make_problem(Variant::A, static_cast<std::size_t>(st.range(0)));
  const Eigen::VectorXd x = p.truth.lambda.row(0).transpose();
  for (auto _ : st) benchmark::DoNotOptimize(car_logpdf(x, 2.0, p.spatial));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Sweep, variant_a, Variant::A)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK_CAPTURE(BM_Sweep, variant_b, Variant::B)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK_CAPTURE(BM_Sweep, variant_d, Variant::D)->Arg(10)->Arg(50);
BENCHMARK(BM_LogPosterior)->Arg(10)->Arg(200);
BENCHMARK(BM_CarLogpdf)->Arg(10)->Arg(200)->Arg(1000);
BENCHMARK_MAIN();
