#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "jointmap/simulate.hpp"
#include "oracles.hpp"

using namespace jointmap;
using fixture::code_of;

TEST_CASE("numbered labels sort numerically") {
  CHECK(numbered_labels("area", 3) == std::vector<std::string>{"area0", "area1", "area2"});
  const auto many = numbered_labels("p", 12);
  CHECK(many[3] == "p03");
  CHECK(std::is_sorted(many.begin(), many.end()));
}

TEST_CASE("counts at the null truth have the expected mean") {
  const Dims d{100, 10, 10};
  const ModelSpec spec(Variant::A, ComponentMap({"c"}, {std::vector<bool>(10, true)}), d);
  SimulationRecipe recipe{spec, ParameterState::zeros(spec), Expected(d, 100.0), 1, {}, {}, {}};
  const auto data = simulate_dataset(recipe);
  std::vector<double> y;
  for (std::size_t c = 0; c < d.cells(); ++c) y.push_back(static_cast<double>(data.observed()[c]));
  const auto est = oracle::iid_mean(y);
  CHECK(std::abs(est.mean - 100.0) < 4.0 * 0.1);
  CHECK(data.area_labels().front() == "area00");
  CHECK(data.disease_labels().back() == "disease9");
  CHECK(data.expected()(3, 2, 1) == 100.0);
}

TEST_CASE("simulation is reproducible") {
  const Dims d{6, 4, 3};
  const ModelSpec spec(Variant::D, fixture::three_disease_map(), d);
  Rng rng(2);
  const auto truth = draw_true_state(spec, rng, 0.3);
  SimulationRecipe recipe{spec, truth, Expected(d, 30.0), 9, {}, {}, {}};
  const auto a = simulate_dataset(recipe);
  const auto b = simulate_dataset(recipe);
  CHECK(a.observed() == b.observed());
  recipe.seed = 10;
  CHECK_FALSE(simulate_dataset(recipe).observed() == a.observed());
}

TEST_CASE("intercept shift scales the mean") {
  const Dims d{50, 10, 2};
  const ModelSpec spec(Variant::A, ComponentMap({"c"}, {{true, true}}), d);
  auto truth = ParameterState::zeros(spec);
  truth.alpha << 0.0, std::log(1.5);
  SimulationRecipe recipe{spec, truth, Expected(d, 40.0), 3, {}, {}, {}};
  const auto data = simulate_dataset(recipe);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < d.areas; ++i)
    for (std::size_t j = 0; j < d.periods; ++j) {
      s0 += static_cast<double>(data.observed()(i, j, 0));
      s1 += static_cast<double>(data.observed()(i, j, 1));
    }
  // sum of 500 Poisson(40) and 500 Poisson(60)
  CHECK(std::abs(s0 - 20000.0) < 4.0 * std::sqrt(20000.0));
  CHECK(std::abs(s1 - 30000.0) < 4.0 * std::sqrt(30000.0));
}

TEST_CASE("true states are valid and seed dependent") {
  const Dims d{7, 5, 3};
  for (auto v : {Variant::A, Variant::B, Variant::C, Variant::D}) {
    const ModelSpec spec(v, fixture::three_disease_map(), d);
    Rng r1(4), r2(5);
    const auto a = draw_true_state(spec, r1, 0.25);
    const auto b = draw_true_state(spec, r2, 0.25);
    CHECK(invariant_violations(a, spec).empty());
    CHECK_FALSE(a == b);
    CHECK(a.tau_lambda(0) == doctest::Approx(16.0));
  }
}

TEST_CASE("uncentered truth is rejected") {
  const Dims d{3, 2, 2};
  const ModelSpec spec(Variant::A, ComponentMap({"c"}, {{true, true}}), d);
  auto truth = ParameterState::zeros(spec);
  truth.lambda(0, 0) = 1.0;
  SimulationRecipe recipe{spec, truth, Expected(d, 5.0), 1, {}, {}, {}};
  CHECK(code_of([&] { simulate_dataset(recipe); }) == ErrorCode::value);
}

TEST_CASE("replicate means converge to E times theta") {
  const Dims d{4, 3, 2};
  const ModelSpec spec(Variant::B, ComponentMap({"c"}, {{true, true}}), d);
  Rng rng(6);
  const auto truth = draw_true_state(spec, rng, 0.3);
  const double target = 25.0 * relative_risk(truth, spec, 2, 1, 1);
  std::vector<double> y;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    SimulationRecipe recipe{spec, truth, Expected(d, 25.0), seed, {}, {}, {}};
    y.push_back(static_cast<double>(simulate_dataset(recipe).observed()(2, 1, 1)));
  }
  const auto est = oracle::iid_mean(y);
  CHECK(std::abs(est.mean - target) < 4.0 * std::sqrt(target / 4000.0));
}

TEST_CASE("random connected graphs") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = random_connected_graph(15, 0.1, rng);
    CHECK(g.n_nodes() == 15);
    CHECK(connected_components(g).size() == 1);
    CHECK(g.edges().size() >= 14);
    CHECK(structure_matrix(g).rank == 14);
  }
}
