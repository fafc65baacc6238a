#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jointmap/dataset.hpp"
#include "jointmap/graph.hpp"
#include "jointmap/model.hpp"
#include "jointmap/priors.hpp"

namespace jointmap {

struct SimulationRecipe {
  ModelSpec spec;
  ParameterState true_state;
  Expected expected;
  std::uint64_t seed = 0;
  // Generated as area0.., period0.., disease0.. when left empty.
  std::vector<std::string> area_labels;
  std::vector<std::string> period_labels;
  std::vector<std::string> disease_labels;
};

// Y_ijk ~ Poisson(E_ijk * theta_ijk) from the recipe's true state.
CancerDataset simulate_dataset(const SimulationRecipe& recipe);

// Centered truth: fields iid N(0, field_sd^2), log weights N(0, 0.25) centered
// within each component, intercepts N(0, 0.25); precisions 1 / field_sd^2.
ParameterState draw_true_state(const ModelSpec& spec, Rng& rng, double field_sd);

// Random spanning tree plus each remaining pair independently with
// probability `extra_edge_probability`. Labels area0, area1, ...
AdjacencyGraph random_connected_graph(std::size_t n_nodes, double extra_edge_probability, Rng& rng);

// "<prefix>0", "<prefix>1", ... zero-padded to a common width so that
// lexicographic and numeric order agree.
std::vector<std::string> numbered_labels(const std::string& prefix, std::size_t n);

}  // namespace jointmap
