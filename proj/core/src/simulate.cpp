#include "jointmap/simulate.hpp"

#include <cmath>

#include "jointmap/error.hpp"
#include "jointmap/mcmc.hpp"

namespace jointmap {

std::vector<std::string> numbered_labels(const std::string& prefix, std::size_t n) {
  const auto width = std::to_string(n > 0 ? n - 1 : 0).size();
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto digits = std::to_string(i);
    out[i] = prefix + std::string(width - digits.size(), '0') + digits;
  }
  return out;
}

CancerDataset simulate_dataset(const SimulationRecipe& recipe) {
  const auto& spec = recipe.spec;
  const auto& d = spec.dims();
  if (!(recipe.expected.dims() == d)) {
    throw Error(ErrorCode::dimension_mismatch, "expected counts do not match the model dimensions");
  }
  if (auto bad = invariant_violations(recipe.true_state, spec, true, 1e-8); !bad.empty()) {
    throw Error(ErrorCode::value, "true state invalid: " + bad.front());
  }
  Rng rng(recipe.seed);
  const auto log_risk = log_relative_risks(recipe.true_state, spec);
  Counts y(d, 0);
  for (std::size_t c = 0; c < d.cells(); ++c) y[c] = sample_poisson(recipe.expected[c] * std::exp(log_risk[c]), rng);

  auto labels = [](const std::vector<std::string>& given, const char* prefix, std::size_t n) {
    return given.empty() ? numbered_labels(prefix, n) : given;
  };
  return CancerDataset(std::move(y), recipe.expected, labels(recipe.area_labels, "area", d.areas),
                       labels(recipe.period_labels, "period", d.periods),
                       labels(recipe.disease_labels, "disease", d.diseases));
}

ParameterState draw_true_state(const ModelSpec& spec, Rng& rng, double field_sd) {
  if (!(field_sd > 0.0)) throw Error(ErrorCode::domain, "field_sd must be positive");
  const auto& cm = spec.components();
  auto s = ParameterState::zeros(spec);
  constexpr double weight_sd = 0.5;  // variance 0.25
  for (Eigen::Index k = 0; k < s.alpha.size(); ++k) s.alpha(k) = sample_normal(0.0, weight_sd, rng);
  auto fill = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = sample_normal(0.0, field_sd, rng);
  };
  fill(s.lambda);
  fill(s.phi);
  if (s.eta) fill(*s.eta);
  if (s.epsilon) fill(*s.epsilon);
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    for (auto k : cm.members(l)) {
      s.log_delta(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = sample_normal(0.0, weight_sd, rng);
      s.log_psi(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = sample_normal(0.0, weight_sd, rng);
    }
  }
  const double precision = 1.0 / (field_sd * field_sd);
  s.tau_lambda.setConstant(precision);
  s.tau_phi.setConstant(precision);
  if (s.tau_eta) s.tau_eta = precision;
  if (s.prec_epsilon) {
    const auto k = s.prec_epsilon->dim();
    s.prec_epsilon = SpdMatrix(precision * Eigen::MatrixXd::Identity(k, k));
  }
  // Removes field means into alpha and per-component mean log weights into the
  // fields.
  return recenter(std::move(s), spec);
}

AdjacencyGraph random_connected_graph(std::size_t n_nodes, double extra_edge_probability, Rng& rng) {
  if (n_nodes == 0) throw Error(ErrorCode::domain, "graph needs at least one node");
  std::vector<AdjacencyGraph::Edge> edges;
  for (std::size_t v = 1; v < n_nodes; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    edges.emplace_back(parent(rng), v);
  }
  for (std::size_t a = 0; a < n_nodes; ++a)
    for (std::size_t b = a + 1; b < n_nodes; ++b)
      if (sample_uniform(rng) < extra_edge_probability) edges.emplace_back(a, b);
  return AdjacencyGraph(numbered_labels("area", n_nodes), std::move(edges));
}

}  // namespace jointmap
