#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "jointmap/dataset.hpp"
#include "jointmap/graph.hpp"
#include "jointmap/priors.hpp"

namespace jointmap {

// A: shared spatial + temporal components only.
// B: A + correlated per-cell heterogeneity.
// C: A + exchangeable area-period interaction.
// D: B + C.
enum class Variant { A, B, C, D };

Variant parse_variant(std::string_view name);
std::string to_string(Variant v);

class ModelSpec {
 public:
  ModelSpec(Variant variant, ComponentMap components, Dims dims);

  Variant variant() const noexcept { return variant_; }
  bool has_heterogeneity() const noexcept { return variant_ == Variant::B || variant_ == Variant::D; }
  bool has_interaction() const noexcept { return variant_ == Variant::C || variant_ == Variant::D; }
  const ComponentMap& components() const noexcept { return components_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t n_components() const noexcept { return components_.n_components(); }

 private:
  Variant variant_;
  ComponentMap components_;
  Dims dims_;
};

struct HyperParameters {
  double gamma_shape = 0.5;
  double gamma_rate = 0.0005;
  SpdMatrix wishart_scale;  // rate-like: prior mean of the precision is df * scale^-1
  double wishart_df = 0.0;
  double weight_prior_variance = 5.0;
  // Flat (improper uniform) intercept prior when empty.
  std::optional<double> alpha_prior_variance;

  // Identity Wishart scale with df = n_diseases.
  static HyperParameters defaults(std::size_t n_diseases);
  void validate(std::size_t n_diseases) const;
};

// One point in parameter space.
//
// Log weights are stored as dense L x K matrices; entries for diseases outside
// a component are held at zero and never read. Heterogeneity rows are indexed
// by i * J + j, one column per disease.
struct ParameterState {
  Eigen::VectorXd alpha;        // K
  Eigen::MatrixXd lambda;       // L x I
  Eigen::MatrixXd phi;          // L x J
  Eigen::MatrixXd log_delta;    // L x K
  Eigen::MatrixXd log_psi;      // L x K
  std::optional<Eigen::MatrixXd> eta;      // I x J
  std::optional<Eigen::MatrixXd> epsilon;  // (I*J) x K
  Eigen::VectorXd tau_lambda;   // L
  Eigen::VectorXd tau_phi;      // L
  std::optional<double> tau_eta;
  std::optional<SpdMatrix> prec_epsilon;

  // All fields zero, log weights zero, precisions one, identity precision matrix.
  static ParameterState zeros(const ModelSpec& spec);

  bool operator==(const ParameterState& other) const;
};

// Returns a description of every violated invariant (empty when valid). With
// `require_centered`, also checks the zero-sum gauges: each lambda_l and phi_l
// sums to zero and log weights sum to zero within each component.
std::vector<std::string> invariant_violations(const ParameterState& state, const ModelSpec& spec,
                                              bool require_centered = true, double tolerance = 1e-8);

// mu_ijk: shared spatial and temporal terms, plus interaction and heterogeneity
// when the variant has them.
double linear_predictor(const ParameterState& state, const ModelSpec& spec, std::size_t i, std::size_t j,
                        std::size_t k);

// theta_ijk = exp(alpha_k + mu_ijk)
double relative_risk(const ParameterState& state, const ModelSpec& spec, std::size_t i, std::size_t j,
                     std::size_t k);

// alpha_k + mu_ijk for every cell, in Dims::index order.
std::vector<double> log_relative_risks(const ParameterState& state, const ModelSpec& spec);

// Full Poisson log-likelihood including -lgamma(Y + 1).
double poisson_loglik(const CancerDataset& data, const ParameterState& state, const ModelSpec& spec);
double poisson_loglik(const CancerDataset& data, const std::vector<double>& log_risks);

double log_prior(const ParameterState& state, const ModelSpec& spec, const HyperParameters& hyper,
                 const StructureMatrix& spatial, const StructureMatrix& temporal);

double log_posterior(const CancerDataset& data, const ParameterState& state, const ModelSpec& spec,
                     const HyperParameters& hyper, const StructureMatrix& spatial,
                     const StructureMatrix& temporal);

// -2 * poisson_loglik
double deviance(const CancerDataset& data, const ParameterState& state, const ModelSpec& spec);
double deviance(const CancerDataset& data, const std::vector<double>& log_risks);

// Scalar parameter names in flatten() order, e.g. "alpha[0]", "lambda[1][4]",
// "log_delta[0][2]" (included diseases only), "prec_epsilon[0][1]" (upper
// triangle).
std::vector<std::string> parameter_names(const ModelSpec& spec);
std::vector<double> flatten(const ParameterState& state, const ModelSpec& spec);

}  // namespace jointmap
