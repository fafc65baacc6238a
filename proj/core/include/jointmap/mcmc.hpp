#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jointmap/dataset.hpp"
#include "jointmap/graph.hpp"
#include "jointmap/model.hpp"
#include "jointmap/priors.hpp"

namespace jointmap {

// Which parameter blocks a sweep updates. A disabled block keeps the value it
// has in the initial state.
struct BlockMask {
  bool alpha = true;
  bool lambda = true;
  bool phi = true;
  bool log_delta = true;
  bool log_psi = true;
  bool eta = true;
  bool epsilon = true;
  bool tau_lambda = true;
  bool tau_phi = true;
  bool tau_eta = true;
  bool prec_epsilon = true;
  bool recenter = true;
};

struct McmcConfig {
  std::size_t n_keep_iterations = 50000;
  std::size_t thin = 10;
  std::size_t burn_in = 20000;
  std::size_t n_chains = 2;
  std::uint64_t seed = 20240501;
  double target_acceptance = 0.44;
  std::size_t adapt_interval = 50;
  double initial_step_size = 0.1;
  // Adaptive-Metropolis moves on all spatial fields with their weights, and
  // all temporal fields with theirs, in addition to the single-site updates.
  bool joint_field_updates = true;
  double joint_target_acceptance = 0.25;
  BlockMask update;

  void validate() const;
  std::size_t n_draws() const noexcept { return n_keep_iterations / thin; }
};

struct BlockAcceptance {
  std::string block;
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  double rate() const noexcept {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

struct ChainOutput {
  std::size_t chain_index = 0;
  std::uint64_t seed = 0;  // seed of this chain's generator
  McmcConfig config;
  std::vector<ParameterState> draws;
  std::vector<double> deviance;  // one per draw
  // Single-site acceptance after burn-in, one entry per updated block.
  std::vector<BlockAcceptance> acceptance;
  std::size_t n_islands = 1;
};

// Random-walk Metropolis step on one scalar. `log_ratio(proposal)` returns
// log target(proposal) - log target(x). Draws one normal and one uniform.
template <typename LogRatio>
bool random_walk_update(double& x, double step, LogRatio&& log_ratio, Rng& rng) {
  const double proposal = x + sample_normal(0.0, step, rng);
  const double delta = log_ratio(proposal);
  const double u = sample_uniform(rng);
  if (std::isfinite(delta) && std::log(u) < delta) {
    x = proposal;
    return true;
  }
  return false;
}

// Gibbs draws for the precision parameters under their conjugate priors.
double draw_car_precision(const Eigen::Ref<const Eigen::VectorXd>& field, const StructureMatrix& structure,
                          const HyperParameters& hyper, Rng& rng);
double draw_exchangeable_precision(const Eigen::MatrixXd& eta, const HyperParameters& hyper, Rng& rng);
// Wishart(S + sum_r e_r e_r', df + rows)
SpdMatrix draw_heterogeneity_precision(const Eigen::MatrixXd& epsilon, const HyperParameters& hyper, Rng& rng);

void gibbs_update_precisions(ParameterState& state, const ModelSpec& spec, const HyperParameters& hyper,
                             const StructureMatrix& spatial, const StructureMatrix& temporal,
                             const BlockMask& mask, Rng& rng);

// Moves each field's mean into the intercepts and each component's geometric
// mean weight into its field, leaving every relative risk unchanged. With a
// disconnected spatial graph a single global mean is removed per field.
ParameterState recenter(ParameterState state, const ModelSpec& spec);

// Moment-matched intercepts, fields jittered with N(0, 0.01^2), unit weights
// and precisions, identity heterogeneity precision; recentered.
ParameterState initialize_state(const ModelSpec& spec, const CancerDataset& data, const HyperParameters& hyper,
                                Rng& rng);

enum class SiteBlock { alpha, lambda, phi, log_delta, log_psi, eta, epsilon };

const char* to_string(SiteBlock block) noexcept;

// Metropolis-within-Gibbs kernel over one chain's state. Caches per-cell log
// rates so single-site updates touch only the affected cells. The caller keeps
// data, spec, hyper and both structure matrices alive for the sampler's
// lifetime.
//
// Site numbering within a block: alpha k; lambda l * I + i; phi l * J + j;
// log_delta and log_psi l * K + k; eta i * J + j; epsilon the cell index.
class Sampler {
 public:
  Sampler(const CancerDataset& data, const ModelSpec& spec, const HyperParameters& hyper,
          const StructureMatrix& spatial, const StructureMatrix& temporal, const McmcConfig& config,
          ParameterState initial);

  // Single-site updates in fixed block order, then Gibbs precisions, then
  // recentering.
  void sweep(Rng& rng);

  // Nudges every step size toward the target acceptance using counts since
  // the previous call.
  void adapt_step_sizes();
  void reset_acceptance();
  // Stops collecting moments for the joint proposals; called once after burn-in.
  void end_adaptation() noexcept { adapting_ = false; }

  enum class Family { spatial, temporal };
  // Coordinates moved by a joint proposal: every field entry of the family,
  // then the member log weights, component by component.
  std::vector<std::pair<SiteBlock, std::size_t>> family_coordinates(Family family) const;
  // log posterior(coordinates = proposal) - log posterior(current).
  double joint_log_ratio(Family family, const Eigen::VectorXd& proposal) const;

  // log posterior(site = proposal) - log posterior(current), from the local
  // terms only.
  double site_log_ratio(SiteBlock block, std::size_t site, double proposal) const;

  const ParameterState& state() const noexcept { return state_; }
  double current_deviance() const;
  std::vector<BlockAcceptance> acceptance() const;

 private:
  struct Site {
    double step;
    std::size_t window_accepted = 0;
    std::size_t window_proposed = 0;
  };
  struct Block {
    SiteBlock id;
    std::vector<Site> sites;
    std::size_t proposed = 0;
    std::size_t accepted = 0;
  };
  struct JointMove {
    Family family;
    std::vector<std::pair<SiteBlock, std::size_t>> coords;
    Eigen::VectorXd sum;
    Eigen::MatrixXd outer;
    std::size_t n_samples = 0;
    Eigen::MatrixXd chol;  // proposal factor; empty until enough samples
    double log_scale = 0.0;
    std::size_t window_proposed = 0;
    std::size_t window_accepted = 0;
    std::size_t proposed = 0;
    std::size_t accepted = 0;
  };

  double& value(SiteBlock block, std::size_t site);
  double value(SiteBlock block, std::size_t site) const;
  // Cells whose log rate moves, and by how much, if the site takes `proposal`.
  void affected_cells(SiteBlock block, std::size_t site, double proposal) const;
  double prior_delta(SiteBlock block, std::size_t site, double proposal) const;
  void update_site(Block& block, std::size_t site, Rng& rng);
  void update_block(Block& block, Rng& rng);
  void update_joint(JointMove& move, Rng& rng);
  Eigen::VectorXd family_values(const std::vector<std::pair<SiteBlock, std::size_t>>& coords) const;
  // Field rows and weights of the family with `proposal` written in.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> family_with(Family family, const Eigen::VectorXd& proposal) const;
  void rebuild_cache();

  const CancerDataset& data_;
  const ModelSpec& spec_;
  const HyperParameters& hyper_;
  const StructureMatrix& spatial_;
  const StructureMatrix& temporal_;
  McmcConfig config_;
  ParameterState state_;

  std::vector<std::vector<std::pair<std::size_t, double>>> spatial_offdiag_;
  std::vector<double> spatial_diag_;
  std::vector<std::vector<std::pair<std::size_t, double>>> temporal_offdiag_;
  std::vector<double> temporal_diag_;

  std::vector<double> log_rate_;  // alpha_k + mu_ijk
  std::vector<double> mean_;      // E * exp(log_rate)
  std::vector<double> observed_;
  double deviance_constant_ = 0.0;

  std::vector<Block> blocks_;
  std::vector<JointMove> joint_;
  std::size_t adapt_batches_ = 0;
  bool adapting_ = true;

  mutable std::vector<std::size_t> cells_buf_;
  mutable std::vector<double> shifts_buf_;
};

// Runs burn_in + n_keep_iterations sweeps on chain `chain_index`, whose
// generator is seeded with chain_seed(config.seed, chain_index). Step sizes
// adapt every adapt_interval sweeps during burn-in only. `initial` replaces
// initialize_state when given.
ChainOutput run_chain(const CancerDataset& data, const ModelSpec& spec, const HyperParameters& hyper,
                      const StructureMatrix& spatial, const StructureMatrix& temporal, const McmcConfig& config,
                      std::size_t chain_index, std::optional<ParameterState> initial = std::nullopt);

enum class Execution { serial, concurrent };

// config.n_chains independent chains; output is identical for either execution
// mode.
std::vector<ChainOutput> run_chains(const CancerDataset& data, const ModelSpec& spec, const HyperParameters& hyper,
                                    const StructureMatrix& spatial, const StructureMatrix& temporal,
                                    const McmcConfig& config, Execution execution = Execution::concurrent);

}  // namespace jointmap
