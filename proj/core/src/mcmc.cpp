#include "jointmap/mcmc.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "jointmap/error.hpp"

namespace jointmap {

namespace {

Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

constexpr double kMinStep = 1e-5;
constexpr double kMaxStep = 50.0;

void split_structure(const StructureMatrix& q, std::vector<double>& diag,
                     std::vector<std::vector<std::pair<std::size_t, double>>>& offdiag) {
  const auto n = q.dim();
  diag.assign(n, 0.0);
  offdiag.assign(n, {});
  for (Eigen::Index col = 0; col < q.entries.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(q.entries, col); it; ++it) {
      const auto r = static_cast<std::size_t>(it.row());
      const auto c = static_cast<std::size_t>(it.col());
      if (r == c) {
        diag[r] += it.value();
      } else {
        offdiag[c].emplace_back(r, it.value());
      }
    }
  }
}

}  // namespace

void McmcConfig::validate() const {
  if (thin == 0) throw Error(ErrorCode::domain, "thin must be at least 1");
  if (n_keep_iterations == 0 || n_keep_iterations % thin != 0) {
    throw Error(ErrorCode::domain, "n_keep_iterations must be a positive multiple of thin");
  }
  if (n_chains == 0) throw Error(ErrorCode::domain, "need at least one chain");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw Error(ErrorCode::domain, "target acceptance must lie in (0, 1)");
  }
  if (adapt_interval == 0) throw Error(ErrorCode::domain, "adapt_interval must be positive");
  if (!(initial_step_size > 0.0)) throw Error(ErrorCode::domain, "initial step size must be positive");
  if (!(joint_target_acceptance > 0.0 && joint_target_acceptance < 1.0)) {
    throw Error(ErrorCode::domain, "joint target acceptance must lie in (0, 1)");
  }
}

double draw_car_precision(const Eigen::Ref<const Eigen::VectorXd>& field, const StructureMatrix& structure,
                          const HyperParameters& hyper, Rng& rng) {
  const double shape = hyper.gamma_shape + 0.5 * static_cast<double>(structure.rank);
  const double rate = hyper.gamma_rate + 0.5 * structure.quadratic_form(field);
  return sample_gamma(shape, rate, rng);
}

double draw_exchangeable_precision(const Eigen::MatrixXd& eta, const HyperParameters& hyper, Rng& rng) {
  const double shape = hyper.gamma_shape + 0.5 * static_cast<double>(eta.size());
  const double rate = hyper.gamma_rate + 0.5 * eta.squaredNorm();
  return sample_gamma(shape, rate, rng);
}

SpdMatrix draw_heterogeneity_precision(const Eigen::MatrixXd& epsilon, const HyperParameters& hyper, Rng& rng) {
  Eigen::MatrixXd scale = hyper.wishart_scale.matrix() + epsilon.transpose() * epsilon;
  scale = 0.5 * (scale + scale.transpose()).eval();
  return sample_wishart(SpdMatrix(std::move(scale)), hyper.wishart_df + static_cast<double>(epsilon.rows()), rng);
}

void gibbs_update_precisions(ParameterState& s, const ModelSpec& spec, const HyperParameters& hyper,
                             const StructureMatrix& spatial, const StructureMatrix& temporal,
                             const BlockMask& mask, Rng& rng) {
  for (std::size_t l = 0; l < spec.n_components(); ++l) {
    if (mask.tau_lambda) s.tau_lambda(ix(l)) = draw_car_precision(s.lambda.row(ix(l)).transpose(), spatial, hyper, rng);
  }
  for (std::size_t l = 0; l < spec.n_components(); ++l) {
    if (mask.tau_phi) s.tau_phi(ix(l)) = draw_car_precision(s.phi.row(ix(l)).transpose(), temporal, hyper, rng);
  }
  if (spec.has_interaction() && mask.tau_eta) s.tau_eta = draw_exchangeable_precision(*s.eta, hyper, rng);
  if (spec.has_heterogeneity() && mask.prec_epsilon) {
    s.prec_epsilon = draw_heterogeneity_precision(*s.epsilon, hyper, rng);
  }
}

ParameterState recenter(ParameterState s, const ModelSpec& spec) {
  const auto& cm = spec.components();
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    const auto li = ix(l);
    const auto& members = cm.members(l);

    const double m_space = s.lambda.row(li).mean();
    s.lambda.row(li).array() -= m_space;
    for (auto k : members) s.alpha(ix(k)) += m_space * std::exp(s.log_delta(li, ix(k)));

    const double m_time = s.phi.row(li).mean();
    s.phi.row(li).array() -= m_time;
    for (auto k : members) s.alpha(ix(k)) += m_time * std::exp(s.log_psi(li, ix(k)));

    double g_space = 0.0, g_time = 0.0;
    for (auto k : members) {
      g_space += s.log_delta(li, ix(k));
      g_time += s.log_psi(li, ix(k));
    }
    g_space /= static_cast<double>(members.size());
    g_time /= static_cast<double>(members.size());
    for (auto k : members) {
      s.log_delta(li, ix(k)) -= g_space;
      s.log_psi(li, ix(k)) -= g_time;
    }
    s.lambda.row(li) *= std::exp(g_space);
    s.phi.row(li) *= std::exp(g_time);
  }
  return s;
}

ParameterState initialize_state(const ModelSpec& spec, const CancerDataset& data, const HyperParameters& hyper,
                                Rng& rng) {
  hyper.validate(spec.dims().diseases);
  const auto& d = spec.dims();
  if (!(data.dims() == d)) throw Error(ErrorCode::dimension_mismatch, "dataset does not match model");
  auto s = ParameterState::zeros(spec);
  for (std::size_t k = 0; k < d.diseases; ++k) {
    double y = 0.0, e = 0.0;
    for (std::size_t i = 0; i < d.areas; ++i)
      for (std::size_t j = 0; j < d.periods; ++j) {
        y += static_cast<double>(data.observed()(i, j, k));
        e += data.expected()(i, j, k);
      }
    // half a case for a disease with no cases
    s.alpha(ix(k)) = std::log(std::max(y, 0.5) / e);
  }
  constexpr double jitter = 0.01;
  auto fill = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = sample_normal(0.0, jitter, rng);
  };
  fill(s.lambda);
  fill(s.phi);
  if (s.eta) fill(*s.eta);
  if (s.epsilon) fill(*s.epsilon);
  for (Eigen::Index l = 0; l < s.lambda.rows(); ++l) {
    s.lambda.row(l).array() -= s.lambda.row(l).mean();
    s.phi.row(l).array() -= s.phi.row(l).mean();
  }
  return s;
}

const char* to_string(SiteBlock block) noexcept {
  switch (block) {
    case SiteBlock::alpha: return "alpha";
    case SiteBlock::lambda: return "lambda";
    case SiteBlock::phi: return "phi";
    case SiteBlock::log_delta: return "log_delta";
    case SiteBlock::log_psi: return "log_psi";
    case SiteBlock::eta: return "eta";
    case SiteBlock::epsilon: return "epsilon";
  }
  return "?";
}

Sampler::Sampler(const CancerDataset& data, const ModelSpec& spec, const HyperParameters& hyper,
                 const StructureMatrix& spatial, const StructureMatrix& temporal, const McmcConfig& config,
                 ParameterState initial)
    : data_{data},
      spec_{spec},
      hyper_{hyper},
      spatial_{spatial},
      temporal_{temporal},
      config_{config},
      state_{std::move(initial)} {
  config_.validate();
  hyper_.validate(spec_.dims().diseases);
  const auto& d = spec_.dims();
  if (!(data_.dims() == d)) throw Error(ErrorCode::dimension_mismatch, "dataset does not match model");
  if (spatial_.dim() != d.areas) {
    throw Error(ErrorCode::dimension_mismatch, "spatial structure has " + std::to_string(spatial_.dim()) +
                                                   " nodes but the data has " + std::to_string(d.areas) + " areas");
  }
  if (temporal_.dim() != d.periods) {
    throw Error(ErrorCode::dimension_mismatch, "temporal structure does not match the number of periods");
  }
  if (auto bad = invariant_violations(state_, spec_, false); !bad.empty()) {
    throw Error(ErrorCode::value, "initial state invalid: " + bad.front());
  }
  split_structure(spatial_, spatial_diag_, spatial_offdiag_);
  split_structure(temporal_, temporal_diag_, temporal_offdiag_);

  observed_.resize(d.cells());
  for (std::size_t c = 0; c < d.cells(); ++c) {
    const auto y = static_cast<double>(data_.observed()[c]);
    observed_[c] = y;
    deviance_constant_ += y * std::log(data_.expected()[c]) - std::lgamma(y + 1.0);
  }

  const auto l = spec_.n_components();
  auto add = [&](SiteBlock id, std::size_t n) {
    blocks_.push_back(Block{id, std::vector<Site>(n, Site{config_.initial_step_size}), 0, 0});
  };
  add(SiteBlock::alpha, d.diseases);
  add(SiteBlock::lambda, l * d.areas);
  add(SiteBlock::phi, l * d.periods);
  add(SiteBlock::log_delta, l * d.diseases);
  add(SiteBlock::log_psi, l * d.diseases);
  add(SiteBlock::eta, spec_.has_interaction() ? d.areas * d.periods : 0);
  add(SiteBlock::epsilon, spec_.has_heterogeneity() ? d.cells() : 0);

  const auto& mask = config_.update;
  auto add_joint = [&](Family family) {
    JointMove move;
    move.family = family;
    move.coords = family_coordinates(family);
    const auto n = ix(move.coords.size());
    move.sum = Eigen::VectorXd::Zero(n);
    move.outer = Eigen::MatrixXd::Zero(n, n);
    joint_.push_back(std::move(move));
  };
  if (config_.joint_field_updates) {
    if (mask.lambda && mask.log_delta) add_joint(Family::spatial);
    if (mask.phi && mask.log_psi) add_joint(Family::temporal);
  }
  rebuild_cache();
}

std::vector<std::pair<SiteBlock, std::size_t>> Sampler::family_coordinates(Family family) const {
  const auto& d = spec_.dims();
  const auto& cm = spec_.components();
  const bool spatial = family == Family::spatial;
  const auto field = spatial ? SiteBlock::lambda : SiteBlock::phi;
  const auto weight = spatial ? SiteBlock::log_delta : SiteBlock::log_psi;
  const auto n = spatial ? d.areas : d.periods;
  std::vector<std::pair<SiteBlock, std::size_t>> out;
  for (std::size_t site = 0; site < cm.n_components() * n; ++site) out.emplace_back(field, site);
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (auto k : cm.members(l)) out.emplace_back(weight, l * d.diseases + k);
  return out;
}

Eigen::VectorXd Sampler::family_values(const std::vector<std::pair<SiteBlock, std::size_t>>& coords) const {
  Eigen::VectorXd x(ix(coords.size()));
  for (std::size_t n = 0; n < coords.size(); ++n) x(ix(n)) = value(coords[n].first, coords[n].second);
  return x;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> Sampler::family_with(Family family, const Eigen::VectorXd& proposal) const {
  const auto& d = spec_.dims();
  const bool spatial = family == Family::spatial;
  Eigen::MatrixXd field = spatial ? state_.lambda : state_.phi;
  Eigen::MatrixXd weights = spatial ? state_.log_delta : state_.log_psi;
  const auto n = spatial ? d.areas : d.periods;
  const auto coords = family_coordinates(family);
  if (ix(coords.size()) != proposal.size()) {
    throw Error(ErrorCode::dimension_mismatch, "joint proposal has the wrong length");
  }
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const auto [block, site] = coords[c];
    if (block == SiteBlock::lambda || block == SiteBlock::phi) {
      field(ix(site / n), ix(site % n)) = proposal(ix(c));
    } else {
      weights(ix(site / d.diseases), ix(site % d.diseases)) = proposal(ix(c));
    }
  }
  return {std::move(field), std::move(weights)};
}

double Sampler::joint_log_ratio(Family family, const Eigen::VectorXd& proposal) const {
  const auto& d = spec_.dims();
  const auto& cm = spec_.components();
  const bool spatial = family == Family::spatial;
  const auto& old_field = spatial ? state_.lambda : state_.phi;
  const auto& old_weights = spatial ? state_.log_delta : state_.log_psi;
  const auto [field, weights] = family_with(family, proposal);
  const auto n = spatial ? d.areas : d.periods;

  // contribution(node, k) summed over components
  auto contribution = [&](const Eigen::MatrixXd& f, const Eigen::MatrixXd& w) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ix(n), ix(d.diseases));
    for (std::size_t l = 0; l < cm.n_components(); ++l)
      for (auto k : cm.members(l)) c.col(ix(k)) += f.row(ix(l)).transpose() * std::exp(w(ix(l), ix(k)));
    return c;
  };
  const Eigen::MatrixXd shift = contribution(field, weights) - contribution(old_field, old_weights);

  double delta = 0.0;
  for (std::size_t i = 0; i < d.areas; ++i) {
    for (std::size_t j = 0; j < d.periods; ++j) {
      for (std::size_t k = 0; k < d.diseases; ++k) {
        const double s = shift(ix(spatial ? i : j), ix(k));
        if (s == 0.0) continue;
        const auto c = d.index(i, j, k);
        delta += observed_[c] * s - mean_[c] * std::expm1(s);
      }
    }
  }
  const auto& structure = spatial ? spatial_ : temporal_;
  const auto& tau = spatial ? state_.tau_lambda : state_.tau_phi;
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    const Eigen::VectorXd now = old_field.row(ix(l)).transpose();
    const Eigen::VectorXd next = field.row(ix(l)).transpose();
    delta -= 0.5 * tau(ix(l)) * (structure.quadratic_form(next) - structure.quadratic_form(now));
    for (auto k : cm.members(l)) {
      const double a = weights(ix(l), ix(k)), b = old_weights(ix(l), ix(k));
      delta -= (a * a - b * b) / (2.0 * hyper_.weight_prior_variance);
    }
  }
  return delta;
}

void Sampler::update_joint(JointMove& move, Rng& rng) {
  if (move.chol.size() == 0) return;
  const Eigen::VectorXd x = family_values(move.coords);
  Eigen::VectorXd z(x.size());
  for (Eigen::Index n = 0; n < z.size(); ++n) z(n) = sample_normal(0.0, 1.0, rng);
  const Eigen::VectorXd proposal = x + std::exp(move.log_scale) * (move.chol * z);
  const double log_ratio = joint_log_ratio(move.family, proposal);
  ++move.proposed;
  ++move.window_proposed;
  if (!std::isfinite(log_ratio) || std::log(sample_uniform(rng)) >= log_ratio) return;
  ++move.accepted;
  ++move.window_accepted;
  for (std::size_t n = 0; n < move.coords.size(); ++n) value(move.coords[n].first, move.coords[n].second) = proposal(ix(n));
  rebuild_cache();
}

void Sampler::rebuild_cache() {
  log_rate_ = log_relative_risks(state_, spec_);
  mean_.resize(log_rate_.size());
  for (std::size_t c = 0; c < log_rate_.size(); ++c) mean_[c] = data_.expected()[c] * std::exp(log_rate_[c]);
}

double Sampler::current_deviance() const {
  double ll = deviance_constant_;
  for (std::size_t c = 0; c < log_rate_.size(); ++c) ll += observed_[c] * log_rate_[c] - mean_[c];
  return -2.0 * ll;
}

double Sampler::value(SiteBlock block, std::size_t site) const {
  return const_cast<Sampler*>(this)->value(block, site);
}

double& Sampler::value(SiteBlock block, std::size_t site) {
  const auto& d = spec_.dims();
  switch (block) {
    case SiteBlock::alpha: return state_.alpha(ix(site));
    case SiteBlock::lambda: return state_.lambda(ix(site / d.areas), ix(site % d.areas));
    case SiteBlock::phi: return state_.phi(ix(site / d.periods), ix(site % d.periods));
    case SiteBlock::log_delta: return state_.log_delta(ix(site / d.diseases), ix(site % d.diseases));
    case SiteBlock::log_psi: return state_.log_psi(ix(site / d.diseases), ix(site % d.diseases));
    case SiteBlock::eta: return (*state_.eta)(ix(site / d.periods), ix(site % d.periods));
    case SiteBlock::epsilon: return (*state_.epsilon)(ix(site / d.diseases), ix(site % d.diseases));
  }
  throw Error(ErrorCode::domain, "unknown parameter block");
}

void Sampler::affected_cells(SiteBlock block, std::size_t site, double proposal) const {
  const auto& d = spec_.dims();
  const auto& cm = spec_.components();
  const double diff = proposal - value(block, site);
  cells_buf_.clear();
  shifts_buf_.clear();
  auto push = [&](std::size_t cell, double shift) {
    cells_buf_.push_back(cell);
    shifts_buf_.push_back(shift);
  };
  switch (block) {
    case SiteBlock::alpha:
      for (std::size_t i = 0; i < d.areas; ++i)
        for (std::size_t j = 0; j < d.periods; ++j) push(d.index(i, j, site), diff);
      break;
    case SiteBlock::lambda: {
      const auto l = site / d.areas, i = site % d.areas;
      for (std::size_t j = 0; j < d.periods; ++j)
        for (auto k : cm.members(l)) push(d.index(i, j, k), diff * std::exp(state_.log_delta(ix(l), ix(k))));
      break;
    }
    case SiteBlock::phi: {
      const auto l = site / d.periods, j = site % d.periods;
      for (std::size_t i = 0; i < d.areas; ++i)
        for (auto k : cm.members(l)) push(d.index(i, j, k), diff * std::exp(state_.log_psi(ix(l), ix(k))));
      break;
    }
    case SiteBlock::log_delta: {
      const auto l = site / d.diseases, k = site % d.diseases;
      const double dw = std::exp(proposal) - std::exp(value(block, site));
      for (std::size_t i = 0; i < d.areas; ++i) {
        const double shift = state_.lambda(ix(l), ix(i)) * dw;
        for (std::size_t j = 0; j < d.periods; ++j) push(d.index(i, j, k), shift);
      }
      break;
    }
    case SiteBlock::log_psi: {
      const auto l = site / d.diseases, k = site % d.diseases;
      const double dw = std::exp(proposal) - std::exp(value(block, site));
      for (std::size_t i = 0; i < d.areas; ++i)
        for (std::size_t j = 0; j < d.periods; ++j) push(d.index(i, j, k), state_.phi(ix(l), ix(j)) * dw);
      break;
    }
    case SiteBlock::eta: {
      const auto i = site / d.periods, j = site % d.periods;
      for (std::size_t k = 0; k < d.diseases; ++k) push(d.index(i, j, k), diff);
      break;
    }
    case SiteBlock::epsilon:
      push(site, diff);
      break;
  }
}

double Sampler::prior_delta(SiteBlock block, std::size_t site, double proposal) const {
  const auto& d = spec_.dims();
  const double current = value(block, site);
  const double dsq = proposal * proposal - current * current;
  const double diff = proposal - current;
  // Change in tau/2 * x'Qx when one coordinate moves.
  auto gmrf = [&](const std::vector<double>& diag,
                  const std::vector<std::vector<std::pair<std::size_t, double>>>& offdiag, const Eigen::MatrixXd& field,
                  std::size_t row, std::size_t node, double tau) {
    double nb = 0.0;
    for (const auto& [m, q] : offdiag[node]) nb += q * field(ix(row), ix(m));
    return -0.5 * tau * (diag[node] * dsq + 2.0 * diff * nb);
  };
  switch (block) {
    case SiteBlock::alpha:
      return hyper_.alpha_prior_variance ? -dsq / (2.0 * *hyper_.alpha_prior_variance) : 0.0;
    case SiteBlock::lambda: {
      const auto l = site / d.areas;
      return gmrf(spatial_diag_, spatial_offdiag_, state_.lambda, l, site % d.areas, state_.tau_lambda(ix(l)));
    }
    case SiteBlock::phi: {
      const auto l = site / d.periods;
      return gmrf(temporal_diag_, temporal_offdiag_, state_.phi, l, site % d.periods, state_.tau_phi(ix(l)));
    }
    case SiteBlock::log_delta:
    case SiteBlock::log_psi:
      return -dsq / (2.0 * hyper_.weight_prior_variance);
    case SiteBlock::eta:
      return -0.5 * *state_.tau_eta * dsq;
    case SiteBlock::epsilon: {
      const auto& prec = state_.prec_epsilon->matrix();
      const auto row = ix(site / d.diseases);
      const auto k = ix(site % d.diseases);
      double cross = 0.0;
      for (Eigen::Index m = 0; m < prec.cols(); ++m) {
        if (m != k) cross += prec(k, m) * (*state_.epsilon)(row, m);
      }
      return -0.5 * (prec(k, k) * dsq + 2.0 * diff * cross);
    }
  }
  return 0.0;
}

double Sampler::site_log_ratio(SiteBlock block, std::size_t site, double proposal) const {
  affected_cells(block, site, proposal);
  double delta = 0.0;
  for (std::size_t n = 0; n < cells_buf_.size(); ++n) {
    const auto c = cells_buf_[n];
    delta += observed_[c] * shifts_buf_[n] - mean_[c] * std::expm1(shifts_buf_[n]);
  }
  return delta + prior_delta(block, site, proposal);
}

void Sampler::update_site(Block& block, std::size_t site, Rng& rng) {
  auto& s = block.sites[site];
  double x = value(block.id, site);
  const bool accepted =
      random_walk_update(x, s.step, [&](double proposal) { return site_log_ratio(block.id, site, proposal); }, rng);
  ++s.window_proposed;
  ++block.proposed;
  if (!accepted) return;
  ++s.window_accepted;
  ++block.accepted;
  affected_cells(block.id, site, x);
  value(block.id, site) = x;
  for (std::size_t n = 0; n < cells_buf_.size(); ++n) {
    const auto c = cells_buf_[n];
    log_rate_[c] += shifts_buf_[n];
    mean_[c] *= std::exp(shifts_buf_[n]);
  }
}

void Sampler::update_block(Block& block, Rng& rng) {
  const auto& d = spec_.dims();
  const auto& cm = spec_.components();
  if (block.id == SiteBlock::log_delta || block.id == SiteBlock::log_psi) {
    for (std::size_t l = 0; l < cm.n_components(); ++l)
      for (auto k : cm.members(l)) update_site(block, l * d.diseases + k, rng);
    return;
  }
  for (std::size_t site = 0; site < block.sites.size(); ++site) update_site(block, site, rng);
}

void Sampler::sweep(Rng& rng) {
  const auto& mask = config_.update;
  for (auto& block : blocks_) {
    bool enabled = false;
    switch (block.id) {
      case SiteBlock::alpha: enabled = mask.alpha; break;
      case SiteBlock::lambda: enabled = mask.lambda; break;
      case SiteBlock::phi: enabled = mask.phi; break;
      case SiteBlock::log_delta: enabled = mask.log_delta; break;
      case SiteBlock::log_psi: enabled = mask.log_psi; break;
      case SiteBlock::eta: enabled = mask.eta; break;
      case SiteBlock::epsilon: enabled = mask.epsilon; break;
    }
    if (enabled) update_block(block, rng);
  }
  for (auto& move : joint_) update_joint(move, rng);
  gibbs_update_precisions(state_, spec_, hyper_, spatial_, temporal_, mask, rng);
  if (mask.recenter) state_ = recenter(std::move(state_), spec_);
  rebuild_cache();
  if (!adapting_) return;
  for (auto& move : joint_) {
    const Eigen::VectorXd x = family_values(move.coords);
    move.sum += x;
    move.outer += x * x.transpose();
    ++move.n_samples;
  }
}

void Sampler::adapt_step_sizes() {
  ++adapt_batches_;
  const double delta = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(adapt_batches_)));
  for (auto& b : blocks_) {
    for (auto& s : b.sites) {
      if (s.window_proposed == 0) continue;
      const double rate = static_cast<double>(s.window_accepted) / static_cast<double>(s.window_proposed);
      s.step *= std::exp(rate > config_.target_acceptance ? delta : -delta);
      s.step = std::clamp(s.step, kMinStep, kMaxStep);
      s.window_accepted = 0;
      s.window_proposed = 0;
    }
  }
  for (auto& move : joint_) {
    if (move.window_proposed > 0) {
      const double rate = static_cast<double>(move.window_accepted) / static_cast<double>(move.window_proposed);
      move.log_scale += rate > config_.joint_target_acceptance ? delta : -delta;
      move.window_accepted = 0;
      move.window_proposed = 0;
    }
    const auto dim = move.sum.size();
    if (!adapting_ || move.n_samples < std::max<std::size_t>(100, 2 * static_cast<std::size_t>(dim))) continue;
    const double n = static_cast<double>(move.n_samples);
    const Eigen::VectorXd mean = move.sum / n;
    Eigen::MatrixXd cov = move.outer / n - mean * mean.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    const double ridge = 1e-6 * std::max(cov.trace() / static_cast<double>(dim), 1e-8);
    cov.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(cov * (2.38 * 2.38 / static_cast<double>(dim)));
    if (llt.info() == Eigen::Success) move.chol = llt.matrixL();
  }
}

void Sampler::reset_acceptance() {
  for (auto& move : joint_) {
    move.proposed = 0;
    move.accepted = 0;
    move.window_accepted = 0;
    move.window_proposed = 0;
  }
  for (auto& b : blocks_) {
    b.proposed = 0;
    b.accepted = 0;
    for (auto& s : b.sites) {
      s.window_accepted = 0;
      s.window_proposed = 0;
    }
  }
}

std::vector<BlockAcceptance> Sampler::acceptance() const {
  std::vector<BlockAcceptance> out;
  for (const auto& b : blocks_) {
    if (b.proposed == 0) continue;
    out.push_back({to_string(b.id), b.proposed, b.accepted});
  }
  for (const auto& move : joint_) {
    if (move.proposed == 0) continue;
    out.push_back({move.family == Family::spatial ? "joint_spatial" : "joint_temporal", move.proposed, move.accepted});
  }
  return out;
}

ChainOutput run_chain(const CancerDataset& data, const ModelSpec& spec, const HyperParameters& hyper,
                      const StructureMatrix& spatial, const StructureMatrix& temporal, const McmcConfig& config,
                      std::size_t chain_index, std::optional<ParameterState> initial) {
  config.validate();
  ChainOutput out;
  out.chain_index = chain_index;
  out.seed = chain_seed(config.seed, chain_index);
  out.config = config;
  out.n_islands = spatial.dim() - spatial.rank;

  Rng rng(out.seed);
  auto start = initial ? std::move(*initial) : initialize_state(spec, data, hyper, rng);
  Sampler sampler(data, spec, hyper, spatial, temporal, config, std::move(start));

  auto check = [&](std::size_t iteration) {
    const double dev = sampler.current_deviance();
    if (!std::isfinite(dev)) {
      throw Error(ErrorCode::diverged_chain, "chain " + std::to_string(chain_index) +
                                                 " diverged: non-finite log-posterior at iteration " +
                                                 std::to_string(iteration));
    }
    return dev;
  };

  for (std::size_t it = 0; it < config.burn_in; ++it) {
    sampler.sweep(rng);
    check(it + 1);
    if ((it + 1) % config.adapt_interval == 0) sampler.adapt_step_sizes();
  }
  sampler.end_adaptation();
  sampler.reset_acceptance();

  out.draws.reserve(config.n_draws());
  out.deviance.reserve(config.n_draws());
  for (std::size_t it = 0; it < config.n_keep_iterations; ++it) {
    sampler.sweep(rng);
    check(config.burn_in + it + 1);
    if ((it + 1) % config.thin == 0) {
      out.draws.push_back(sampler.state());
      out.deviance.push_back(deviance(data, log_relative_risks(out.draws.back(), spec)));
    }
  }
  out.acceptance = sampler.acceptance();
  return out;
}

std::vector<ChainOutput> run_chains(const CancerDataset& data, const ModelSpec& spec, const HyperParameters& hyper,
                                    const StructureMatrix& spatial, const StructureMatrix& temporal,
                                    const McmcConfig& config, Execution execution) {
  config.validate();
  std::vector<ChainOutput> outputs(config.n_chains);
  if (execution == Execution::serial || config.n_chains == 1) {
    for (std::size_t c = 0; c < config.n_chains; ++c) {
      outputs[c] = run_chain(data, spec, hyper, spatial, temporal, config, c);
    }
    return outputs;
  }
  std::vector<std::exception_ptr> errors(config.n_chains);
  std::vector<std::thread> workers;
  workers.reserve(config.n_chains);
  for (std::size_t c = 0; c < config.n_chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        outputs[c] = run_chain(data, spec, hyper, spatial, temporal, config, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outputs;
}

}  // namespace jointmap
