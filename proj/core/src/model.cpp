#include "jointmap/model.hpp"

#include <cmath>

#include "jointmap/error.hpp"

namespace jointmap {

namespace {

void check_index(const ModelSpec& spec, std::size_t i, std::size_t j, std::size_t k) {
  const auto& d = spec.dims();
  if (i >= d.areas || j >= d.periods || k >= d.diseases) {
    throw Error(ErrorCode::domain, "cell index (" + std::to_string(i) + ", " + std::to_string(j) + ", " +
                                       std::to_string(k) + ") out of range");
  }
}

Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

}  // namespace

Variant parse_variant(std::string_view name) {
  if (name == "A" || name == "a") return Variant::A;
  if (name == "B" || name == "b") return Variant::B;
  if (name == "C" || name == "c") return Variant::C;
  if (name == "D" || name == "d") return Variant::D;
  throw Error(ErrorCode::value, "unknown model variant '" + std::string(name) + "' (expected A, B, C or D)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::A: return "A";
    case Variant::B: return "B";
    case Variant::C: return "C";
    case Variant::D: return "D";
  }
  return "?";
}

ModelSpec::ModelSpec(Variant variant, ComponentMap components, Dims dims)
    : variant_{variant}, components_{std::move(components)}, dims_{dims} {
  if (dims_.areas == 0 || dims_.periods == 0 || dims_.diseases == 0) {
    throw Error(ErrorCode::dimension_mismatch, "model dimensions must be positive");
  }
  if (components_.n_diseases() != dims_.diseases) {
    throw Error(ErrorCode::dimension_mismatch, "component map covers " + std::to_string(components_.n_diseases()) +
                                                   " diseases but the data has " + std::to_string(dims_.diseases));
  }
}

HyperParameters HyperParameters::defaults(std::size_t n_diseases) {
  HyperParameters h;
  h.wishart_scale = SpdMatrix::identity(ix(n_diseases));
  h.wishart_df = static_cast<double>(n_diseases);
  return h;
}

void HyperParameters::validate(std::size_t n_diseases) const {
  if (!(gamma_shape > 0.0) || !(gamma_rate > 0.0)) {
    throw Error(ErrorCode::domain, "gamma hyperprior shape and rate must be positive");
  }
  if (!(weight_prior_variance > 0.0)) throw Error(ErrorCode::domain, "weight prior variance must be positive");
  if (alpha_prior_variance && !(*alpha_prior_variance > 0.0)) {
    throw Error(ErrorCode::domain, "intercept prior variance must be positive");
  }
  if (static_cast<std::size_t>(wishart_scale.dim()) != n_diseases) {
    throw Error(ErrorCode::dimension_mismatch, "Wishart scale must be K x K");
  }
  if (!(wishart_df >= static_cast<double>(n_diseases))) {
    throw Error(ErrorCode::domain, "Wishart degrees of freedom must be at least K");
  }
}

ParameterState ParameterState::zeros(const ModelSpec& spec) {
  const auto& d = spec.dims();
  const auto l = ix(spec.n_components());
  ParameterState s;
  s.alpha = Eigen::VectorXd::Zero(ix(d.diseases));
  s.lambda = Eigen::MatrixXd::Zero(l, ix(d.areas));
  s.phi = Eigen::MatrixXd::Zero(l, ix(d.periods));
  s.log_delta = Eigen::MatrixXd::Zero(l, ix(d.diseases));
  s.log_psi = Eigen::MatrixXd::Zero(l, ix(d.diseases));
  s.tau_lambda = Eigen::VectorXd::Ones(l);
  s.tau_phi = Eigen::VectorXd::Ones(l);
  if (spec.has_interaction()) {
    s.eta = Eigen::MatrixXd::Zero(ix(d.areas), ix(d.periods));
    s.tau_eta = 1.0;
  }
  if (spec.has_heterogeneity()) {
    s.epsilon = Eigen::MatrixXd::Zero(ix(d.areas * d.periods), ix(d.diseases));
    s.prec_epsilon = SpdMatrix::identity(ix(d.diseases));
  }
  return s;
}

bool ParameterState::operator==(const ParameterState& o) const {
  auto same_opt_mat = [](const std::optional<Eigen::MatrixXd>& a, const std::optional<Eigen::MatrixXd>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || *a == *b;
  };
  if (prec_epsilon.has_value() != o.prec_epsilon.has_value()) return false;
  if (prec_epsilon && !(prec_epsilon->matrix() == o.prec_epsilon->matrix())) return false;
  return alpha == o.alpha && lambda == o.lambda && phi == o.phi && log_delta == o.log_delta &&
         log_psi == o.log_psi && same_opt_mat(eta, o.eta) && same_opt_mat(epsilon, o.epsilon) &&
         tau_lambda == o.tau_lambda && tau_phi == o.tau_phi && tau_eta == o.tau_eta;
}

std::vector<std::string> invariant_violations(const ParameterState& s, const ModelSpec& spec,
                                              bool require_centered, double tolerance) {
  std::vector<std::string> out;
  const auto& d = spec.dims();
  const auto& cm = spec.components();
  const auto l = ix(spec.n_components());
  auto shape = [&](const Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
      out.push_back(std::string(name) + " has wrong shape");
      return false;
    }
    if (!m.allFinite()) out.push_back(std::string(name) + " has non-finite entries");
    return true;
  };
  shape(s.alpha, ix(d.diseases), 1, "alpha");
  const bool lambda_ok = shape(s.lambda, l, ix(d.areas), "lambda");
  const bool phi_ok = shape(s.phi, l, ix(d.periods), "phi");
  const bool delta_ok = shape(s.log_delta, l, ix(d.diseases), "log_delta");
  const bool psi_ok = shape(s.log_psi, l, ix(d.diseases), "log_psi");
  if (shape(s.tau_lambda, l, 1, "tau_lambda") && !(s.tau_lambda.array() > 0.0).all()) {
    out.emplace_back("tau_lambda must be positive");
  }
  if (shape(s.tau_phi, l, 1, "tau_phi") && !(s.tau_phi.array() > 0.0).all()) {
    out.emplace_back("tau_phi must be positive");
  }

  if (s.eta.has_value() != spec.has_interaction()) out.emplace_back("eta presence does not match variant");
  if (s.tau_eta.has_value() != spec.has_interaction()) out.emplace_back("tau_eta presence does not match variant");
  if (s.eta) shape(*s.eta, ix(d.areas), ix(d.periods), "eta");
  if (s.tau_eta && !(*s.tau_eta > 0.0 && std::isfinite(*s.tau_eta))) out.emplace_back("tau_eta must be positive");

  if (s.epsilon.has_value() != spec.has_heterogeneity()) out.emplace_back("epsilon presence does not match variant");
  if (s.prec_epsilon.has_value() != spec.has_heterogeneity()) {
    out.emplace_back("prec_epsilon presence does not match variant");
  }
  if (s.epsilon) shape(*s.epsilon, ix(d.areas * d.periods), ix(d.diseases), "epsilon");
  if (s.prec_epsilon && static_cast<std::size_t>(s.prec_epsilon->dim()) != d.diseases) {
    out.emplace_back("prec_epsilon has wrong dimension");
  }

  if (delta_ok && psi_ok) {
    for (Eigen::Index c = 0; c < l; ++c)
      for (std::size_t k = 0; k < d.diseases; ++k)
        if (!cm.includes(static_cast<std::size_t>(c), k) && (s.log_delta(c, ix(k)) != 0.0 || s.log_psi(c, ix(k)) != 0.0)) {
          out.push_back("log weight set for disease " + std::to_string(k) + " outside component " +
                        std::to_string(c));
        }
  }

  if (require_centered && lambda_ok && phi_ok && delta_ok && psi_ok) {
    for (Eigen::Index c = 0; c < l; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      if (std::abs(s.lambda.row(c).sum()) > tolerance * std::max(1.0, s.lambda.row(c).cwiseAbs().sum())) {
        out.push_back("lambda[" + std::to_string(cc) + "] does not sum to zero");
      }
      if (std::abs(s.phi.row(c).sum()) > tolerance * std::max(1.0, s.phi.row(c).cwiseAbs().sum())) {
        out.push_back("phi[" + std::to_string(cc) + "] does not sum to zero");
      }
      double sd = 0.0, sp = 0.0, ad = 0.0, ap = 0.0;
      for (auto k : cm.members(cc)) {
        sd += s.log_delta(c, ix(k));
        sp += s.log_psi(c, ix(k));
        ad += std::abs(s.log_delta(c, ix(k)));
        ap += std::abs(s.log_psi(c, ix(k)));
      }
      if (std::abs(sd) > tolerance * std::max(1.0, ad)) {
        out.push_back("log_delta[" + std::to_string(cc) + "] does not sum to zero");
      }
      if (std::abs(sp) > tolerance * std::max(1.0, ap)) {
        out.push_back("log_psi[" + std::to_string(cc) + "] does not sum to zero");
      }
    }
  }
  return out;
}

double linear_predictor(const ParameterState& s, const ModelSpec& spec, std::size_t i, std::size_t j,
                        std::size_t k) {
  check_index(spec, i, j, k);
  const auto& cm = spec.components();
  double mu = 0.0;
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    if (!cm.includes(l, k)) continue;
    mu += s.lambda(ix(l), ix(i)) * std::exp(s.log_delta(ix(l), ix(k)));
    mu += s.phi(ix(l), ix(j)) * std::exp(s.log_psi(ix(l), ix(k)));
  }
  if (spec.has_interaction()) mu += (*s.eta)(ix(i), ix(j));
  if (spec.has_heterogeneity()) mu += (*s.epsilon)(ix(i * spec.dims().periods + j), ix(k));
  return mu;
}

double relative_risk(const ParameterState& s, const ModelSpec& spec, std::size_t i, std::size_t j,
                     std::size_t k) {
  const double mu = linear_predictor(s, spec, i, j, k);
  return std::exp(s.alpha(ix(k)) + mu);
}

std::vector<double> log_relative_risks(const ParameterState& s, const ModelSpec& spec) {
  const auto& d = spec.dims();
  const auto& cm = spec.components();
  const Eigen::MatrixXd delta = s.log_delta.array().exp();
  const Eigen::MatrixXd psi = s.log_psi.array().exp();
  std::vector<double> out(d.cells());
  for (std::size_t i = 0; i < d.areas; ++i)
    for (std::size_t j = 0; j < d.periods; ++j)
      for (std::size_t k = 0; k < d.diseases; ++k) {
        double v = s.alpha(ix(k));
        for (std::size_t l = 0; l < cm.n_components(); ++l) {
          if (!cm.includes(l, k)) continue;
          v += s.lambda(ix(l), ix(i)) * delta(ix(l), ix(k)) + s.phi(ix(l), ix(j)) * psi(ix(l), ix(k));
        }
        if (s.eta) v += (*s.eta)(ix(i), ix(j));
        if (s.epsilon) v += (*s.epsilon)(ix(i * d.periods + j), ix(k));
        out[d.index(i, j, k)] = v;
      }
  return out;
}

double poisson_loglik(const CancerDataset& data, const std::vector<double>& log_risks) {
  const auto& y = data.observed();
  const auto& e = data.expected();
  if (log_risks.size() != y.size()) throw Error(ErrorCode::dimension_mismatch, "log-risk vector has wrong length");
  double total = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    const auto yc = static_cast<double>(y[c]);
    const double log_mean = std::log(e[c]) + log_risks[c];
    total += yc * log_mean - std::exp(log_mean) - std::lgamma(yc + 1.0);
  }
  return total;
}

double poisson_loglik(const CancerDataset& data, const ParameterState& state, const ModelSpec& spec) {
  if (!(data.dims() == spec.dims())) throw Error(ErrorCode::dimension_mismatch, "dataset does not match model");
  return poisson_loglik(data, log_relative_risks(state, spec));
}

double log_prior(const ParameterState& s, const ModelSpec& spec, const HyperParameters& hyper,
                 const StructureMatrix& spatial, const StructureMatrix& temporal) {
  const auto& d = spec.dims();
  const auto& cm = spec.components();
  double lp = 0.0;
  if (hyper.alpha_prior_variance) {
    for (Eigen::Index k = 0; k < s.alpha.size(); ++k) lp += normal_logpdf(s.alpha(k), 0.0, *hyper.alpha_prior_variance);
  }
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    const auto li = ix(l);
    lp += car_logpdf(s.lambda.row(li).transpose(), s.tau_lambda(li), spatial);
    lp += rw1_logpdf(s.phi.row(li).transpose(), s.tau_phi(li), temporal);
    for (auto k : cm.members(l)) {
      lp += normal_logpdf(s.log_delta(li, ix(k)), 0.0, hyper.weight_prior_variance);
      lp += normal_logpdf(s.log_psi(li, ix(k)), 0.0, hyper.weight_prior_variance);
    }
    lp += gamma_logpdf(s.tau_lambda(li), hyper.gamma_shape, hyper.gamma_rate);
    lp += gamma_logpdf(s.tau_phi(li), hyper.gamma_shape, hyper.gamma_rate);
  }
  if (spec.has_interaction()) {
    const double tau = *s.tau_eta;
    const double n = static_cast<double>(d.areas * d.periods);
    lp += 0.5 * n * std::log(tau) - 0.5 * n * 1.8378770664093454836 - 0.5 * tau * s.eta->squaredNorm();
    lp += gamma_logpdf(tau, hyper.gamma_shape, hyper.gamma_rate);
  }
  if (spec.has_heterogeneity()) {
    const auto& prec = *s.prec_epsilon;
    for (Eigen::Index r = 0; r < s.epsilon->rows(); ++r) lp += mvn_logpdf(s.epsilon->row(r).transpose(), prec);
    lp += wishart_logpdf(prec, hyper.wishart_scale, hyper.wishart_df);
  }
  return lp;
}

double log_posterior(const CancerDataset& data, const ParameterState& state, const ModelSpec& spec,
                     const HyperParameters& hyper, const StructureMatrix& spatial,
                     const StructureMatrix& temporal) {
  return poisson_loglik(data, state, spec) + log_prior(state, spec, hyper, spatial, temporal);
}

double deviance(const CancerDataset& data, const ParameterState& state, const ModelSpec& spec) {
  return -2.0 * poisson_loglik(data, state, spec);
}

double deviance(const CancerDataset& data, const std::vector<double>& log_risks) {
  return -2.0 * poisson_loglik(data, log_risks);
}

std::vector<std::string> parameter_names(const ModelSpec& spec) {
  const auto& d = spec.dims();
  const auto& cm = spec.components();
  const auto idx = [](auto... v) {
    std::string s;
    ((s += "[" + std::to_string(v) + "]"), ...);
    return s;
  };
  std::vector<std::string> names;
  for (std::size_t k = 0; k < d.diseases; ++k) names.push_back("alpha" + idx(k));
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (std::size_t i = 0; i < d.areas; ++i) names.push_back("lambda" + idx(l, i));
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (std::size_t j = 0; j < d.periods; ++j) names.push_back("phi" + idx(l, j));
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (auto k : cm.members(l)) names.push_back("log_delta" + idx(l, k));
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (auto k : cm.members(l)) names.push_back("log_psi" + idx(l, k));
  if (spec.has_interaction()) {
    for (std::size_t i = 0; i < d.areas; ++i)
      for (std::size_t j = 0; j < d.periods; ++j) names.push_back("eta" + idx(i, j));
  }
  if (spec.has_heterogeneity()) {
    for (std::size_t i = 0; i < d.areas; ++i)
      for (std::size_t j = 0; j < d.periods; ++j)
        for (std::size_t k = 0; k < d.diseases; ++k) names.push_back("epsilon" + idx(i, j, k));
  }
  for (std::size_t l = 0; l < cm.n_components(); ++l) names.push_back("tau_lambda" + idx(l));
  for (std::size_t l = 0; l < cm.n_components(); ++l) names.push_back("tau_phi" + idx(l));
  if (spec.has_interaction()) names.emplace_back("tau_eta");
  if (spec.has_heterogeneity()) {
    for (std::size_t a = 0; a < d.diseases; ++a)
      for (std::size_t b = a; b < d.diseases; ++b) names.push_back("prec_epsilon" + idx(a, b));
  }
  return names;
}

std::vector<double> flatten(const ParameterState& s, const ModelSpec& spec) {
  const auto& d = spec.dims();
  const auto& cm = spec.components();
  std::vector<double> v;
  for (std::size_t k = 0; k < d.diseases; ++k) v.push_back(s.alpha(ix(k)));
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (std::size_t i = 0; i < d.areas; ++i) v.push_back(s.lambda(ix(l), ix(i)));
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (std::size_t j = 0; j < d.periods; ++j) v.push_back(s.phi(ix(l), ix(j)));
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (auto k : cm.members(l)) v.push_back(s.log_delta(ix(l), ix(k)));
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (auto k : cm.members(l)) v.push_back(s.log_psi(ix(l), ix(k)));
  if (spec.has_interaction()) {
    for (std::size_t i = 0; i < d.areas; ++i)
      for (std::size_t j = 0; j < d.periods; ++j) v.push_back((*s.eta)(ix(i), ix(j)));
  }
  if (spec.has_heterogeneity()) {
    for (std::size_t i = 0; i < d.areas; ++i)
      for (std::size_t j = 0; j < d.periods; ++j)
        for (std::size_t k = 0; k < d.diseases; ++k) v.push_back((*s.epsilon)(ix(i * d.periods + j), ix(k)));
  }
  for (std::size_t l = 0; l < cm.n_components(); ++l) v.push_back(s.tau_lambda(ix(l)));
  for (std::size_t l = 0; l < cm.n_components(); ++l) v.push_back(s.tau_phi(ix(l)));
  if (spec.has_interaction()) v.push_back(*s.tau_eta);
  if (spec.has_heterogeneity()) {
    for (std::size_t a = 0; a < d.diseases; ++a)
      for (std::size_t b = a; b < d.diseases; ++b) v.push_back((*s.prec_epsilon)(ix(a), ix(b)));
  }
  return v;
}

}  // namespace jointmap
