#pragma once

// Small models, datasets and states shared by the unit tests.

#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "jointmap/dataset.hpp"
#include "jointmap/error.hpp"
#include "jointmap/model.hpp"

namespace fixture {

inline jointmap::ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const jointmap::Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return jointmap::ErrorCode::io;
}

inline std::vector<std::string> labels(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Three diseases, two components: {0, 1, 2} and {1, 2}.
inline jointmap::ComponentMap three_disease_map() {
  return jointmap::ComponentMap({"first", "second"}, {{true, true, true}, {false, true, true}});
}

inline jointmap::CancerDataset random_dataset(jointmap::Dims d, std::mt19937_64& rng, double mean = 20.0) {
  std::uniform_real_distribution<double> e_dist(0.5 * mean, 1.5 * mean);
  jointmap::Counts y(d);
  jointmap::Expected e(d);
  for (std::size_t c = 0; c < d.cells(); ++c) {
    e[c] = e_dist(rng);
    y[c] = std::poisson_distribution<long long>(e[c])(rng);
  }
  return jointmap::CancerDataset(y, e, labels("a", d.areas), labels("p", d.periods), labels("d", d.diseases));
}

// Arbitrary (not centered) state with every block filled.
inline jointmap::ParameterState random_state(const jointmap::ModelSpec& spec, std::mt19937_64& rng,
                                             double sd = 0.3) {
  std::normal_distribution<double> z(0.0, sd);
  std::uniform_real_distribution<double> pos(0.5, 3.0);
  auto s = jointmap::ParameterState::zeros(spec);
  const auto fill = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  };
  for (Eigen::Index k = 0; k < s.alpha.size(); ++k) s.alpha(k) = z(rng);
  fill(s.lambda);
  fill(s.phi);
  const auto& cm = spec.components();
  for (std::size_t l = 0; l < cm.n_components(); ++l)
    for (auto k : cm.members(l)) {
      s.log_delta(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = z(rng);
      s.log_psi(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = z(rng);
    }
  if (s.eta) fill(*s.eta);
  if (s.epsilon) fill(*s.epsilon);
  for (Eigen::Index l = 0; l < s.tau_lambda.size(); ++l) {
    s.tau_lambda(l) = pos(rng);
    s.tau_phi(l) = pos(rng);
  }
  if (s.tau_eta) s.tau_eta = pos(rng);
  if (s.prec_epsilon) {
    const auto k = s.prec_epsilon->dim();
    Eigen::MatrixXd a(k, k);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
    s.prec_epsilon = jointmap::SpdMatrix(Eigen::MatrixXd(a * a.transpose() + Eigen::MatrixXd::Identity(k, k)));
  }
  return s;
}

}  // namespace fixture
