#include <doctest.h>

#include <cmath>
#include <random>
#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "jointmap/mcmc.hpp"
#include "jointmap/model.hpp"
#include "oracles.hpp"

using namespace jointmap;
using fixture::code_of;

namespace {

const Dims kDims{4, 3, 3};

ModelSpec spec_for(Variant v) { return ModelSpec(v, fixture::three_disease_map(), kDims); }

// Term-by-term sum written out from the component layout.
double predictor_oracle(const ParameterState& s, const ModelSpec& spec, std::size_t i, std::size_t j,
                        std::size_t k) {
  double mu = 0.0;
  for (std::size_t l = 0; l < spec.n_components(); ++l) {
    if (!spec.components().includes(l, k)) continue;
    const auto L = static_cast<Eigen::Index>(l), K = static_cast<Eigen::Index>(k);
    mu += s.lambda(L, static_cast<Eigen::Index>(i)) * std::exp(s.log_delta(L, K));
    mu += s.phi(L, static_cast<Eigen::Index>(j)) * std::exp(s.log_psi(L, K));
  }
  if (spec.has_interaction()) mu += (*s.eta)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  if (spec.has_heterogeneity())
    mu += (*s.epsilon)(static_cast<Eigen::Index>(i * spec.dims().periods + j), static_cast<Eigen::Index>(k));
  return mu;
}

}  // namespace

TEST_CASE("variant names") {
  CHECK(parse_variant("A") == Variant::A);
  CHECK(parse_variant("d") == Variant::D);
  CHECK(to_string(Variant::C) == "C");
  CHECK(code_of([] { parse_variant("E"); }) == ErrorCode::value);
}

TEST_CASE("spec flags") {
  CHECK_FALSE(spec_for(Variant::A).has_heterogeneity());
  CHECK_FALSE(spec_for(Variant::A).has_interaction());
  CHECK(spec_for(Variant::B).has_heterogeneity());
  CHECK(spec_for(Variant::C).has_interaction());
  CHECK(spec_for(Variant::D).has_heterogeneity());
  CHECK(spec_for(Variant::D).has_interaction());
  CHECK(code_of([] { ModelSpec(Variant::A, fixture::three_disease_map(), Dims{4, 3, 5}); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("linear predictor worked example") {
  const auto spec = spec_for(Variant::A);
  auto s = ParameterState::zeros(spec);
  s.lambda(0, 1) = 0.4;
  s.lambda(1, 1) = -0.2;
  s.phi(0, 2) = 0.1;
  s.log_delta(1, 2) = std::log(2.0);
  s.alpha(2) = 0.05;
  // disease 2 is in both components: 0.4 * 1 + (-0.2) * 2 + 0.1 * 1
  CHECK(linear_predictor(s, spec, 1, 2, 2) == doctest::Approx(0.1).epsilon(1e-15));
  // disease 0 is in the first component only
  CHECK(linear_predictor(s, spec, 1, 2, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(relative_risk(s, spec, 1, 2, 2) == doctest::Approx(std::exp(0.15)).epsilon(1e-15));
  CHECK(relative_risk(s, spec, 0, 0, 1) == 1.0);
}

TEST_CASE("linear predictor matches a term-by-term oracle for every variant") {
  std::mt19937_64 rng(8);
  for (auto v : {Variant::A, Variant::B, Variant::C, Variant::D}) {
    const auto spec = spec_for(v);
    for (int rep = 0; rep < 5; ++rep) {
      const auto s = fixture::random_state(spec, rng);
      const auto lr = log_relative_risks(s, spec);
      for (std::size_t i = 0; i < kDims.areas; ++i)
        for (std::size_t j = 0; j < kDims.periods; ++j)
          for (std::size_t k = 0; k < kDims.diseases; ++k) {
            const double mu = linear_predictor(s, spec, i, j, k);
            CHECK(mu == doctest::Approx(predictor_oracle(s, spec, i, j, k)).epsilon(1e-14));
            CHECK(std::abs(lr[kDims.index(i, j, k)] - s.alpha(static_cast<Eigen::Index>(k)) - mu) < 1e-12);
          }
    }
  }
}

TEST_CASE("variants drop the terms they do not have") {
  std::mt19937_64 rng(9);
  const auto full = spec_for(Variant::D);
  const auto s = fixture::random_state(full, rng);
  const auto spec_a = spec_for(Variant::A);
  for (std::size_t i = 0; i < kDims.areas; ++i)
    for (std::size_t j = 0; j < kDims.periods; ++j)
      for (std::size_t k = 0; k < kDims.diseases; ++k) {
        const double extra = (*s.eta)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                             (*s.epsilon)(static_cast<Eigen::Index>(i * kDims.periods + j), static_cast<Eigen::Index>(k));
        CHECK(linear_predictor(s, full, i, j, k) - extra ==
              doctest::Approx(linear_predictor(s, spec_a, i, j, k)).epsilon(1e-13));
      }
}

TEST_CASE("poisson log-likelihood worked examples") {
  const Dims d{1, 1, 1};
  const auto one_cell = [&](long long y, double e) {
    return CancerDataset(Counts(d, y), Expected(d, e), {"a"}, {"p"}, {"x"});
  };
  CHECK(poisson_loglik(one_cell(0, 1.0), std::vector<double>{0.0}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(poisson_loglik(one_cell(2, 1.0), std::vector<double>{0.0}) ==
        doctest::Approx(-1.0 - std::log(2.0)).epsilon(1e-14));
  CHECK(poisson_loglik(one_cell(2, 1.0), std::vector<double>{0.0}) == doctest::Approx(-1.693147).epsilon(1e-6));
  CHECK(deviance(one_cell(0, 1.0), std::vector<double>{0.0}) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("poisson log-likelihood matches a naive pmf sum") {
  std::mt19937_64 rng(10);
  for (auto v : {Variant::A, Variant::D}) {
    const auto spec = spec_for(v);
    const auto data = fixture::random_dataset(kDims, rng);
    const auto s = fixture::random_state(spec, rng);
    double expected = 0.0;
    for (std::size_t i = 0; i < kDims.areas; ++i)
      for (std::size_t j = 0; j < kDims.periods; ++j)
        for (std::size_t k = 0; k < kDims.diseases; ++k) {
          const double theta = std::exp(s.alpha(static_cast<Eigen::Index>(k)) + predictor_oracle(s, spec, i, j, k));
          expected += oracle::poisson_log_pmf(data.observed()(i, j, k), data.expected()(i, j, k) * theta);
        }
    CHECK(poisson_loglik(data, s, spec) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(deviance(data, s, spec) == doctest::Approx(-2.0 * expected).epsilon(1e-12));
    CHECK(poisson_loglik(data, log_relative_risks(s, spec)) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("log prior composition") {
  std::mt19937_64 rng(12);
  const auto q = structure_matrix(path_graph(kDims.areas));
  const auto r = rw1_structure(kDims.periods);
  auto hyper = HyperParameters::defaults(kDims.diseases);

  SUBCASE("variant A sums CAR, RW1, weight and gamma terms") {
    const auto spec = spec_for(Variant::A);
    const auto s = fixture::random_state(spec, rng);
    double expected = 0.0;
    const auto& cm = spec.components();
    for (Eigen::Index l = 0; l < 2; ++l) {
      expected += car_logpdf(s.lambda.row(l).transpose(), s.tau_lambda(l), q);
      expected += rw1_logpdf(s.phi.row(l).transpose(), s.tau_phi(l), r);
      expected += gamma_logpdf(s.tau_lambda(l), 0.5, 0.0005) + gamma_logpdf(s.tau_phi(l), 0.5, 0.0005);
      for (auto k : cm.members(static_cast<std::size_t>(l))) {
        expected += normal_logpdf(s.log_delta(l, static_cast<Eigen::Index>(k)), 0.0, 5.0);
        expected += normal_logpdf(s.log_psi(l, static_cast<Eigen::Index>(k)), 0.0, 5.0);
      }
    }
    CHECK(log_prior(s, spec, hyper, q, r) == doctest::Approx(expected).epsilon(1e-13));

    hyper.alpha_prior_variance = 100.0;
    double with_alpha = expected;
    for (Eigen::Index k = 0; k < 3; ++k) with_alpha += normal_logpdf(s.alpha(k), 0.0, 100.0);
    CHECK(log_prior(s, spec, hyper, q, r) == doctest::Approx(with_alpha).epsilon(1e-13));
  }

  SUBCASE("non-member weights are never read") {
    const auto spec = spec_for(Variant::A);
    auto s = fixture::random_state(spec, rng);
    const double before = log_prior(s, spec, hyper, q, r);
    s.log_delta(1, 0) = 123.0;
    s.log_psi(1, 0) = -50.0;
    CHECK(log_prior(s, spec, hyper, q, r) == before);
    CHECK(linear_predictor(s, spec, 0, 0, 0) == doctest::Approx(predictor_oracle(s, spec, 0, 0, 0)));
  }

  SUBCASE("rougher spatial field lowers the prior") {
    const auto spec = spec_for(Variant::A);
    auto s = fixture::random_state(spec, rng);
    const double before = log_prior(s, spec, hyper, q, r);
    s.lambda *= 2.0;
    CHECK(log_prior(s, spec, hyper, q, r) < before);
  }

  SUBCASE("heterogeneity at zero adds the MVN normalizers and the Wishart term") {
    const auto spec_a = spec_for(Variant::A);
    const auto spec_b = spec_for(Variant::B);
    auto s = fixture::random_state(spec_b, rng);
    s.epsilon->setZero();
    const auto& p = *s.prec_epsilon;
    const double rows = static_cast<double>(kDims.areas * kDims.periods);
    const double extra = rows * (0.5 * p.log_det() - 1.5 * std::log(2.0 * M_PI)) +
                         wishart_logpdf(p, hyper.wishart_scale, hyper.wishart_df);
    CHECK(log_prior(s, spec_b, hyper, q, r) - log_prior(s, spec_a, hyper, q, r) ==
          doctest::Approx(extra).epsilon(1e-12));
  }

  SUBCASE("interaction term is an iid normal with precision tau") {
    const auto spec_a = spec_for(Variant::A);
    const auto spec_c = spec_for(Variant::C);
    const auto s = fixture::random_state(spec_c, rng);
    double extra = gamma_logpdf(*s.tau_eta, 0.5, 0.0005);
    for (Eigen::Index c = 0; c < s.eta->size(); ++c) extra += normal_logpdf(s.eta->data()[c], 0.0, 1.0 / *s.tau_eta);
    CHECK(log_prior(s, spec_c, hyper, q, r) - log_prior(s, spec_a, hyper, q, r) ==
          doctest::Approx(extra).epsilon(1e-12));
  }
}

TEST_CASE("log posterior is pure and additive") {
  std::mt19937_64 rng(13);
  const auto spec = spec_for(Variant::D);
  const auto data = fixture::random_dataset(kDims, rng);
  const auto s = fixture::random_state(spec, rng);
  const auto copy = s;
  const auto q = structure_matrix(path_graph(kDims.areas));
  const auto r = rw1_structure(kDims.periods);
  const auto hyper = HyperParameters::defaults(3);
  const double a = log_posterior(data, s, spec, hyper, q, r);
  const double b = log_posterior(data, s, spec, hyper, q, r);
  CHECK(a == b);
  CHECK(s == copy);
  CHECK(a == doctest::Approx(poisson_loglik(data, s, spec) + log_prior(s, spec, hyper, q, r)).epsilon(1e-15));
}

TEST_CASE("recentering leaves every relative risk unchanged") {
  std::mt19937_64 rng(14);
  for (auto v : {Variant::A, Variant::B, Variant::C, Variant::D}) {
    const auto spec = spec_for(v);
    for (int rep = 0; rep < 10; ++rep) {
      const auto s = fixture::random_state(spec, rng, 0.8);
      const auto c = recenter(s, spec);
      CHECK(invariant_violations(c, spec).empty());
      const auto before = log_relative_risks(s, spec);
      const auto after = log_relative_risks(c, spec);
      for (std::size_t cell = 0; cell < before.size(); ++cell) CHECK(std::abs(before[cell] - after[cell]) < 1e-10);
    }
  }
}

TEST_CASE("invariant violations") {
  std::mt19937_64 rng(15);
  const auto spec = spec_for(Variant::D);
  CHECK(invariant_violations(ParameterState::zeros(spec), spec).empty());
  auto s = fixture::random_state(spec, rng);
  CHECK_FALSE(invariant_violations(s, spec).empty());
  CHECK(invariant_violations(s, spec, false).empty());
  s.tau_lambda(0) = -1.0;
  CHECK_FALSE(invariant_violations(s, spec, false).empty());
  auto t = ParameterState::zeros(spec);
  t.eta.reset();
  CHECK_FALSE(invariant_violations(t, spec).empty());
  auto u = ParameterState::zeros(spec);
  u.alpha(0) = std::nan("");
  CHECK_FALSE(invariant_violations(u, spec).empty());
}

TEST_CASE("parameter names and flatten agree") {
  std::mt19937_64 rng(16);
  for (auto v : {Variant::A, Variant::B, Variant::C, Variant::D}) {
    const auto spec = spec_for(v);
    const auto names = parameter_names(spec);
    const auto values = flatten(fixture::random_state(spec, rng), spec);
    CHECK(names.size() == values.size());
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
  }
  const auto spec = spec_for(Variant::D);
  const auto names = parameter_names(spec);
  const std::size_t expected = 3 + 2 * 4 + 2 * 3 + 5 + 5 + 12 + 36 + 2 + 2 + 1 + 6;
  CHECK(names.size() == expected);
  CHECK(names.front() == "alpha[0]");
  CHECK(std::find(names.begin(), names.end(), "log_delta[1][2]") != names.end());
  CHECK(std::find(names.begin(), names.end(), "log_delta[1][0]") == names.end());
  CHECK(std::find(names.begin(), names.end(), "epsilon[3][2][1]") != names.end());
  CHECK(names.back() == "prec_epsilon[2][2]");
}

TEST_CASE("hyperparameter defaults") {
  const auto h = HyperParameters::defaults(7);
  CHECK(h.gamma_shape == 0.5);
  CHECK(h.gamma_rate == 0.0005);
  CHECK(h.wishart_df == 7.0);
  CHECK(h.weight_prior_variance == 5.0);
  CHECK(h.wishart_scale.matrix() == Eigen::MatrixXd::Identity(7, 7));
  CHECK_FALSE(h.alpha_prior_variance.has_value());
  CHECK_NOTHROW(h.validate(7));
  auto bad = h;
  bad.wishart_df = 5.0;
  CHECK_THROWS_AS(bad.validate(7), Error);
}
