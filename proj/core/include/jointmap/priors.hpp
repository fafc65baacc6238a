#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "jointmap/graph.hpp"

namespace jointmap {

// One generator per chain; never shared between threads.
using Rng = std::mt19937_64;

// Dense symmetric positive-definite matrix with its Cholesky factor cached.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  // Throws ErrorCode::domain unless `m` is square, symmetric to 1e-12 (relative
  // to its largest entry) and Cholesky-factorizable with positive pivots.
  explicit SpdMatrix(Eigen::MatrixXd m);

  static SpdMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return matrix_(r, c); }
  // Lower-triangular L with matrix = L L'.
  Eigen::MatrixXd cholesky_lower() const { return llt_.matrixL(); }
  double log_det() const;
  Eigen::MatrixXd inverse() const;
  // x' M x
  double quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& x) const { return x.dot(matrix_ * x); }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Intrinsic CAR: (rank(Q)/2) log tau - (tau/2) x'Qx. The tau-free
// -(rank/2) log(2 pi) constant and the generalized determinant of Q are
// dropped.
double car_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x, double tau, const StructureMatrix& q);

// First-order random walk; car_logpdf with the path Laplacian.
double rw1_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x, double tau, const StructureMatrix& r);

double normal_logpdf(double x, double mean, double variance);

// Shape-rate parametrization, mean shape/rate.
double gamma_logpdf(double x, double shape, double rate);

// Zero-mean multivariate normal given its precision matrix.
double mvn_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x, const SpdMatrix& precision);

// Wishart density of `x` in the convention where draws have mean df * scale^-1
// (scale acts as a rate matrix).
double wishart_logpdf(const SpdMatrix& x, const SpdMatrix& scale, double df);

// log of the multivariate gamma function Gamma_p(a).
double log_multigamma(double a, Eigen::Index p);

double sample_normal(double mean, double sd, Rng& rng);
double sample_gamma(double shape, double rate, Rng& rng);
// Bartlett construction; E[draw] = df * scale^-1. Requires df >= dim.
SpdMatrix sample_wishart(const SpdMatrix& scale, double df, Rng& rng);
double sample_uniform(Rng& rng);
std::int64_t sample_poisson(double mean, Rng& rng);

// Seed for chain `chain_index` derived from a run seed with splitmix64:
// splitmix64(seed + (chain_index + 1) * 0x9E3779B97F4A7C15).
std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t chain_index) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace jointmap
