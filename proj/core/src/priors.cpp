#include "jointmap/priors.hpp"

#include <cmath>
#include <numbers>

#include "jointmap/error.hpp"

namespace jointmap {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
}

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : matrix_{std::move(m)} {
  if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols()) {
    throw Error(ErrorCode::domain, "SPD matrix must be square and non-empty");
  }
  if (!matrix_.allFinite()) throw Error(ErrorCode::domain, "SPD matrix has non-finite entries");
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::domain, "matrix is not symmetric");
  }
  llt_.compute(matrix_);
  if (llt_.info() != Eigen::Success) throw Error(ErrorCode::domain, "matrix is not positive definite");
  const Eigen::MatrixXd l = llt_.matrixL();
  if (!(l.diagonal().array() > 0.0).all()) throw Error(ErrorCode::domain, "matrix is not positive definite");
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) { return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim)); }

double SpdMatrix::log_det() const {
  const Eigen::MatrixXd l = llt_.matrixL();
  return 2.0 * l.diagonal().array().log().sum();
}

Eigen::MatrixXd SpdMatrix::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

double car_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x, double tau, const StructureMatrix& q) {
  if (static_cast<std::size_t>(x.size()) != q.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "CAR field length does not match structure matrix");
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::domain, "CAR precision must be positive");
  return 0.5 * static_cast<double>(q.rank) * std::log(tau) - 0.5 * tau * q.quadratic_form(x);
}

double rw1_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x, double tau, const StructureMatrix& r) {
  return car_logpdf(x, tau, r);
}

double normal_logpdf(double x, double mean, double variance) {
  if (!(variance > 0.0)) throw Error(ErrorCode::domain, "normal variance must be positive");
  const double z = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + z * z / variance);
}

double gamma_logpdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw Error(ErrorCode::domain, "gamma shape and rate must be positive");
  if (!(x > 0.0)) throw Error(ErrorCode::domain, "gamma density evaluated at non-positive value");
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double mvn_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x, const SpdMatrix& precision) {
  if (x.size() != precision.dim()) throw Error(ErrorCode::dimension_mismatch, "MVN dimension mismatch");
  const auto k = static_cast<double>(x.size());
  return 0.5 * precision.log_det() - 0.5 * k * kLog2Pi - 0.5 * precision.quadratic_form(x);
}

double log_multigamma(double a, Eigen::Index p) {
  const auto pd = static_cast<double>(p);
  double out = 0.25 * pd * (pd - 1.0) * std::log(std::numbers::pi);
  for (Eigen::Index j = 0; j < p; ++j) out += std::lgamma(a - 0.5 * static_cast<double>(j));
  return out;
}

double wishart_logpdf(const SpdMatrix& x, const SpdMatrix& scale, double df) {
  const auto p = x.dim();
  if (scale.dim() != p) throw Error(ErrorCode::dimension_mismatch, "Wishart dimension mismatch");
  const auto pd = static_cast<double>(p);
  if (!(df > pd - 1.0)) throw Error(ErrorCode::domain, "Wishart degrees of freedom too small");
  const double trace = (scale.matrix().cwiseProduct(x.matrix())).sum();
  return 0.5 * df * scale.log_det() + 0.5 * (df - pd - 1.0) * x.log_det() - 0.5 * trace -
         0.5 * df * pd * std::numbers::ln2 - log_multigamma(0.5 * df, p);
}

double sample_normal(double mean, double sd, Rng& rng) {
  if (!(sd >= 0.0)) throw Error(ErrorCode::domain, "normal sd must be nonnegative");
  std::normal_distribution<double> dist(0.0, 1.0);
  return mean + sd * dist(rng);
}

double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw Error(ErrorCode::domain, "gamma shape and rate must be positive");
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(rng);
}

SpdMatrix sample_wishart(const SpdMatrix& scale, double df, Rng& rng) {
  const auto p = scale.dim();
  if (!(df >= static_cast<double>(p))) throw Error(ErrorCode::domain, "Wishart df must be at least the dimension");
  // Draw = L A A' L' with L L' = scale^-1 and A the Bartlett factor.
  const Eigen::MatrixXd cov = scale.inverse();
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(sym).matrixL();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi(df - static_cast<double>(i));
    a(i, i) = std::sqrt(chi(rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = sample_normal(0.0, 1.0, rng);
  }
  const Eigen::MatrixXd la = l * a;
  Eigen::MatrixXd draw = la * la.transpose();
  draw = 0.5 * (draw + draw.transpose()).eval();
  return SpdMatrix(std::move(draw));
}

double sample_uniform(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

std::int64_t sample_poisson(double mean, Rng& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw Error(ErrorCode::domain, "Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t chain_index) noexcept {
  return splitmix64(seed + (chain_index + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace jointmap
