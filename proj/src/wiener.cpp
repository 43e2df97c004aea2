#include "sar/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sar {

double CovarianceSpec::eigenvalue(std::size_t j) const {
  if (kind == Kind::Identity) return 1.0;
  return std::pow(static_cast<double>(j), -beta);
}

void CovarianceSpec::validate(const GridSpec& grid) const {
  if (kind == Kind::Identity) return;
  if (!(beta > 1.0)) throw std::invalid_argument("covariance: decay exponent beta must exceed 1");
  if (terms < 1) throw std::invalid_argument("covariance: at least one term required");
  if (terms > grid.size()) throw std::invalid_argument("covariance: truncation exceeds node count");
}

std::string to_string(CovarianceSpec::Kind kind) {
  return kind == CovarianceSpec::Kind::Identity ? "identity" : "eigen_decay";
}

std::string to_string(CovarianceSpec::Basis basis) {
  return basis == CovarianceSpec::Basis::Coordinate ? "coordinate" : "cosine";
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix_seed(mix_seed(master) ^ (tag * 0xd6e8feb86659fd93ULL));
}

std::mt19937_64 RngStream::engine() const {
  std::uint64_t h = mix_seed(seed);
  h = mix_seed(h ^ (particle * 0xa0761d6478bd642fULL + 1));
  h = mix_seed(h ^ (step * 0xe7037ed1a0b428dbULL + 2));
  return std::mt19937_64(h);
}

IncrementSampler::IncrementSampler(const CovarianceSpec& cov, const GridSpec& grid) : cov_(cov), grid_(grid) {
  grid_.validate();
  cov_.validate(grid_);
  const std::size_t count = cov_.term_count(grid_);
  sqrt_lambda_.resize(count);
  for (std::size_t j = 0; j < count; ++j) sqrt_lambda_[j] = std::sqrt(cov_.eigenvalue(j + 1));

  if (cov_.kind == CovarianceSpec::Kind::Identity || cov_.basis == CovarianceSpec::Basis::Coordinate) return;

  const int n = grid_.n_per_axis;
  if (grid_.dim == 1) {
    for (std::size_t j = 0; j < count; ++j) modes_.push_back({static_cast<int>(j), 0});
  } else {
    std::vector<Mode> all;
    all.reserve(grid_.size());
    for (int k1 = 0; k1 < n; ++k1)
      for (int k0 = 0; k0 < n; ++k0) all.push_back({k0, k1});
    std::stable_sort(all.begin(), all.end(), [](const Mode& a, const Mode& b) {
      return a.k0 * a.k0 + a.k1 * a.k1 < b.k0 * b.k0 + b.k1 * b.k1;
    });
    modes_.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
  }
  for (const Mode& m : modes_) kmax_ = std::max({kmax_, m.k0, m.k1});

  axis_basis_.resize(n, kmax_ + 1);
  for (int k = 0; k <= kmax_; ++k) {
    const double scale = (k == 0 || k == n - 1) ? 1.0 : std::numbers::sqrt2;
    for (int i = 0; i < n; ++i)
      axis_basis_(i, k) = scale * std::cos(std::numbers::pi * k * i / (n - 1));
  }
}

GridVector IncrementSampler::sample(double dt, const RngStream& rng) const {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
  auto engine = rng.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  const double root_dt = std::sqrt(dt);
  const std::size_t count = sqrt_lambda_.size();

  GridVector out(grid_);
  if (modes_.empty()) {
    for (std::size_t j = 0; j < count; ++j) out[j] = root_dt * sqrt_lambda_[j] * normal(engine);
    return out;
  }

  if (grid_.dim == 1) {
    Eigen::VectorXd coeff(static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) coeff[j] = root_dt * sqrt_lambda_[j] * normal(engine);
    out.values = axis_basis_.leftCols(static_cast<Eigen::Index>(count)) * coeff;
    return out;
  }

  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(kmax_ + 1, kmax_ + 1);
  for (std::size_t j = 0; j < count; ++j) coeff(modes_[j].k0, modes_[j].k1) = root_dt * sqrt_lambda_[j] * normal(engine);
  const Eigen::MatrixXd field = axis_basis_ * coeff * axis_basis_.transpose();
  out.values = Eigen::Map<const Eigen::VectorXd>(field.data(), field.size());
  return out;
}

double IncrementSampler::expected_squared_norm(double dt) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < sqrt_lambda_.size(); ++j) {
    const double basis_norm2 = modes_.empty() ? grid_.weight(j) : grid_.measure();
    acc += sqrt_lambda_[j] * sqrt_lambda_[j] * basis_norm2;
  }
  return dt * acc;
}

GridVector sample_increment(const CovarianceSpec& cov, double dt, const RngStream& rng, const GridSpec& grid) {
  return IncrementSampler(cov, grid).sample(dt, rng);
}

}  // namespace sar
