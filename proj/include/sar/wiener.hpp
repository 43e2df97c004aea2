#pragma once

#include "sar/grid.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sar {

/// Covariance Q = sum_j lambda_j phi_j (x) phi_j of the driving Wiener process.
///
/// Identity: lambda_j = 1 on the coordinate basis with one term per node, so an
/// increment is i.i.d. N(0, dt) per node.
/// EigenDecay: lambda_j = j^-beta for j = 1..terms on either the coordinate
/// basis or the discrete cosine basis (Neumann eigenvectors of the grid
/// Laplacian, ordered by frequency and scaled to unit mean square).
struct CovarianceSpec {
  enum class Kind { Identity, EigenDecay };
  enum class Basis { Coordinate, Cosine };

  Kind kind = Kind::Identity;
  double beta = 2.0;
  std::size_t terms = 1;
  Basis basis = Basis::Cosine;

  static CovarianceSpec identity() { return {}; }
  static CovarianceSpec eigen_decay(double beta, std::size_t terms, Basis basis = Basis::Cosine) {
    return {Kind::EigenDecay, beta, terms, basis};
  }

  std::size_t term_count(const GridSpec& grid) const { return kind == Kind::Identity ? grid.size() : terms; }
  double eigenvalue(std::size_t j) const;  // j is 1-based
  void validate(const GridSpec& grid) const;
};

std::string to_string(CovarianceSpec::Kind kind);
std::string to_string(CovarianceSpec::Basis basis);

/// Identifies an independent stream of normal draws. Identical
/// (seed, particle, step) triples reproduce identical draws.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t particle = 0;
  std::uint64_t step = 0;

  std::mt19937_64 engine() const;
};

/// splitmix64 finalizer, used to derive stream and sub-seeds.
std::uint64_t mix_seed(std::uint64_t x);
/// Seed for a purpose-tagged family of streams derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

/// Precomputed basis for repeated sampling of increments on one grid.
class IncrementSampler {
 public:
  IncrementSampler(const CovarianceSpec& cov, const GridSpec& grid);

  /// sqrt(dt) * sum_j sqrt(lambda_j) phi_j xi_j with xi_j i.i.d. N(0,1).
  GridVector sample(double dt, const RngStream& rng) const;

  /// E ||Delta B||^2 = dt * sum_j lambda_j ||phi_j||^2.
  double expected_squared_norm(double dt) const;

  const GridSpec& grid() const { return grid_; }
  const CovarianceSpec& covariance() const { return cov_; }

 private:
  struct Mode {
    int k0 = 0;
    int k1 = 0;
  };

  CovarianceSpec cov_;
  GridSpec grid_;
  std::vector<double> sqrt_lambda_;
  std::vector<Mode> modes_;          // cosine basis only
  Eigen::MatrixXd axis_basis_;       // n x (kmax + 1) scaled cosines
  int kmax_ = 0;
};

GridVector sample_increment(const CovarianceSpec& cov, double dt, const RngStream& rng, const GridSpec& grid);

}  // namespace sar
