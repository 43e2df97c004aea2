#include "sar/diagonal.hpp"

#include <cmath>
#include <stdexcept>

namespace sar {

DiagonalProblem::DiagonalProblem(const GridSpec& grid, Eigen::VectorXd singular_values)
    : grid_(grid), s_(std::move(singular_values)) {
  grid_.validate();
  if (static_cast<std::size_t>(s_.size()) != grid_.size())
    throw std::invalid_argument("diagonal: spectrum length does not match grid");
  for (Eigen::Index j = 0; j < s_.size(); ++j) {
    if (!(s_[j] > 0.0 && s_[j] <= 1.0)) throw std::invalid_argument("diagonal: singular values must lie in (0, 1]");
    if (j > 0 && s_[j] > s_[j - 1]) throw std::invalid_argument("diagonal: singular values must be non-increasing");
  }
}

DiagonalProblem DiagonalProblem::power_law(const GridSpec& grid, double exponent) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index j = 0; j < s.size(); ++j) s[j] = std::pow(static_cast<double>(j + 1), -exponent);
  return DiagonalProblem(grid, std::move(s));
}

GridVector DiagonalProblem::apply(const GridVector& x) const {
  if (!(x.grid == grid_)) throw GridMismatch("DiagonalProblem::apply");
  return GridVector(grid_, s_.cwiseProduct(x.values));
}

GridVector DiagonalProblem::derivative_apply(const GridVector& x, const GridVector& q) const {
  x.check_same(q, "DiagonalProblem::derivative_apply");
  return GridVector(grid_, s_.cwiseProduct(q.values));
}

GridVector DiagonalProblem::adjoint_apply(const GridVector& x, const GridVector& w) const {
  x.check_same(w, "DiagonalProblem::adjoint_apply");
  return GridVector(grid_, s_.cwiseProduct(w.values));
}

GridVector DiagonalProblem::apply_gram_power(const GridVector& x, double power) const {
  if (!(x.grid == grid_)) throw GridMismatch("DiagonalProblem::apply_gram_power");
  return GridVector(grid_, s_.array().pow(2.0 * power).matrix().cwiseProduct(x.values));
}

SourceCase make_source_case(const DiagonalProblem& problem, double gamma, double source_norm, const RngStream& rng) {
  return make_source_case(problem, gamma, source_norm, rng, GridVector(problem.param_grid()));
}

SourceCase make_source_case(const DiagonalProblem& problem, double gamma, double source_norm, const RngStream& rng,
                            const GridVector& x_bar, SourceProfile profile) {
  if (!(gamma > 0.0 && gamma <= 0.5)) throw std::invalid_argument("source case: gamma must lie in (0, 1/2]");
  if (!(source_norm > 0.0)) throw std::invalid_argument("source case: E must be positive");
  const GridSpec& grid = problem.param_grid();
  if (!(x_bar.grid == grid)) throw GridMismatch("make_source_case");

  auto engine = rng.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  GridVector nu(grid);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    nu[i] = normal(engine);
    if (profile == SourceProfile::Saturating) nu[i] /= std::sqrt(double(i + 1));
  }
  nu *= source_norm / norm(nu);

  SourceCase out;
  out.gamma = gamma;
  out.source_norm = source_norm;
  out.x_bar = x_bar;
  out.x_true = x_bar - problem.apply_gram_power(nu, gamma);
  out.nu = std::move(nu);
  return out;
}

}  // namespace sar
