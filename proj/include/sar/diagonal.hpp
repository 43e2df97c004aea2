#pragma once

#include "sar/forward_problem.hpp"
#include "sar/wiener.hpp"

#include <Eigen/Dense>

#include <string>

namespace sar {

/// Linear operator x -> (s_j x_j) with 0 < s_j <= 1 non-increasing.
/// V = K^* K then has eigenvalues s_j^2 on the coordinate basis.
class DiagonalProblem final : public ForwardProblem {
 public:
  DiagonalProblem(const GridSpec& grid, Eigen::VectorXd singular_values);

  /// s_j = j^-exponent, j = 1..n.
  static DiagonalProblem power_law(const GridSpec& grid, double exponent = 1.0);

  std::string name() const override { return "diagonal"; }
  const GridSpec& param_grid() const override { return grid_; }
  const GridSpec& data_grid() const override { return grid_; }

  GridVector apply(const GridVector& x) const override;
  GridVector derivative_apply(const GridVector& x, const GridVector& q) const override;
  GridVector adjoint_apply(const GridVector& x, const GridVector& w) const override;

  const Eigen::VectorXd& singular_values() const { return s_; }
  /// V^power applied to x (V = K^* K).
  GridVector apply_gram_power(const GridVector& x, double power) const;

 private:
  GridSpec grid_;
  Eigen::VectorXd s_;
};

/// Source condition x_bar - x_true = V^gamma nu with ||nu|| = E.
struct SourceCase {
  double gamma = 0.5;
  double source_norm = 1.0;
  GridVector nu;
  GridVector x_true;
  GridVector x_bar;
};

/// Gaussian: nu_j iid standard normal. Saturating: nu_j = xi_j / sqrt(j), the
/// slowest coefficient decay that keeps ||nu|| bounded as n grows, so the
/// smoothness of x_bar - x_true is exactly gamma.
enum class SourceProfile { Gaussian, Saturating };

/// Draws nu with the given profile, normalizes it to ||nu|| = source_norm and
/// sets x_true = x_bar - V^gamma nu. x_bar defaults to zero.
SourceCase make_source_case(const DiagonalProblem& problem, double gamma, double source_norm, const RngStream& rng);
SourceCase make_source_case(const DiagonalProblem& problem, double gamma, double source_norm, const RngStream& rng,
                            const GridVector& x_bar, SourceProfile profile = SourceProfile::Gaussian);

}  // namespace sar
