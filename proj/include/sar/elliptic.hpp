#pragma once

#include "sar/forward_problem.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <string>

namespace sar {

/// Floor applied to the reaction coefficient c when projecting flow iterates.
inline constexpr double kCoefficientFloor = 1e-6;

/// Finite-difference realization of A(c) u = -Lap u + c u with homogeneous
/// Neumann conditions on the node-centred grid. Boundary rows use the mirror
/// ghost node, so A(c) is self-adjoint in the trapezoid inner product and
/// W A(c) is a symmetric matrix (W = diag of quadrature weights).
class EllipticOperator {
 public:
  explicit EllipticOperator(const GridVector& c);
  ~EllipticOperator();
  EllipticOperator(EllipticOperator&&) noexcept;
  EllipticOperator& operator=(EllipticOperator&&) noexcept;

  /// Solves A(c) u = rhs.
  GridVector solve(const GridVector& rhs) const;
  /// Returns A(c) u.
  GridVector apply(const GridVector& u) const;

  const GridSpec& grid() const { return grid_; }

 private:
  struct Factorization;
  GridSpec grid_;
  Eigen::VectorXd c_;
  std::unique_ptr<Factorization> factor_;
};

/// Symmetric matrix W A(c).
Eigen::SparseMatrix<double> weighted_elliptic_matrix(const GridVector& c);

GridVector assemble_and_solve(const GridVector& c, const GridVector& rhs);

/// Parameter-to-solution map c -> rho * u(c) with A(c) u = w.
class EllipticProblem final : public ForwardProblem {
 public:
  explicit EllipticProblem(const GridSpec& grid, double scale = 1.0);
  EllipticProblem(const GridSpec& grid, GridVector source, double scale = 1.0);

  std::string name() const override { return grid_.dim == 1 ? "elliptic1d" : "elliptic2d"; }
  const GridSpec& param_grid() const override { return grid_; }
  const GridSpec& data_grid() const override { return grid_; }

  GridVector apply(const GridVector& c) const override;
  GridVector derivative_apply(const GridVector& c, const GridVector& q) const override;
  GridVector adjoint_apply(const GridVector& c, const GridVector& w) const override;

  bool admissible(const GridVector& c) const override;
  std::size_t project(GridVector& c) const override;

  const GridVector& source() const { return source_; }
  double scale() const { return scale_; }
  void set_scale(double rho) { scale_ = rho; }

 private:
  GridSpec grid_;
  GridVector source_;
  double scale_ = 1.0;
};

/// Exact coefficient of the benchmark: 2 + cos(pi x) in 1D,
/// 1 + sin(pi x1) + cos(x2) in 2D.
GridVector true_parameter(const GridSpec& grid);
GridVector true_parameter(const std::string& which, const GridSpec& grid);

}  // namespace sar
