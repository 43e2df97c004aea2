#pragma once

#include "sar/grid.hpp"

#include <cstddef>
#include <string>

namespace sar {

/// Nonlinear forward operator F : X -> Y with its Frechet derivative and the
/// adjoint of the derivative. derivative_apply and adjoint_apply must be
/// mutually adjoint with respect to sar::inner on the two grids.
class ForwardProblem {
 public:
  virtual ~ForwardProblem() = default;

  virtual std::string name() const = 0;
  virtual const GridSpec& param_grid() const = 0;
  virtual const GridSpec& data_grid() const = 0;

  virtual GridVector apply(const GridVector& x) const = 0;
  /// F'(x) q
  virtual GridVector derivative_apply(const GridVector& x, const GridVector& q) const = 0;
  /// F'(x)^* w
  virtual GridVector adjoint_apply(const GridVector& x, const GridVector& w) const = 0;

  /// Whether x lies in the domain where apply is defined.
  virtual bool admissible(const GridVector& /*x*/) const { return true; }

  /// Maps an iterate back into the admissible set; returns the number of
  /// modified entries.
  virtual std::size_t project(GridVector& /*x*/) const { return 0; }
};

/// Power-iteration estimate of ||F'(x)|| (square root of the top eigenvalue
/// of F'(x)^* F'(x)).
double derivative_norm_estimate(const ForwardProblem& problem, const GridVector& x, int iterations = 50);

}  // namespace sar
