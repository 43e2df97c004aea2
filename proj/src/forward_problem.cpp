#include "sar/forward_problem.hpp"

#include <cmath>

namespace sar {

double derivative_norm_estimate(const ForwardProblem& problem, const GridVector& x, int iterations) {
  // Deterministic smooth start vector with a component along most modes.
  GridVector v(problem.param_grid());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 0.37 * static_cast<double>(i));
  v *= 1.0 / norm(v);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    GridVector w = problem.adjoint_apply(x, problem.derivative_apply(x, v));
    lambda = inner(v, w);
    const double len = norm(w);
    if (len == 0.0) return 0.0;
    v = std::move(w);
    v *= 1.0 / len;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace sar
