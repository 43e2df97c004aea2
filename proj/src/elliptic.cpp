#include "sar/elliptic.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sar {

namespace {

void require_positive(const GridVector& c) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!(c[i] > 0.0) || !std::isfinite(c[i]))
      throw std::domain_error("elliptic: coefficient must be positive and finite at every node");
}

// Neighbour index along `axis`, reflected through the boundary node.
std::size_t neighbour(const GridSpec& g, std::size_t node, int axis, int offset) {
  const int n = g.n_per_axis;
  int i = g.axis_index(node, axis) + offset;
  if (i < 0) i = 1;
  if (i >= n) i = n - 2;
  const std::size_t stride = axis == 0 ? 1 : static_cast<std::size_t>(n);
  return node - static_cast<std::size_t>(g.axis_index(node, axis)) * stride + static_cast<std::size_t>(i) * stride;
}

}  // namespace

struct EllipticOperator::Factorization {
  // 1D: tridiagonal LU (Thomas) factors.
  std::vector<double> sub, pivot, upper;
  // 2D: sparse LDL^T of W A(c).
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::VectorXd weights;
};

EllipticOperator::EllipticOperator(const GridVector& c)
    : grid_(c.grid), c_(c.values), factor_(std::make_unique<Factorization>()) {
  grid_.validate();
  require_positive(c);
  const std::size_t n = grid_.size();
  if (grid_.dim == 1) {
    const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
    std::vector<double> diag(n), sup(n, 0.0);
    auto& f = *factor_;
    f.sub.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = 2.0 * inv_h2 + c_[static_cast<Eigen::Index>(i)];
      if (i > 0) f.sub[i] = (i == n - 1) ? -2.0 * inv_h2 : -inv_h2;
      if (i + 1 < n) sup[i] = (i == 0) ? -2.0 * inv_h2 : -inv_h2;
    }
    f.pivot.resize(n);
    f.upper.resize(n);
    f.pivot[0] = diag[0];
    f.upper[0] = sup[0] / f.pivot[0];
    for (std::size_t i = 1; i < n; ++i) {
      f.pivot[i] = diag[i] - f.sub[i] * f.upper[i - 1];
      f.upper[i] = sup[i] / f.pivot[i];
    }
  } else {
    factor_->weights = quadrature_weights(grid_);
    factor_->ldlt.compute(weighted_elliptic_matrix(c));
    if (factor_->ldlt.info() != Eigen::Success) throw std::runtime_error("elliptic: factorization failed");
  }
}

EllipticOperator::~EllipticOperator() = default;
EllipticOperator::EllipticOperator(EllipticOperator&&) noexcept = default;
EllipticOperator& EllipticOperator::operator=(EllipticOperator&&) noexcept = default;

GridVector EllipticOperator::solve(const GridVector& rhs) const {
  if (!(rhs.grid == grid_)) throw GridMismatch("EllipticOperator::solve");
  GridVector u(grid_);
  const auto& f = *factor_;
  if (grid_.dim == 1) {
    const std::size_t n = grid_.size();
    std::vector<double> y(n);
    y[0] = rhs[0] / f.pivot[0];
    for (std::size_t i = 1; i < n; ++i) y[i] = (rhs[i] - f.sub[i] * y[i - 1]) / f.pivot[i];
    u[n - 1] = y[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) u[i] = y[i] - f.upper[i] * u[i + 1];
  } else {
    u.values = f.ldlt.solve(f.weights.cwiseProduct(rhs.values));
    if (f.ldlt.info() != Eigen::Success) throw std::runtime_error("elliptic: solve failed");
  }
  if (!u.all_finite()) throw std::runtime_error("elliptic: solver breakdown");
  return u;
}

GridVector EllipticOperator::apply(const GridVector& u) const {
  if (!(u.grid == grid_)) throw GridMismatch("EllipticOperator::apply");
  GridVector out(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    double acc = c_[static_cast<Eigen::Index>(p)] * u[p];
    for (int a = 0; a < grid_.dim; ++a) {
      const double inv_h2 = 1.0 / (grid_.spacing(a) * grid_.spacing(a));
      acc += (2.0 * u[p] - u[neighbour(grid_, p, a, -1)] - u[neighbour(grid_, p, a, +1)]) * inv_h2;
    }
    out[p] = acc;
  }
  return out;
}

Eigen::SparseMatrix<double> weighted_elliptic_matrix(const GridVector& c) {
  const GridSpec& g = c.grid;
  require_positive(c);
  const std::size_t n = g.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * (1 + 4 * static_cast<std::size_t>(g.dim)));
  for (std::size_t p = 0; p < n; ++p) {
    const double w = g.weight(p);
    const auto row = static_cast<Eigen::Index>(p);
    double diag = c[p];
    for (int a = 0; a < g.dim; ++a) {
      const double inv_h2 = 1.0 / (g.spacing(a) * g.spacing(a));
      diag += 2.0 * inv_h2;
      triplets.emplace_back(row, static_cast<Eigen::Index>(neighbour(g, p, a, -1)), -w * inv_h2);
      triplets.emplace_back(row, static_cast<Eigen::Index>(neighbour(g, p, a, +1)), -w * inv_h2);
    }
    triplets.emplace_back(row, row, w * diag);
  }
  Eigen::SparseMatrix<double> s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

GridVector assemble_and_solve(const GridVector& c, const GridVector& rhs) {
  if (!(c.grid == rhs.grid)) throw GridMismatch("assemble_and_solve");
  return EllipticOperator(c).solve(rhs);
}

EllipticProblem::EllipticProblem(const GridSpec& grid, double scale)
    : EllipticProblem(grid, GridVector::constant(grid, 1.0), scale) {}

EllipticProblem::EllipticProblem(const GridSpec& grid, GridVector source, double scale)
    : grid_(grid), source_(std::move(source)), scale_(scale) {
  grid_.validate();
  if (!(source_.grid == grid_)) throw GridMismatch("EllipticProblem");
}

GridVector EllipticProblem::apply(const GridVector& c) const {
  GridVector u = EllipticOperator(c).solve(source_);
  return u *= scale_;
}

GridVector EllipticProblem::derivative_apply(const GridVector& c, const GridVector& q) const {
  c.check_same(q, "derivative_apply");
  const EllipticOperator op(c);
  const GridVector u = op.solve(source_);
  GridVector rhs(grid_, -q.values.cwiseProduct(u.values));
  GridVector v = op.solve(rhs);
  return v *= scale_;
}

GridVector EllipticProblem::adjoint_apply(const GridVector& c, const GridVector& w) const {
  c.check_same(w, "adjoint_apply");
  const EllipticOperator op(c);
  const GridVector u = op.solve(source_);
  const GridVector z = op.solve(w);
  return GridVector(grid_, -scale_ * u.values.cwiseProduct(z.values));
}

bool EllipticProblem::admissible(const GridVector& c) const {
  return c.all_finite() && (c.values.array() > 0.0).all();
}

std::size_t EllipticProblem::project(GridVector& c) const {
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] < kCoefficientFloor) {
      c[i] = kCoefficientFloor;
      ++clipped;
    }
  }
  return clipped;
}

GridVector true_parameter(const GridSpec& grid) {
  using std::numbers::pi;
  if (grid.dim == 1) return GridVector::sample(grid, [](double x) { return 2.0 + std::cos(pi * x); });
  return GridVector::sample(grid, [](double x1, double x2) { return 1.0 + std::sin(pi * x1) + std::cos(x2); });
}

GridVector true_parameter(const std::string& which, const GridSpec& grid) {
  const int want = which == "1d" ? 1 : which == "2d" ? 2 : 0;
  if (want == 0) throw std::invalid_argument("true_parameter: case must be \"1d\" or \"2d\"");
  if (grid.dim != want) throw std::invalid_argument("true_parameter: grid dimension does not match case " + which);
  return true_parameter(grid);
}

}  // namespace sar
