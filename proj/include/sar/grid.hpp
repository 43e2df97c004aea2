#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace sar {

/// Uniform tensor grid on [lo_0, hi_0] x ... with n_per_axis nodes per axis,
/// nodes including the interval endpoints. Flat node index is i_0 + n * i_1.
struct GridSpec {
  int dim = 1;
  int n_per_axis = 2;
  std::array<double, 2> lo{-1.0, -1.0};
  std::array<double, 2> hi{1.0, 1.0};

  static GridSpec line(int n, double a = -1.0, double b = 1.0) { return {1, n, {a, a}, {b, b}}; }
  static GridSpec square(int n, double a = -1.0, double b = 1.0) { return {2, n, {a, a}, {b, b}}; }

  std::size_t size() const {
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n_per_axis);
    return total;
  }
  double spacing(int axis = 0) const { return (hi[axis] - lo[axis]) / (n_per_axis - 1); }
  double measure() const {
    double m = 1.0;
    for (int a = 0; a < dim; ++a) m *= hi[a] - lo[a];
    return m;
  }

  /// Axis index of flat node `node` along `axis`.
  int axis_index(std::size_t node, int axis) const {
    return axis == 0 ? static_cast<int>(node % n_per_axis) : static_cast<int>(node / n_per_axis);
  }
  double coordinate(std::size_t node, int axis) const {
    return lo[axis] + axis_index(node, axis) * spacing(axis);
  }

  /// Composite trapezoid weight of a node: the cell volume, halved once for
  /// every axis on which the node sits on the boundary.
  double weight(std::size_t node) const {
    double w = 1.0;
    for (int a = 0; a < dim; ++a) {
      const int i = axis_index(node, a);
      w *= spacing(a);
      if (i == 0 || i == n_per_axis - 1) w *= 0.5;
    }
    return w;
  }

  void validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("grid: dim must be 1 or 2");
    if (n_per_axis < 2) throw std::invalid_argument("grid: n_per_axis must be >= 2");
    for (int a = 0; a < dim; ++a)
      if (!(hi[a] > lo[a])) throw std::invalid_argument("grid: hi must exceed lo");
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    if (a.dim != b.dim || a.n_per_axis != b.n_per_axis) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.lo[i] != b.lo[i] || a.hi[i] != b.hi[i]) return false;
    return true;
  }
};

class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& where) : std::invalid_argument(where + ": grid mismatch") {}
};

/// Quadrature weights of every node, as a vector.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> quadrature_weights(const GridSpec& grid) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) w[i] = static_cast<Scalar>(grid.weight(i));
  return w;
}

/// A real function sampled at the nodes of a grid.
template <typename Scalar>
struct BasicGridVector {
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridSpec grid;
  Values values;

  BasicGridVector() = default;
  explicit BasicGridVector(const GridSpec& g) : grid(g), values(Values::Zero(g.size())) {}
  BasicGridVector(const GridSpec& g, Values v) : grid(g), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != grid.size())
      throw std::invalid_argument("grid vector: length does not match grid");
  }

  static BasicGridVector constant(const GridSpec& g, Scalar c) {
    return BasicGridVector(g, Values::Constant(g.size(), c));
  }

  /// Samples `f(x)` (1D) or `f(x1, x2)` (2D) at every node.
  template <typename F>
  static BasicGridVector sample(const GridSpec& g, F&& f) {
    BasicGridVector out(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if constexpr (std::is_invocable_v<F, double, double>) {
        out.values[i] = static_cast<Scalar>(f(g.coordinate(i, 0), g.dim == 2 ? g.coordinate(i, 1) : 0.0));
      } else {
        out.values[i] = static_cast<Scalar>(f(g.coordinate(i, 0)));
      }
    }
    return out;
  }

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  Scalar& operator[](std::size_t i) { return values[static_cast<Eigen::Index>(i)]; }
  const Scalar& operator[](std::size_t i) const { return values[static_cast<Eigen::Index>(i)]; }

  bool all_finite() const { return values.allFinite(); }

  BasicGridVector& operator+=(const BasicGridVector& o) {
    check_same(o, "operator+=");
    values += o.values;
    return *this;
  }
  BasicGridVector& operator-=(const BasicGridVector& o) {
    check_same(o, "operator-=");
    values -= o.values;
    return *this;
  }
  BasicGridVector& operator*=(Scalar s) {
    values *= s;
    return *this;
  }

  friend BasicGridVector operator+(BasicGridVector a, const BasicGridVector& b) { return a += b; }
  friend BasicGridVector operator-(BasicGridVector a, const BasicGridVector& b) { return a -= b; }
  friend BasicGridVector operator*(Scalar s, BasicGridVector a) { return a *= s; }
  friend BasicGridVector operator*(BasicGridVector a, Scalar s) { return a *= s; }

  void check_same(const BasicGridVector& o, const char* where) const {
    if (!(grid == o.grid) || size() != o.size()) throw GridMismatch(where);
  }
};

using GridVector = BasicGridVector<double>;

/// Discrete L2 inner product with trapezoid weights.
template <typename Scalar>
Scalar inner(const BasicGridVector<Scalar>& u, const BasicGridVector<Scalar>& v) {
  u.check_same(v, "inner");
  const GridSpec& g = u.grid;
  Scalar acc(0);
  for (std::size_t i = 0; i < g.size(); ++i) acc += static_cast<Scalar>(g.weight(i)) * (u[i] * v[i]);
  return acc;
}

template <typename Scalar>
Scalar norm(const BasicGridVector<Scalar>& u) {
  using std::sqrt;
  return sqrt(inner(u, u));
}

}  // namespace sar
