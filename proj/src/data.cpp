#include "sar/data.hpp"

#include <cmath>
#include <stdexcept>

namespace sar {

GridVector synthesize_data(const GridVector& u, double delta, const RngStream& rng) {
  if (!(delta >= 0.0)) throw std::invalid_argument("synthesize_data: delta must be non-negative");
  if (!u.all_finite()) throw std::invalid_argument("synthesize_data: data must be finite");
  if (delta == 0.0) return u;
  const double amplitude = delta * u.values.cwiseAbs().maxCoeff();
  auto engine = rng.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  GridVector out = u;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += amplitude * normal(engine);
  return out;
}

GridVector synthesize_data_with_norm(const GridVector& y, double noise_norm, const RngStream& rng) {
  if (!(noise_norm >= 0.0)) throw std::invalid_argument("synthesize_data: noise norm must be non-negative");
  if (noise_norm == 0.0) return y;
  auto engine = rng.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  GridVector xi(y.grid);
  for (std::size_t j = 0; j < xi.size(); ++j) xi[j] = normal(engine);
  xi *= noise_norm / norm(xi);
  return y + xi;
}

}  // namespace sar
