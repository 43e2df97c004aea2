#pragma once

#include "sar/grid.hpp"
#include "sar/wiener.hpp"

namespace sar {

/// u_j + delta * max_i |u_i| * xi_j with xi_j i.i.d. N(0, 1).
GridVector synthesize_data(const GridVector& u, double delta, const RngStream& rng);

/// y + noise_norm * xi / ||xi||, so that ||y_delta - y|| equals noise_norm.
GridVector synthesize_data_with_norm(const GridVector& y, double noise_norm, const RngStream& rng);

}  // namespace sar
