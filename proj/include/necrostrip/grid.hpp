// grid.hpp — periodic-strip grid under the graph coordinate map.
//
// The moving domain 0 < y < rho_s + rho(x) is pulled back to the fixed
// reference rectangle (x, s) in [0, 2*pi) x [0, 1] by the global graph map
// (x, s) |-> (x, s*(rho_s + rho(x))).  All solvers work on the rectangle;
// metric coefficients of the mapped Laplacian are derived from R = rho_s +
// rho and its spectral x-derivatives, which this struct precomputes.
#pragma once

#include <cstddef>
#include <vector>

#include "necrostrip/params.hpp"

namespace necrostrip {

/** Tensor grid on the reference rectangle; node (i, j) at index i*ny + j. */
struct StripGrid {
  int nx = 0;  ///< periodic x nodes (power of two, >= 16)
  int ny = 0;  ///< layers in s including both boundaries (>= 32)
  double hx = 0.0;
  double hs = 0.0;
  std::vector<double> x_nodes;  ///< x_i = 2*pi*i/nx
  std::vector<double> y_map;    ///< s_j = j/(ny-1), reference height
  std::vector<double> rho;      ///< upper boundary perturbation, length nx
  std::vector<double> R;        ///< rho_s + rho
  std::vector<double> Rp;       ///< dR/dx (spectral)
  std::vector<double> Rpp;      ///< d2R/dx2 (spectral)
  FlatStationary fs;

  std::size_t idx(std::size_t i, std::size_t j) const {
    return i * static_cast<std::size_t>(ny) + j;
  }
  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  /** Physical height of node (i, j): s_j * (rho_s + rho_i). */
  double y_physical(std::size_t i, std::size_t j) const {
    return y_map[j] * R[i];
  }
};

/**
 * Build the mapped grid.
 *
 * Requires nx a power of two with nx >= 16 and ny >= 32 (ConfigError), and
 * rho_samples of length nx.  The upper boundary must keep a safety margin
 * above the stationary lower interface: min(rho) > -(rho_s - eta_s)/4,
 * otherwise GeometryViolation — the analysis is local around the flat
 * configuration and the solvers are not trusted outside that regime.
 */
StripGrid build_grid(int nx, int ny, const FlatStationary& fs,
                     const std::vector<double>& rho_samples);

}  // namespace necrostrip
