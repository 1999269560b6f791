#include "necrostrip/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "necrostrip/errors.hpp"
#include "necrostrip/fft.hpp"
#include "necrostrip/format.hpp"

namespace necrostrip {

StripGrid build_grid(int nx, int ny, const FlatStationary& fs,
                     const std::vector<double>& rho_samples) {
  if (nx < 16 || !is_pow2(static_cast<std::size_t>(nx)))
    throw Error(ErrorKind::ConfigError,
                "nx must be a power of two >= 16, got " + std::to_string(nx));
  if (ny < 32)
    throw Error(ErrorKind::ConfigError,
                "ny must be >= 32, got " + std::to_string(ny));
  if (rho_samples.size() != static_cast<std::size_t>(nx))
    throw Error(ErrorKind::ConfigError,
                "rho_samples length " + std::to_string(rho_samples.size()) +
                    " does not match nx = " + std::to_string(nx));

  const double gap = fs.rho_s - fs.eta_s;
  const double margin = gap / 4.0;
  const double rho_min =
      *std::min_element(rho_samples.begin(), rho_samples.end());
  if (!(rho_min > -margin))
    throw Error(ErrorKind::GeometryViolation,
                "min(rho) = " + fmt17(rho_min) +
                    " breaches the margin -(rho_s - eta_s)/4 = " +
                    fmt17(-margin));

  StripGrid grid;
  grid.nx = nx;
  grid.ny = ny;
  grid.hx = 2.0 * std::numbers::pi / nx;
  grid.hs = 1.0 / (ny - 1);
  grid.fs = fs;
  grid.rho = rho_samples;

  grid.x_nodes.resize(nx);
  for (int i = 0; i < nx; ++i) grid.x_nodes[i] = grid.hx * i;
  grid.y_map.resize(ny);
  for (int j = 0; j < ny; ++j) grid.y_map[j] = grid.hs * j;

  grid.R.resize(nx);
  for (int i = 0; i < nx; ++i) grid.R[i] = fs.rho_s + rho_samples[i];

  Fft fft(static_cast<std::size_t>(nx));
  grid.Rp = spectral_derivative(fft, grid.R, 1);
  grid.Rpp = spectral_derivative(fft, grid.R, 2);
  return grid;
}

}  // namespace necrostrip
