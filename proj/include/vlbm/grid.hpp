#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlbm/euler.hpp"

namespace vlbm {

/// Uniform Cartesian grid with square cells on [0, x_max] x [y_min, y_max].
struct Grid {
  int nx = 0;
  int ny = 0;
  double x_max = 2.5;
  double y_min = -0.25;
  double y_max = 0.25;

  double dx() const { return x_max / nx; }
  double x_center(int i) const { return (i + 0.5) * dx(); }
  double y_center(int j) const { return y_min + (j + 0.5) * dx(); }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }

  bool operator==(const Grid& o) const = default;

  void validate() const {
    if (nx < 4 || ny < 4) throw std::invalid_argument("Grid: nx, ny must be >= 4");
    const double dxx = x_max / nx;
    const double dxy = (y_max - y_min) / ny;
    if (std::abs(dxx - dxy) > 1e-12 * dxx) {
      throw std::invalid_argument("Grid: cells are not square (dx mismatch between x and y)");
    }
  }

  std::string label() const { return std::to_string(nx) + "x" + std::to_string(ny); }
};

/// One sample realization: the conserved field at a fixed time.
struct FieldSnapshot {
  Grid grid;
  double time = 0.0;
  std::uint64_t sample_seed = 0;
  bool diverged = false;
  std::vector<ConservedState> data;  // row-major, x fastest

  ConservedState& at(int i, int j) { return data[static_cast<std::size_t>(j) * grid.nx + i]; }
  const ConservedState& at(int i, int j) const {
    return data[static_cast<std::size_t>(j) * grid.nx + i];
  }
};

inline FieldSnapshot make_uniform_field(const Grid& g, const ConservedState& u) {
  FieldSnapshot s;
  s.grid = g;
  s.data.assign(g.cells(), u);
  return s;
}

}  // namespace vlbm
