#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlbm/grid.hpp"
#include "vlbm/metrics.hpp"

namespace vlbm {

struct Rgb {
  unsigned char r, g, b;
};

/// 256-entry color table, built procedurally so the bytes are fixed.
inline std::array<Rgb, 256> make_colormap(const std::string& name) {
  std::array<Rgb, 256> table{};
  if (name == "gray") {
    for (int i = 0; i < 256; ++i) {
      table[i] = {static_cast<unsigned char>(i), static_cast<unsigned char>(i),
                  static_cast<unsigned char>(i)};
    }
    return table;
  }
  if (name != "viridis") throw std::invalid_argument("unknown colormap: " + name);
  // Piecewise-linear approximation of viridis through fixed anchors.
  static constexpr int anchors[9][3] = {
      {68, 1, 84},   {72, 40, 120},  {62, 74, 137},  {49, 104, 142}, {38, 130, 142},
      {31, 158, 137}, {53, 183, 121}, {109, 205, 89}, {253, 231, 37}};
  for (int i = 0; i < 256; ++i) {
    const double t = i / 255.0 * 8.0;
    const int seg = std::min(7, static_cast<int>(t));
    const double f = t - seg;
    auto lerp = [&](int c) {
      return static_cast<unsigned char>(
          std::lround(anchors[seg][c] + f * (anchors[seg + 1][c] - anchors[seg][c])));
    };
    table[i] = {lerp(0), lerp(1), lerp(2)};
  }
  return table;
}

/// Renders one scalar plane of a field as a binary PPM (P6) with a
/// logarithmic scale: pixel value log10(max(v, floor)) mapped linearly onto
/// the color table. Image dimensions are (nx, ny); the top image row is the
/// y_max side of the domain. Output bytes are deterministic for fixed input.
inline void render_ppm(const FieldSnapshot& s, Variable var, double floor,
                       const std::string& colormap, const std::string& path) {
  if (!(floor > 0.0)) throw std::invalid_argument("render: floor must be > 0");
  const auto table = make_colormap(colormap);
  const int k = static_cast<int>(var);
  const double lo = std::log10(floor);
  double hi = lo;
  std::vector<double> logv(s.data.size());
  for (std::size_t c = 0; c < s.data.size(); ++c) {
    logv[c] = std::log10(std::max(s.data[c][k], floor));
    hi = std::max(hi, logv[c]);
  }
  const double span = hi > lo ? hi - lo : 1.0;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("render: cannot open " + path);
  out << "P6\n" << s.grid.nx << " " << s.grid.ny << "\n255\n";
  for (int j = s.grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < s.grid.nx; ++i) {
      const double t = (logv[static_cast<std::size_t>(j) * s.grid.nx + i] - lo) / span;
      const int idx = std::clamp(static_cast<int>(std::lround(t * 255.0)), 0, 255);
      const Rgb c = table[idx];
      out.put(static_cast<char>(c.r));
      out.put(static_cast<char>(c.g));
      out.put(static_cast<char>(c.b));
    }
  }
  if (!out) throw std::runtime_error("render: write failed for " + path);
}

}  // namespace vlbm
