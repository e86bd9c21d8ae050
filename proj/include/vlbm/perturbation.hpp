#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vlbm/euler.hpp"
#include "vlbm/grid.hpp"
#include "vlbm/random.hpp"

namespace vlbm {

/// Truncated spectral perturbation of the jet-core inlet density, plus the
/// deterministic base state of the jet case.
struct PerturbationParams {
  double amplitude = 0.1;     // A
  int modes = 10;             // K
  double decay_exponent = 2;  // p
  double r_jet = 0.05;
  double rho_jet_bar = 5.0;
  double rho_amb = 0.5;
  double p_amb = 0.4127;
  double v_jet = 800.0;

  void validate() const {
    if (amplitude < 0) throw std::invalid_argument("amplitude must be >= 0");
    if (modes < 1) throw std::invalid_argument("modes must be >= 1");
    if (decay_exponent <= 0) throw std::invalid_argument("decay_exponent must be > 0");
  }
};

/// Per-sample random mode coefficients, reproducible from the seed alone.
struct ModeCoefficients {
  std::vector<double> y_coeffs;
  std::vector<double> z_coeffs;
  std::uint64_t seed = 0;
};

/// Draws exactly 2K uniforms from U(-1,1) in fixed order Y1, Z1, Y2, Z2, ...
/// The stream depends on (base_seed, m) only.
inline ModeCoefficients draw_coefficients(std::uint64_t base_seed, std::uint64_t m, int K) {
  if (K < 1) throw std::invalid_argument("draw_coefficients: K must be >= 1");
  ModeCoefficients c;
  c.seed = sample_seed(base_seed, m);
  c.y_coeffs.resize(K);
  c.z_coeffs.resize(K);
  SplitMix64 rng(c.seed);
  for (int k = 0; k < K; ++k) {
    c.y_coeffs[k] = rng.next_sym();
    c.z_coeffs[k] = rng.next_sym();
  }
  return c;
}

/// Taper window: smooth, W(0) = 1, vanishing at the core edges.
inline double taper_window(double ybar) {
  if (std::abs(ybar) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * M_PI * ybar);
  return c * c;
}

/// Perturbed jet-core density at transverse coordinate y (|y| <= r_jet).
/// The trig argument is normalized, ybar = y / r_jet.
inline double density_perturbation(double y, const ModeCoefficients& c,
                                   const PerturbationParams& pp) {
  const double ybar = y / pp.r_jet;
  const double w = taper_window(ybar);
  double sum = 0.0;
  const int K = static_cast<int>(c.y_coeffs.size());
  for (int k = 1; k <= K; ++k) {
    const double weight = std::pow(static_cast<double>(k), -pp.decay_exponent);
    sum += weight * (c.y_coeffs[k - 1] * std::cos(k * M_PI * ybar) +
                     c.z_coeffs[k - 1] * std::sin(k * M_PI * ybar));
  }
  return pp.rho_jet_bar * (1.0 + pp.amplitude * sum * w);
}

/// Quiescent ambient state.
inline ConservedState ambient_state(const PerturbationParams& pp, const GasParams& g) {
  return {pp.rho_amb, 0.0, 0.0, pp.p_amb / (g.gamma - 1.0)};
}

/// Inlet profile: perturbed jet core for |y| <= r_jet, ambient elsewhere.
/// Energy is built from the ambient pressure, so pressure(inlet_state) is
/// p_amb for every y.
inline ConservedState inlet_state(double y, const ModeCoefficients& c,
                                  const PerturbationParams& pp, const GasParams& g) {
  if (std::abs(y) <= pp.r_jet) {
    const double rho = density_perturbation(y, c, pp);
    return {rho, rho * pp.v_jet, 0.0,
            pp.p_amb / (g.gamma - 1.0) + 0.5 * rho * pp.v_jet * pp.v_jet};
  }
  return ambient_state(pp, g);
}

/// Uniform ambient field, optionally seeded with the inlet trace in a thin
/// wedge along x = 0. The wedge's width grows linearly from w/2 at the
/// bottom wall to 11w/2 at the top (mean 3w), so its right edge crosses
/// cell faces at every resolution of a nested grid ladder instead of
/// aligning with them. Successive resolutions then disagree on a band of
/// cells whose area is proportional to dx, which makes the t = 0 Cauchy
/// errors of a grid-refinement study nonzero and first order in both the
/// per-sample and the distributional metrics. strip_width = 0 yields the
/// pure ambient interior.
inline FieldSnapshot initial_field(const Grid& grid, const ModeCoefficients& c,
                                   const PerturbationParams& pp, const GasParams& g,
                                   double strip_width = 0.0) {
  grid.validate();
  FieldSnapshot s = make_uniform_field(grid, ambient_state(pp, g));
  s.sample_seed = c.seed;
  const double height = grid.y_max - grid.y_min;
  for (int j = 0; j < grid.ny; ++j) {
    const double y = grid.y_center(j);
    const ConservedState u_in = inlet_state(y, c, pp, g);
    const double w = strip_width * (0.5 + 5.0 * (y - grid.y_min) / height);
    for (int i = 0; i < grid.nx && grid.x_center(i) < w; ++i) {
      s.at(i, j) = u_in;
    }
  }
  return s;
}

}  // namespace vlbm
