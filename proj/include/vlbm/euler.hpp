#pragma once

#include <cmath>
#include <stdexcept>

namespace vlbm {

/// Ideal gas parameters.
struct GasParams {
  double gamma = 5.0 / 3.0;  // heat capacity ratio, > 1
};

/// Conserved 4-vector (rho, rho*v1, rho*v2, E). Also used as a generic
/// 4-component vector for fluxes and kinetic populations, which share the
/// same component layout.
struct ConservedState {
  double rho = 0.0;
  double mom_x = 0.0;
  double mom_y = 0.0;
  double energy = 0.0;

  double& operator[](int k) { return (&rho)[k]; }
  double operator[](int k) const { return (&rho)[k]; }

  ConservedState& operator+=(const ConservedState& o) {
    rho += o.rho;
    mom_x += o.mom_x;
    mom_y += o.mom_y;
    energy += o.energy;
    return *this;
  }
  ConservedState& operator-=(const ConservedState& o) {
    rho -= o.rho;
    mom_x -= o.mom_x;
    mom_y -= o.mom_y;
    energy -= o.energy;
    return *this;
  }
  ConservedState& operator*=(double s) {
    rho *= s;
    mom_x *= s;
    mom_y *= s;
    energy *= s;
    return *this;
  }
};

inline ConservedState operator+(ConservedState a, const ConservedState& b) { return a += b; }
inline ConservedState operator-(ConservedState a, const ConservedState& b) { return a -= b; }
inline ConservedState operator*(double s, ConservedState a) { return a *= s; }
inline ConservedState operator*(ConservedState a, double s) { return a *= s; }

struct PrimitiveState {
  double rho = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double p = 0.0;
};

/// Ideal gas equation of state. No clamping: may return a non-positive
/// value for inadmissible states, which the admissibility filter observes.
inline double pressure(const ConservedState& u, const GasParams& g) {
  const double kinetic = 0.5 * (u.mom_x * u.mom_x + u.mom_y * u.mom_y) / u.rho;
  return (g.gamma - 1.0) * (u.energy - kinetic);
}

inline PrimitiveState to_primitive(const ConservedState& u, const GasParams& g) {
  PrimitiveState w;
  w.rho = u.rho;
  w.v1 = u.mom_x / u.rho;
  w.v2 = u.mom_y / u.rho;
  w.p = pressure(u, g);
  return w;
}

inline ConservedState to_conserved(const PrimitiveState& w, const GasParams& g) {
  ConservedState u;
  u.rho = w.rho;
  u.mom_x = w.rho * w.v1;
  u.mom_y = w.rho * w.v2;
  u.energy = w.p / (g.gamma - 1.0) + 0.5 * w.rho * (w.v1 * w.v1 + w.v2 * w.v2);
  return u;
}

/// x-directed physical flux f(u).
inline ConservedState flux_x(const ConservedState& u, const GasParams& g) {
  const double v1 = u.mom_x / u.rho;
  const double p = pressure(u, g);
  return {u.mom_x, u.mom_x * v1 + p, u.mom_y * v1, (u.energy + p) * v1};
}

/// y-directed physical flux g(u).
inline ConservedState flux_y(const ConservedState& u, const GasParams& g) {
  const double v2 = u.mom_y / u.rho;
  const double p = pressure(u, g);
  return {u.mom_y, u.mom_x * v2, u.mom_y * v2 + p, (u.energy + p) * v2};
}

inline double sound_speed(const ConservedState& u, const GasParams& g) {
  return std::sqrt(g.gamma * pressure(u, g) / u.rho);
}

inline bool admissible(const ConservedState& u, const GasParams& g) {
  return std::isfinite(u.rho) && std::isfinite(u.mom_x) && std::isfinite(u.mom_y) &&
         std::isfinite(u.energy) && u.rho > 0.0 && pressure(u, g) > 0.0;
}

/// Upper bound on the spectral radius of both flux Jacobians:
/// max(|v1|, |v2|) + c. Each directional Jacobian has spectrum within
/// |v_d| + c, so the componentwise max bounds both while staying tighter
/// than |v| + c.
inline double max_wave_speed(const ConservedState& u, const GasParams& g) {
  const double p = pressure(u, g);
  if (!(u.rho > 0.0) || !(p > 0.0)) {
    throw std::domain_error("max_wave_speed: non-physical state (rho or p <= 0)");
  }
  const double v1 = std::abs(u.mom_x) / u.rho;
  const double v2 = std::abs(u.mom_y) / u.rho;
  return std::max(v1, v2) + std::sqrt(g.gamma * p / u.rho);
}

/// Conservative alternative bound |v| + c.
inline double max_wave_speed_conservative(const ConservedState& u, const GasParams& g) {
  const double p = pressure(u, g);
  if (!(u.rho > 0.0) || !(p > 0.0)) {
    throw std::domain_error("max_wave_speed: non-physical state (rho or p <= 0)");
  }
  const double vmag = std::hypot(u.mom_x, u.mom_y) / u.rho;
  return vmag + std::sqrt(g.gamma * p / u.rho);
}

}  // namespace vlbm
