#pragma once

#include <array>
#include <stdexcept>

#include "vlbm/euler.hpp"

namespace vlbm {

enum class Limiter { FirstOrder, SecondOrder, Rlmp };

/// D2Q5 lattice and limiter parameters.
struct LatticeParams {
  double alpha = 0.0;              // rest-population weight in [0, 1]
  // Kinetic-speed safety factor. At 2.0 every moving equilibrium is itself
  // an admissible state, which makes the unblended update a convex
  // combination of admissible states (pressure is concave and positively
  // 1-homogeneous), hence positivity-preserving.
  double safety = 2.0;
  Limiter limiter = Limiter::Rlmp;
  double rlmp_relaxation = 0.5;    // kappa >= 0
  // epsilon > 0, relative to the reference state. Kept above the roundoff
  // noise of recovering pressure from near-cancelling total and kinetic
  // energies at the fastest states of interest (~1e-9 relative).
  double positivity_floor = 1e-7;
  bool conservative_bound = false; // use |v| + c instead of max(|v1|,|v2|) + c

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0,1]");
    if (safety < 1.0) throw std::invalid_argument("safety must be >= 1");
    if (rlmp_relaxation < 0.0) throw std::invalid_argument("rlmp_relaxation must be >= 0");
    if (!(positivity_floor > 0.0)) throw std::invalid_argument("positivity_floor must be > 0");
  }
};

/// Moving equilibria M1..M4. The rest population M5 = alpha*u is never
/// stored; its contribution enters the macroscopic update as the alpha*u
/// term directly.
struct Maxwellians {
  ConservedState m[4];
};

inline Maxwellians maxwellians(const ConservedState& u, double a, double alpha,
                               const GasParams& g) {
  const ConservedState f = flux_x(u, g);
  const ConservedState fy = flux_y(u, g);
  const double w = 0.25 * (1.0 - alpha);
  const double inv2a = 0.5 / a;
  Maxwellians mx;
  mx.m[0] = w * u + inv2a * f;
  mx.m[1] = w * u - inv2a * f;
  mx.m[2] = w * u + inv2a * fy;
  mx.m[3] = w * u - inv2a * fy;
  return mx;
}

}  // namespace vlbm
