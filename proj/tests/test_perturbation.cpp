#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"
#include "vlbm/perturbation.hpp"

using namespace vlbm;

TEST_CASE("coefficient draws are deterministic and sample-distinct") {
  const auto a = draw_coefficients(42, 3, 10);
  const auto b = draw_coefficients(42, 3, 10);
  REQUIRE(a.y_coeffs.size() == 10);
  CHECK(a.seed == b.seed);
  CHECK(a.y_coeffs == b.y_coeffs);
  CHECK(a.z_coeffs == b.z_coeffs);

  const auto c = draw_coefficients(42, 4, 10);
  CHECK(a.y_coeffs != c.y_coeffs);

  for (double v : a.y_coeffs) {
    CHECK(v >= -1.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("coefficient moments match U(-1,1)") {
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int m = 0; m < n; ++m) {
    const double y1 = draw_coefficients(7, m, 1).y_coeffs[0];
    sum += y1;
    sum2 += y1 * y1;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) <= 0.01);
  CHECK(std::abs(var - 1.0 / 3.0) <= 0.01);
}

TEST_CASE("density perturbation") {
  PerturbationParams pp;
  SECTION("zero amplitude returns the base density") {
    pp.amplitude = 0.0;
    const auto c = draw_coefficients(1, 0, pp.modes);
    for (double y : {-0.04, 0.0, 0.03}) {
      CHECK(density_perturbation(y, c, pp) == 5.0);
    }
  }
  SECTION("all-ones coefficients at the centerline") {
    ModeCoefficients c;
    c.y_coeffs.assign(10, 1.0);
    c.z_coeffs.assign(10, 1.0);
    // sum_{k<=10} k^-2, accumulated independently here
    double partial = 0.0;
    for (int k = 1; k <= 10; ++k) partial += 1.0 / (k * k);
    CHECK_THAT(partial, Catch::Matchers::WithinRel(1.549768, 1e-5));
    // At y = 0 every sin vanishes and every cos is 1, W(0) = 1.
    CHECK_THAT(density_perturbation(0.0, c, pp),
               Catch::Matchers::WithinRel(5.0 * (1.0 + 0.1 * partial), 1e-12));
    CHECK_THAT(density_perturbation(0.0, c, pp), Catch::Matchers::WithinRel(5.7749, 1e-4));
  }
  SECTION("positivity bound for default parameters") {
    for (int m = 0; m < 500; ++m) {
      const auto c = draw_coefficients(99, m, pp.modes);
      for (int yi = 0; yi <= 40; ++yi) {
        const double y = -pp.r_jet + 2.0 * pp.r_jet * yi / 40.0;
        const double rho = density_perturbation(y, c, pp);
        CHECK(rho > 0.0);
        CHECK(std::abs(rho / pp.rho_jet_bar - 1.0) < 0.22);
      }
    }
  }
  SECTION("window tapers to zero at the core edges") {
    const auto c = draw_coefficients(5, 1, pp.modes);
    CHECK_THAT(density_perturbation(pp.r_jet, c, pp), Catch::Matchers::WithinRel(5.0, 1e-12));
    CHECK_THAT(density_perturbation(-pp.r_jet, c, pp), Catch::Matchers::WithinRel(5.0, 1e-12));
  }
}

TEST_CASE("mode variance decays as k^(-2p)") {
  PerturbationParams pp;
  // Variance of the k-th mode contribution at fixed y: (A rho k^-p)^2 * ...,
  // so the k=1 to k=4 ratio should be ~ 4^(2p) = 256 for p = 2.
  const int n = 20000;
  double var1 = 0.0, var4 = 0.0;
  for (int m = 0; m < n; ++m) {
    const auto c = draw_coefficients(123, m, pp.modes);
    const double a1 = 1.0 * (c.y_coeffs[0]);          // k=1 cos coefficient
    const double a4 = std::pow(4.0, -2.0) * c.y_coeffs[3];
    var1 += a1 * a1;
    var4 += a4 * a4;
  }
  CHECK_THAT(var1 / var4, Catch::Matchers::WithinRel(256.0, 0.05));
}

TEST_CASE("inlet state") {
  PerturbationParams pp;
  const GasParams g{5.0 / 3.0};
  const auto c = draw_coefficients(42, 0, pp.modes);
  SECTION("ambient branch") {
    const ConservedState u = inlet_state(0.2, c, pp, g);
    CHECK(u.rho == 0.5);
    CHECK(u.mom_x == 0.0);
    CHECK(u.mom_y == 0.0);
    CHECK_THAT(u.energy, Catch::Matchers::WithinRel(0.619050, 1e-5));
  }
  SECTION("unperturbed core") {
    PerturbationParams quiet = pp;
    quiet.amplitude = 0.0;
    const ConservedState u = inlet_state(0.0, c, quiet, g);
    CHECK(u.rho == 5.0);
    CHECK(u.mom_x == 4000.0);
    CHECK_THAT(u.energy, Catch::Matchers::WithinRel(0.619050 + 1.6e6, 1e-6));
  }
  SECTION("pressure equals p_amb for every y") {
    for (double y : {-0.2, -0.05, -0.01, 0.0, 0.02, 0.05, 0.13}) {
      // Recovering p from E ~ 1.6e6 loses ~7 digits to cancellation.
      CHECK_THAT(pressure(inlet_state(y, c, pp, g), g),
                 Catch::Matchers::WithinRel(0.4127, 1e-8));
    }
  }
}

TEST_CASE("perturbation is a pure function of physical coordinate") {
  // Same coefficients, same y, independent of any grid: evaluations at a
  // shared coordinate agree bit-for-bit by construction.
  PerturbationParams pp;
  const auto c = draw_coefficients(42, 17, pp.modes);
  const double y = 0.0123;
  const double v1 = density_perturbation(y, c, pp);
  const double v2 = density_perturbation(y, draw_coefficients(42, 17, pp.modes), pp);
  CHECK(v1 == v2);
}

TEST_CASE("initial field") {
  PerturbationParams pp;
  const GasParams g{5.0 / 3.0};
  Grid grid{100, 20};
  const auto c = draw_coefficients(42, 0, pp.modes);
  SECTION("ambient everywhere without a strip") {
    const FieldSnapshot s = initial_field(grid, c, pp, g, 0.0);
    for (const ConservedState& u : s.data) {
      CHECK(u.rho == 0.5);
      CHECK(u.mom_x == 0.0);
    }
    double mass = 0.0;
    for (const ConservedState& u : s.data) mass += u.rho;
    mass *= grid.dx() * grid.dx();
    CHECK_THAT(mass, Catch::Matchers::WithinRel(0.625, 1e-12));
  }
  SECTION("strip carries the inlet trace in a wedge") {
    const FieldSnapshot s = initial_field(grid, c, pp, g, grid.dx());
    CHECK(s.at(0, grid.ny / 2).rho != 0.5);  // inside the wedge and jet core
    CHECK(s.at(6, grid.ny / 2).rho == 0.5);  // beyond the widest wedge extent
    CHECK(s.at(0, 0).rho == 0.5);  // outside the jet core: ambient branch
  }
  SECTION("interior is independent of the seed when no strip is set") {
    const FieldSnapshot a = initial_field(grid, draw_coefficients(1, 0, 10), pp, g, 0.0);
    const FieldSnapshot b = initial_field(grid, draw_coefficients(2, 5, 10), pp, g, 0.0);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      CHECK(a.data[i].rho == b.data[i].rho);
    }
  }
}

TEST_CASE("ensemble envelope of the perturbed core density") {
  PerturbationParams pp;
  const int M = 1000;
  double sum = 0.0, sum2 = 0.0;
  for (int m = 0; m < M; ++m) {
    const auto c = draw_coefficients(42, m, pp.modes);
    const double rho = density_perturbation(0.0, c, pp);
    sum += rho;
    sum2 += rho * rho;
  }
  const double mean = sum / M;
  const double sigma = std::sqrt(sum2 / M - mean * mean);
  CHECK(std::abs(mean - pp.rho_jet_bar) / pp.rho_jet_bar <= 0.015);
  CHECK_THAT(sigma, Catch::Matchers::WithinAbs(0.30, 0.06));
}
