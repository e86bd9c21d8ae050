#pragma once

// Self-contained exact solver for the 1D Euler Riemann problem (ideal gas),
// used as an independent reference in the shock-tube tests. Pressure in the
// star region is found by Newton iteration on the standard two-rarefaction /
// two-shock flux functions, then the solution is sampled along rays x/t.

#include <cmath>
#include <stdexcept>

namespace riemann {

struct State {
  double rho, v, p;
};

class Exact {
 public:
  Exact(const State& left, const State& right, double gamma)
      : l_(left), r_(right), g_(gamma) {
    cl_ = std::sqrt(g_ * l_.p / l_.rho);
    cr_ = std::sqrt(g_ * r_.p / r_.rho);
    if (2.0 * (cl_ + cr_) / (g_ - 1.0) <= r_.v - l_.v) {
      throw std::runtime_error("Exact: vacuum forms, not supported");
    }
    solve_star();
  }

  double p_star() const { return ps_; }
  double v_star() const { return vs_; }

  // Solution at similarity coordinate s = x/t.
  State sample(double s) const {
    if (s <= vs_) return sample_left(s);
    return sample_right(s);
  }

 private:
  static double f_side(double p, const State& w, double c, double g) {
    if (p > w.p) {  // shock
      const double a = 2.0 / ((g + 1.0) * w.rho);
      const double b = (g - 1.0) / (g + 1.0) * w.p;
      return (p - w.p) * std::sqrt(a / (p + b));
    }
    // rarefaction
    return 2.0 * c / (g - 1.0) * (std::pow(p / w.p, (g - 1.0) / (2.0 * g)) - 1.0);
  }

  static double df_side(double p, const State& w, double c, double g) {
    if (p > w.p) {
      const double a = 2.0 / ((g + 1.0) * w.rho);
      const double b = (g - 1.0) / (g + 1.0) * w.p;
      return std::sqrt(a / (b + p)) * (1.0 - (p - w.p) / (2.0 * (b + p)));
    }
    return 1.0 / (w.rho * c) * std::pow(p / w.p, -(g + 1.0) / (2.0 * g));
  }

  void solve_star() {
    const double dv = r_.v - l_.v;
    // Two-rarefaction initial guess, robust for the cases exercised here.
    double p = std::pow((cl_ + cr_ - 0.5 * (g_ - 1.0) * dv) /
                            (cl_ / std::pow(l_.p, (g_ - 1.0) / (2.0 * g_)) +
                             cr_ / std::pow(r_.p, (g_ - 1.0) / (2.0 * g_))),
                        2.0 * g_ / (g_ - 1.0));
    p = std::max(p, 1e-12 * std::min(l_.p, r_.p));
    for (int it = 0; it < 100; ++it) {
      const double f = f_side(p, l_, cl_, g_) + f_side(p, r_, cr_, g_) + dv;
      const double df = df_side(p, l_, cl_, g_) + df_side(p, r_, cr_, g_);
      const double pn = std::max(p - f / df, 1e-14 * p);
      if (std::abs(pn - p) <= 1e-14 * (pn + p)) {
        p = pn;
        break;
      }
      p = pn;
    }
    ps_ = p;
    vs_ = 0.5 * (l_.v + r_.v) +
          0.5 * (f_side(p, r_, cr_, g_) - f_side(p, l_, cl_, g_));
  }

  State sample_left(double s) const {
    if (ps_ > l_.p) {  // left shock
      const double sl = l_.v - cl_ * std::sqrt((g_ + 1.0) / (2.0 * g_) * ps_ / l_.p +
                                               (g_ - 1.0) / (2.0 * g_));
      if (s <= sl) return l_;
      const double rho = l_.rho * (ps_ / l_.p + (g_ - 1.0) / (g_ + 1.0)) /
                         ((g_ - 1.0) / (g_ + 1.0) * ps_ / l_.p + 1.0);
      return {rho, vs_, ps_};
    }
    const double sh = l_.v - cl_;
    if (s <= sh) return l_;
    const double cs = cl_ * std::pow(ps_ / l_.p, (g_ - 1.0) / (2.0 * g_));
    const double st = vs_ - cs;
    if (s >= st) {
      return {l_.rho * std::pow(ps_ / l_.p, 1.0 / g_), vs_, ps_};
    }
    // inside the left fan
    const double c = (2.0 * cl_ + (g_ - 1.0) * (l_.v - s)) / (g_ + 1.0);
    const double v = s + c;
    const double rho = l_.rho * std::pow(c / cl_, 2.0 / (g_ - 1.0));
    const double p = l_.p * std::pow(c / cl_, 2.0 * g_ / (g_ - 1.0));
    return {rho, v, p};
  }

  State sample_right(double s) const {
    if (ps_ > r_.p) {  // right shock
      const double sr = r_.v + cr_ * std::sqrt((g_ + 1.0) / (2.0 * g_) * ps_ / r_.p +
                                               (g_ - 1.0) / (2.0 * g_));
      if (s >= sr) return r_;
      const double rho = r_.rho * (ps_ / r_.p + (g_ - 1.0) / (g_ + 1.0)) /
                         ((g_ - 1.0) / (g_ + 1.0) * ps_ / r_.p + 1.0);
      return {rho, vs_, ps_};
    }
    const double sh = r_.v + cr_;
    if (s >= sh) return r_;
    const double cs = cr_ * std::pow(ps_ / r_.p, (g_ - 1.0) / (2.0 * g_));
    const double st = vs_ + cs;
    if (s <= st) {
      return {r_.rho * std::pow(ps_ / r_.p, 1.0 / g_), vs_, ps_};
    }
    const double c = (2.0 * cr_ - (g_ - 1.0) * (r_.v - s)) / (g_ + 1.0);
    const double v = s - c;
    const double rho = r_.rho * std::pow(c / cr_, 2.0 / (g_ - 1.0));
    const double p = r_.p * std::pow(c / cr_, 2.0 * g_ / (g_ - 1.0));
    return {rho, v, p};
  }

  State l_, r_;
  double g_, cl_, cr_, ps_ = 0.0, vs_ = 0.0;
};

}  // namespace riemann
