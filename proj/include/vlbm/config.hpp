#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlbm/euler.hpp"
#include "vlbm/grid.hpp"
#include "vlbm/lattice.hpp"
#include "vlbm/perturbation.hpp"

namespace vlbm {

/// Full case description: flat "key = value" text with [section] headers.
struct CaseConfig {
  GasParams gas;
  LatticeParams lattice;
  PerturbationParams perturbation;

  double x_max = 2.5;
  double y_min = -0.25;
  double y_max = 0.25;
  // Base physical width of the wedge-shaped inlet strip seeded at t=0
  // (see initial_field; the wedge spans 0.5x to 5.5x this value across the
  // domain height): 0 disables the strip.
  double inlet_strip_width = 0.02;

  std::vector<std::pair<int, int>> grids = {{125, 25}, {250, 50}, {500, 100}};
  double t_end = 0.003;
  std::vector<double> snapshot_times = {0.0, 0.00075, 0.0015, 0.00225, 0.003};
  int samples = 64;
  std::uint64_t base_seed = 42;
  int workers = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";
  bool positivity_admissibility = false;

  std::string metric_variable = "rho";

  double render_floor = 5e-4;  // 1e-3 * rho_amb
  std::string colormap = "viridis";

  Grid make_grid(std::size_t index) const {
    Grid g;
    g.nx = grids.at(index).first;
    g.ny = grids.at(index).second;
    g.x_max = x_max;
    g.y_min = y_min;
    g.y_max = y_max;
    return g;
  }

  void validate() const {
    if (gas.gamma <= 1.0) throw std::invalid_argument("config: gamma must be > 1");
    lattice.validate();
    perturbation.validate();
    if (samples < 1) throw std::invalid_argument("config: samples must be >= 1");
    if (grids.empty()) throw std::invalid_argument("config: at least one grid required");
    for (std::size_t i = 0; i < grids.size(); ++i) make_grid(i).validate();
    if (snapshot_times.empty()) throw std::invalid_argument("config: snapshot_times empty");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
      if (i > 0 && snapshot_times[i] <= snapshot_times[i - 1]) {
        throw std::invalid_argument("config: snapshot_times must be strictly increasing");
      }
      if (snapshot_times[i] < 0.0 || snapshot_times[i] > t_end + 1e-15) {
        throw std::invalid_argument("config: snapshot_times must lie in [0, t_end]");
      }
    }
    if (workers < 0) throw std::invalid_argument("config: workers must be >= 0");
    if (metric_variable != "rho" && metric_variable != "mom_x" && metric_variable != "mom_y" &&
        metric_variable != "energy") {
      throw std::invalid_argument("config: metric variable must be rho|mom_x|mom_y|energy");
    }
    if (!(render_floor > 0.0)) throw std::invalid_argument("config: render_floor must be > 0");
    if (colormap != "viridis" && colormap != "gray") {
      throw std::invalid_argument("config: colormap must be viridis|gray");
    }
    if (inlet_strip_width < 0.0) {
      throw std::invalid_argument("config: inlet_strip_width must be >= 0");
    }
  }
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw std::invalid_argument("config: invalid number for key '" + key + "': " + v);
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw std::invalid_argument("config: invalid integer for key '" + key + "': " + v);
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: invalid boolean for key '" + key + "': " + v);
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace cfgdetail

inline std::string limiter_name(Limiter l) {
  switch (l) {
    case Limiter::FirstOrder: return "first-order";
    case Limiter::SecondOrder: return "second-order";
    case Limiter::Rlmp: return "rlmp";
  }
  return "rlmp";
}

inline Limiter limiter_from_name(const std::string& s) {
  if (s == "first-order") return Limiter::FirstOrder;
  if (s == "second-order") return Limiter::SecondOrder;
  if (s == "rlmp") return Limiter::Rlmp;
  throw std::invalid_argument("config: limiter must be first-order|second-order|rlmp, got " + s);
}

inline CaseConfig parse_config_text(std::istream& in) {
  using namespace cfgdetail;
  CaseConfig c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value': " + line);
    }
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "gas.gamma") c.gas.gamma = parse_double(key, val);
    else if (key == "lattice.alpha") c.lattice.alpha = parse_double(key, val);
    else if (key == "lattice.safety") c.lattice.safety = parse_double(key, val);
    else if (key == "lattice.limiter") c.lattice.limiter = limiter_from_name(val);
    else if (key == "lattice.rlmp_relaxation") c.lattice.rlmp_relaxation = parse_double(key, val);
    else if (key == "lattice.positivity_floor") c.lattice.positivity_floor = parse_double(key, val);
    else if (key == "lattice.conservative_bound") c.lattice.conservative_bound = parse_bool(key, val);
    else if (key == "perturbation.amplitude") c.perturbation.amplitude = parse_double(key, val);
    else if (key == "perturbation.modes") c.perturbation.modes = static_cast<int>(parse_int(key, val));
    else if (key == "perturbation.decay_exponent") c.perturbation.decay_exponent = parse_double(key, val);
    else if (key == "perturbation.r_jet") c.perturbation.r_jet = parse_double(key, val);
    else if (key == "perturbation.rho_jet") c.perturbation.rho_jet_bar = parse_double(key, val);
    else if (key == "perturbation.rho_amb") c.perturbation.rho_amb = parse_double(key, val);
    else if (key == "perturbation.p_amb") c.perturbation.p_amb = parse_double(key, val);
    else if (key == "perturbation.v_jet") c.perturbation.v_jet = parse_double(key, val);
    else if (key == "domain.x_max") c.x_max = parse_double(key, val);
    else if (key == "domain.y_min") c.y_min = parse_double(key, val);
    else if (key == "domain.y_max") c.y_max = parse_double(key, val);
    else if (key == "domain.inlet_strip_width") c.inlet_strip_width = parse_double(key, val);
    else if (key == "run.grids") {
      c.grids.clear();
      for (const std::string& item : split(val, ',')) {
        const std::size_t x = item.find('x');
        if (x == std::string::npos) {
          throw std::invalid_argument("config: grid entry must be NXxNY, got " + item);
        }
        c.grids.emplace_back(static_cast<int>(parse_int(key, item.substr(0, x))),
                             static_cast<int>(parse_int(key, item.substr(x + 1))));
      }
    } else if (key == "run.t_end") c.t_end = parse_double(key, val);
    else if (key == "run.snapshot_times") {
      c.snapshot_times.clear();
      for (const std::string& item : split(val, ',')) {
        c.snapshot_times.push_back(parse_double(key, item));
      }
    } else if (key == "run.samples") c.samples = static_cast<int>(parse_int(key, val));
    else if (key == "run.base_seed") c.base_seed = static_cast<std::uint64_t>(parse_int(key, val));
    else if (key == "run.workers") c.workers = static_cast<int>(parse_int(key, val));
    else if (key == "run.output_dir") c.output_dir = val;
    else if (key == "run.positivity_admissibility") c.positivity_admissibility = parse_bool(key, val);
    else if (key == "metrics.variable") c.metric_variable = val;
    else if (key == "render.value_floor") c.render_floor = parse_double(key, val);
    else if (key == "render.colormap") c.colormap = val;
    else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

inline CaseConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  return parse_config_text(in);
}

inline std::string serialize_config(const CaseConfig& c) {
  using cfgdetail::fmt;
  std::ostringstream o;
  o << "[gas]\n";
  o << "gamma = " << fmt(c.gas.gamma) << "\n\n";
  o << "[lattice]\n";
  o << "alpha = " << fmt(c.lattice.alpha) << "\n";
  o << "safety = " << fmt(c.lattice.safety) << "\n";
  o << "limiter = " << limiter_name(c.lattice.limiter) << "\n";
  o << "rlmp_relaxation = " << fmt(c.lattice.rlmp_relaxation) << "\n";
  o << "positivity_floor = " << fmt(c.lattice.positivity_floor) << "\n";
  o << "conservative_bound = " << (c.lattice.conservative_bound ? "true" : "false") << "\n\n";
  o << "[perturbation]\n";
  o << "amplitude = " << fmt(c.perturbation.amplitude) << "\n";
  o << "modes = " << c.perturbation.modes << "\n";
  o << "decay_exponent = " << fmt(c.perturbation.decay_exponent) << "\n";
  o << "r_jet = " << fmt(c.perturbation.r_jet) << "\n";
  o << "rho_jet = " << fmt(c.perturbation.rho_jet_bar) << "\n";
  o << "rho_amb = " << fmt(c.perturbation.rho_amb) << "\n";
  o << "p_amb = " << fmt(c.perturbation.p_amb) << "\n";
  o << "v_jet = " << fmt(c.perturbation.v_jet) << "\n\n";
  o << "[domain]\n";
  o << "x_max = " << fmt(c.x_max) << "\n";
  o << "y_min = " << fmt(c.y_min) << "\n";
  o << "y_max = " << fmt(c.y_max) << "\n";
  o << "inlet_strip_width = " << fmt(c.inlet_strip_width) << "\n\n";
  o << "[run]\n";
  o << "grids = ";
  for (std::size_t i = 0; i < c.grids.size(); ++i) {
    if (i) o << ", ";
    o << c.grids[i].first << "x" << c.grids[i].second;
  }
  o << "\n";
  o << "t_end = " << fmt(c.t_end) << "\n";
  o << "snapshot_times = ";
  for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
    if (i) o << ", ";
    o << fmt(c.snapshot_times[i]);
  }
  o << "\n";
  o << "samples = " << c.samples << "\n";
  o << "base_seed = " << c.base_seed << "\n";
  o << "workers = " << c.workers << "\n";
  o << "output_dir = " << c.output_dir << "\n";
  o << "positivity_admissibility = " << (c.positivity_admissibility ? "true" : "false") << "\n\n";
  o << "[metrics]\n";
  o << "variable = " << c.metric_variable << "\n\n";
  o << "[render]\n";
  o << "value_floor = " << fmt(c.render_floor) << "\n";
  o << "colormap = " << c.colormap << "\n";
  return o.str();
}

}  // namespace vlbm
