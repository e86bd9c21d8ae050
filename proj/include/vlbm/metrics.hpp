#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlbm/ensemble.hpp"
#include "vlbm/grid.hpp"

namespace vlbm {

enum class Variable { Rho = 0, MomX = 1, MomY = 2, Energy = 3 };

inline Variable variable_from_name(const std::string& s) {
  if (s == "rho") return Variable::Rho;
  if (s == "mom_x") return Variable::MomX;
  if (s == "mom_y") return Variable::MomY;
  if (s == "energy") return Variable::Energy;
  throw std::invalid_argument("variable must be rho|mom_x|mom_y|energy, got " + s);
}

/// Conservative 2x2 block-averaging restriction onto the twice-coarser grid.
inline FieldSnapshot restrict_field(const FieldSnapshot& fine) {
  if (fine.grid.nx % 2 != 0 || fine.grid.ny % 2 != 0) {
    throw std::invalid_argument("restrict_field: fine dimensions must be even");
  }
  FieldSnapshot c;
  c.grid = fine.grid;
  c.grid.nx = fine.grid.nx / 2;
  c.grid.ny = fine.grid.ny / 2;
  c.time = fine.time;
  c.sample_seed = fine.sample_seed;
  c.diverged = fine.diverged;
  c.data.resize(c.grid.cells());
  for (int j = 0; j < c.grid.ny; ++j) {
    for (int i = 0; i < c.grid.nx; ++i) {
      const ConservedState sum = fine.at(2 * i, 2 * j) + fine.at(2 * i + 1, 2 * j) +
                                 fine.at(2 * i, 2 * j + 1) + fine.at(2 * i + 1, 2 * j + 1);
      c.at(i, j) = 0.25 * sum;
    }
  }
  return c;
}

/// Relative strong sample-wise Cauchy L1 error. The L1 norm sums absolute
/// values of all four conserved components over all cells (the cell area
/// cancels in the ratio). Per-component ratios are reported through the
/// optional out parameter.
inline double strong_error(const std::vector<FieldSnapshot>& coarse,
                           const std::vector<FieldSnapshot>& restricted_fine,
                           std::vector<double>* per_component = nullptr) {
  if (coarse.empty() || coarse.size() != restricted_fine.size()) {
    throw std::invalid_argument("strong_error: sample counts differ or are empty");
  }
  double acc = 0.0;
  std::vector<double> comp_acc(4, 0.0);
  for (std::size_t m = 0; m < coarse.size(); ++m) {
    const FieldSnapshot& a = coarse[m];
    const FieldSnapshot& b = restricted_fine[m];
    if (a.grid.nx != b.grid.nx || a.grid.ny != b.grid.ny || a.data.size() != b.data.size()) {
      throw std::invalid_argument("strong_error: grid mismatch between coarse and restricted");
    }
    double num = 0.0, den = 0.0;
    double cnum[4] = {0, 0, 0, 0}, cden[4] = {0, 0, 0, 0};
    for (std::size_t c = 0; c < a.data.size(); ++c) {
      for (int k = 0; k < 4; ++k) {
        const double d = std::abs(a.data[c][k] - b.data[c][k]);
        const double r = std::abs(b.data[c][k]);
        num += d;
        den += r;
        cnum[k] += d;
        cden[k] += r;
      }
    }
    if (den == 0.0) throw std::domain_error("strong_error: zero reference norm");
    acc += num / den;
    for (int k = 0; k < 4; ++k) comp_acc[k] += cden[k] > 0.0 ? cnum[k] / cden[k] : 0.0;
  }
  if (per_component) {
    per_component->assign(4, 0.0);
    for (int k = 0; k < 4; ++k) (*per_component)[k] = comp_acc[k] / coarse.size();
  }
  return acc / coarse.size();
}

/// 1-point Wasserstein distance between two equal-size empirical ensembles
/// on one variable: per cell, the mean absolute difference of sorted order
/// statistics, averaged over cells. Cells are processed in storage order
/// with one ensemble column in memory at a time; the summation order is
/// fixed so results are bit-stable.
inline double wasserstein1(const std::vector<const FieldSnapshot*>& a,
                           const std::vector<const FieldSnapshot*>& b,
                           Variable var = Variable::Rho) {
  if (a.empty() || a.size() != b.size()) {
    throw std::invalid_argument("wasserstein1: sample counts differ or are empty");
  }
  const std::size_t n_cells = a[0]->data.size();
  const std::size_t m_count = a.size();
  const int k = static_cast<int>(var);
  for (std::size_t m = 0; m < m_count; ++m) {
    if (a[m]->data.size() != n_cells || b[m]->data.size() != n_cells) {
      throw std::invalid_argument("wasserstein1: inconsistent field sizes");
    }
  }
  std::vector<double> col_a(m_count), col_b(m_count);
  double acc = 0.0;
  for (std::size_t c = 0; c < n_cells; ++c) {
    for (std::size_t m = 0; m < m_count; ++m) {
      col_a[m] = a[m]->data[c][k];
      col_b[m] = b[m]->data[c][k];
    }
    std::sort(col_a.begin(), col_a.end());
    std::sort(col_b.begin(), col_b.end());
    double cell = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) cell += std::abs(col_a[m] - col_b[m]);
    acc += cell / static_cast<double>(m_count);
  }
  return acc / static_cast<double>(n_cells);
}

/// Brute-force optimal transport between two small scalar samples: the
/// minimum over all pairings of the mean absolute difference. Validation
/// oracle for the sorted-order-statistics formula.
inline double ot_oracle(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("ot_oracle: sizes differ or are empty");
  }
  if (a.size() > 8) throw std::invalid_argument("ot_oracle: M must be <= 8");
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, cost / a.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Per-cell, per-component sample mean and (M-1)-normalized standard
/// deviation over valid samples.
inline std::pair<FieldSnapshot, FieldSnapshot> ensemble_moments(
    const std::vector<const FieldSnapshot*>& samples) {
  if (samples.empty()) throw std::invalid_argument("ensemble_moments: no samples");
  const std::size_t n = samples[0]->data.size();
  FieldSnapshot mean = *samples[0];
  mean.data.assign(n, ConservedState{});
  for (const FieldSnapshot* s : samples) {
    if (s->data.size() != n) throw std::invalid_argument("ensemble_moments: size mismatch");
    for (std::size_t c = 0; c < n; ++c) mean.data[c] += s->data[c];
  }
  const double inv_m = 1.0 / samples.size();
  for (std::size_t c = 0; c < n; ++c) mean.data[c] *= inv_m;

  FieldSnapshot stddev = mean;
  stddev.data.assign(n, ConservedState{});
  if (samples.size() < 2) {
    throw std::invalid_argument("ensemble_moments: std requires at least 2 samples");
  }
  for (const FieldSnapshot* s : samples) {
    for (std::size_t c = 0; c < n; ++c) {
      const ConservedState d = s->data[c] - mean.data[c];
      for (int k = 0; k < 4; ++k) stddev.data[c][k] += d[k] * d[k];
    }
  }
  const double inv_m1 = 1.0 / (samples.size() - 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (int k = 0; k < 4; ++k) stddev.data[c][k] = std::sqrt(stddev.data[c][k] * inv_m1);
  }
  return {std::move(mean), std::move(stddev)};
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_slope: need at least two matching points");
  }
  const double n = static_cast<double>(x.size());
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  return sxy / sxx;
}

/// Empirical convergence rate r with e ~ O(dx^r), from a log-log linear
/// fit of errors against the coarse dx of each Cauchy pair.
inline double fit_rate(const std::vector<double>& errors, const std::vector<double>& dxs) {
  if (errors.size() != dxs.size() || errors.size() < 2) {
    throw std::invalid_argument("fit_rate: need at least two matching points");
  }
  std::vector<double> lx(dxs.size()), ly(errors.size());
  for (std::size_t i = 0; i < dxs.size(); ++i) {
    if (!(errors[i] > 0.0)) throw std::invalid_argument("fit_rate: errors must be positive");
    if (i > 0 && dxs[i] >= dxs[i - 1]) {
      throw std::invalid_argument("fit_rate: dxs must be strictly decreasing");
    }
    lx[i] = std::log(dxs[i]);
    ly[i] = std::log(errors[i]);
  }
  return fit_slope(lx, ly);
}

/// Largest cell-center x where the density in the centerline band
/// |y| <= r_jet deviates from the ambient density by more than the given
/// relative threshold. Returns 0 when no deviation is found.
inline double jet_head_position(const FieldSnapshot& s, double rho_amb, double r_jet,
                                double threshold = 0.05) {
  for (int i = s.grid.nx - 1; i >= 0; --i) {
    for (int j = 0; j < s.grid.ny; ++j) {
      if (std::abs(s.grid.y_center(j)) > r_jet) continue;
      if (std::abs(s.at(i, j).rho - rho_amb) > threshold * rho_amb) {
        return s.grid.x_center(i);
      }
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Fig. 6 style report: per (time, grid pair) errors plus fitted rates.

struct MetricsRow {
  double time = 0.0;
  std::string pair;  // "Nx->2Nx"
  int m_star = 0;
  double w1 = 0.0;
  double e_strong = 0.0;
};

struct RateRow {
  double time = 0.0;
  double r_w1 = 0.0;
  double r_strong = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::vector<RateRow> rates;
};

/// Computes W1, E_strong and M* for every consecutive grid pair and every
/// snapshot time, then fits rates per time across pairs. Requires at least
/// two configured grids, all fully run.
inline MetricsReport compute_metrics(const EnsembleManifest& man) {
  const CaseConfig& cfg = man.config;
  if (cfg.grids.size() < 2) {
    throw std::runtime_error("metrics: need >= 2 grids for Cauchy errors");
  }
  const Variable var = variable_from_name(cfg.metric_variable);
  MetricsReport rep;
  const std::size_t n_pairs = cfg.grids.size() - 1;
  const std::size_t n_times = cfg.snapshot_times.size();
  // errors[pair][time]
  std::vector<std::vector<double>> w1s(n_pairs, std::vector<double>(n_times)),
      strongs(n_pairs, std::vector<double>(n_times));
  std::vector<double> coarse_dx(n_pairs);

  for (std::size_t p = 0; p < n_pairs; ++p) {
    const Grid cg = cfg.make_grid(p);
    const Grid fg = cfg.make_grid(p + 1);
    if (fg.nx != 2 * cg.nx || fg.ny != 2 * cg.ny) {
      throw std::runtime_error("metrics: consecutive grids must refine by exactly 2x");
    }
    coarse_dx[p] = cg.dx();
    const ValidityMask mask = joint_validity(man, p, p + 1);
    const int m_star = mask.m_star();
    if (m_star < 1) throw std::runtime_error("metrics: no jointly valid samples for pair");
    for (std::size_t ti = 0; ti < n_times; ++ti) {
      std::vector<FieldSnapshot> coarse, restricted;
      for (std::size_t m = 0; m < man.samples.size(); ++m) {
        if (!mask.mask[m]) continue;
        coarse.push_back(read_snapshot(man.root / man.samples[m].files[p][ti], cg));
        restricted.push_back(
            restrict_field(read_snapshot(man.root / man.samples[m].files[p + 1][ti], fg)));
      }
      std::vector<const FieldSnapshot*> ca, cb;
      for (const auto& s : coarse) ca.push_back(&s);
      for (const auto& s : restricted) cb.push_back(&s);

      MetricsRow row;
      row.time = cfg.snapshot_times[ti];
      row.pair = std::to_string(cg.nx) + "->" + std::to_string(fg.nx);
      row.m_star = m_star;
      row.w1 = wasserstein1(ca, cb, var);
      row.e_strong = strong_error(coarse, restricted);
      w1s[p][ti] = row.w1;
      strongs[p][ti] = row.e_strong;
      rep.rows.push_back(row);
    }
  }

  for (std::size_t ti = 0; ti < n_times; ++ti) {
    RateRow rr;
    rr.time = cfg.snapshot_times[ti];
    std::vector<double> ew, es;
    for (std::size_t p = 0; p < n_pairs; ++p) {
      ew.push_back(w1s[p][ti]);
      es.push_back(strongs[p][ti]);
    }
    auto safe_fit = [&](const std::vector<double>& e) {
      try {
        return fit_rate(e, coarse_dx);
      } catch (const std::invalid_argument&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    rr.r_w1 = safe_fit(ew);
    rr.r_strong = safe_fit(es);
    rep.rates.push_back(rr);
  }
  return rep;
}

inline std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline void write_metrics_csv(const MetricsReport& rep, const std::filesystem::path& metrics_path,
                              const std::filesystem::path& rates_path) {
  {
    std::ofstream out(metrics_path, std::ios::trunc);
    if (!out) throw std::runtime_error("metrics: cannot open " + metrics_path.string());
    out << "time,pair,M_star,W1,E_strong\n";
    for (const MetricsRow& r : rep.rows) {
      out << csv_num(r.time) << "," << r.pair << "," << r.m_star << "," << csv_num(r.w1) << ","
          << csv_num(r.e_strong) << "\n";
    }
  }
  {
    std::ofstream out(rates_path, std::ios::trunc);
    if (!out) throw std::runtime_error("metrics: cannot open " + rates_path.string());
    out << "time,r_W1,r_strong\n";
    for (const RateRow& r : rep.rates) {
      out << csv_num(r.time) << "," << csv_num(r.r_w1) << "," << csv_num(r.r_strong) << "\n";
    }
  }
}

/// Re-fits rates from an existing metrics CSV (columns as written above).
inline std::vector<RateRow> refit_rates_from_csv(const std::filesystem::path& metrics_csv) {
  std::ifstream in(metrics_csv);
  if (!in) throw std::runtime_error("rates: cannot open " + metrics_csv.string());
  std::string line;
  if (!std::getline(in, line) || line != "time,pair,M_star,W1,E_strong") {
    throw std::runtime_error("rates: unexpected header in " + metrics_csv.string());
  }
  struct Entry {
    double dx_key;  // coarse nx as ordering key (larger nx = smaller dx)
    double w1, es;
  };
  std::map<double, std::vector<Entry>> by_time;
  while (std::getline(in, line)) {
    if (cfgdetail::trim(line).empty()) continue;
    const std::vector<std::string> f = cfgdetail::split(line, ',');
    if (f.size() != 5) throw std::runtime_error("rates: malformed row: " + line);
    const double t = std::stod(f[0]);
    const double coarse_nx = std::stod(f[1].substr(0, f[1].find('-')));
    by_time[t].push_back({1.0 / coarse_nx, std::stod(f[3]), std::stod(f[4])});
  }
  std::vector<RateRow> rates;
  for (auto& [t, entries] : by_time) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.dx_key > b.dx_key; });
    std::vector<double> dxs, ew, es;
    for (const Entry& e : entries) {
      dxs.push_back(e.dx_key);
      ew.push_back(e.w1);
      es.push_back(e.es);
    }
    RateRow rr;
    rr.time = t;
    try {
      rr.r_w1 = fit_rate(ew, dxs);
      rr.r_strong = fit_rate(es, dxs);
    } catch (const std::invalid_argument&) {
      rr.r_w1 = rr.r_strong = std::numeric_limits<double>::quiet_NaN();
    }
    rates.push_back(rr);
  }
  return rates;
}

}  // namespace vlbm
