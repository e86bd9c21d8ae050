// Command-line driver: ensemble runs, convergence metrics, rate refits, and
// raster rendering of fields and moments.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vlbm/config.hpp"
#include "vlbm/ensemble.hpp"
#include "vlbm/metrics.hpp"
#include "vlbm/render.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path) {
  const vlbm::CaseConfig cfg = vlbm::load_config(config_path);
  std::cout << "running ensemble: M = " << cfg.samples << ", grids = " << cfg.grids.size()
            << ", output = " << cfg.output_dir << "\n";
  vlbm::run_ensemble(cfg, [](const vlbm::EnsembleProgress& p) {
    std::cout << "  " << p.completed << "/" << p.total << " sample-grid runs done, "
              << p.diverged << " diverged\n"
              << std::flush;
  });
  std::cout << "manifest: " << (fs::path(cfg.output_dir) / "manifest.txt").string() << "\n";
  return 0;
}

int cmd_metrics(const std::string& manifest_path, std::string metrics_out,
                std::string rates_out) {
  const vlbm::EnsembleManifest man = vlbm::read_manifest(manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();
  if (metrics_out.empty()) metrics_out = (root / "metrics.csv").string();
  if (rates_out.empty()) rates_out = (root / "rates.csv").string();
  const vlbm::MetricsReport rep = vlbm::compute_metrics(man);
  vlbm::write_metrics_csv(rep, metrics_out, rates_out);
  for (const vlbm::MetricsRow& r : rep.rows) {
    std::printf("t=%-9g %-12s M*=%-4d W1=%-12.6g E_strong=%-12.6g\n", r.time, r.pair.c_str(),
                r.m_star, r.w1, r.e_strong);
  }
  for (const vlbm::RateRow& r : rep.rates) {
    std::printf("t=%-9g r_W1=%-10.4f r_strong=%-10.4f\n", r.time, r.r_w1, r.r_strong);
  }
  std::cout << "wrote " << metrics_out << " and " << rates_out << "\n";
  return 0;
}

int cmd_rates(const std::string& metrics_csv, std::string out) {
  if (out.empty()) out = (fs::path(metrics_csv).parent_path() / "rates.csv").string();
  const auto rates = vlbm::refit_rates_from_csv(metrics_csv);
  std::ofstream o(out, std::ios::trunc);
  if (!o) throw std::runtime_error("rates: cannot open " + out);
  o << "time,r_W1,r_strong\n";
  for (const vlbm::RateRow& r : rates) {
    o << vlbm::csv_num(r.time) << "," << vlbm::csv_num(r.r_w1) << ","
      << vlbm::csv_num(r.r_strong) << "\n";
    std::printf("t=%-9g r_W1=%-10.4f r_strong=%-10.4f\n", r.time, r.r_w1, r.r_strong);
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_render(const std::string& manifest_path, int time_index, const std::string& what,
               std::string grid_label, const std::string& variable, const std::string& out) {
  const vlbm::EnsembleManifest man = vlbm::read_manifest(manifest_path);
  const vlbm::CaseConfig& cfg = man.config;
  if (grid_label.empty()) grid_label = cfg.make_grid(cfg.grids.size() - 1).label();
  const std::size_t gi = man.grid_index(grid_label);
  if (time_index < 0 || time_index >= static_cast<int>(cfg.snapshot_times.size())) {
    throw std::runtime_error("render: time index out of range");
  }
  const vlbm::Variable var = vlbm::variable_from_name(variable);

  vlbm::FieldSnapshot field;
  if (what.rfind("sample:", 0) == 0) {
    const int m = std::stoi(what.substr(7));
    if (m < 0 || m >= static_cast<int>(man.samples.size())) {
      throw std::runtime_error("render: sample index out of range");
    }
    if (man.samples[m].status[gi] != vlbm::RunStatus::Admissible) {
      throw std::runtime_error("render: sample " + std::to_string(m) + " on grid " +
                               grid_label + " is not admissible");
    }
    field = vlbm::read_snapshot(man.root / man.samples[m].files[gi][time_index],
                                cfg.make_grid(gi));
  } else if (what == "mean" || what == "std") {
    std::vector<vlbm::FieldSnapshot> fields;
    for (const vlbm::SampleRecord& r : man.samples) {
      if (r.status[gi] != vlbm::RunStatus::Admissible) continue;
      fields.push_back(vlbm::read_snapshot(man.root / r.files[gi][time_index],
                                           cfg.make_grid(gi)));
    }
    if (fields.size() < 2) throw std::runtime_error("render: need >= 2 admissible samples");
    std::vector<const vlbm::FieldSnapshot*> ptrs;
    for (const auto& f : fields) ptrs.push_back(&f);
    auto [mean, stddev] = vlbm::ensemble_moments(ptrs);
    field = what == "mean" ? std::move(mean) : std::move(stddev);
  } else {
    throw std::runtime_error("render: --what must be sample:M, mean, or std");
  }
  vlbm::render_ppm(field, var, cfg.render_floor, cfg.colormap, out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo statistical-solutions pipeline for the Mach 2000 jet "
               "(D2Q5 vectorial LBM)"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the configured ensemble (resumable)");
  run->add_option("-c,--config", config_path, "case configuration file")->required();

  std::string manifest_path, metrics_out, rates_out;
  auto* metrics = app.add_subcommand("metrics", "Compute Cauchy errors and fitted rates");
  metrics->add_option("-m,--manifest", manifest_path, "ensemble manifest")->required();
  metrics->add_option("--metrics-out", metrics_out, "metrics CSV path");
  metrics->add_option("--rates-out", rates_out, "rates CSV path");

  std::string rates_csv, rates_only_out;
  auto* rates = app.add_subcommand("rates", "Refit rates from an existing metrics CSV");
  rates->add_option("--metrics", rates_csv, "metrics CSV")->required();
  rates->add_option("-o,--out", rates_only_out, "rates CSV path");

  std::string render_manifest, what = "mean", grid_label, variable = "rho", img_out;
  int time_index = 0;
  auto* render = app.add_subcommand("render", "Render a field or moment as a PPM image");
  render->add_option("-m,--manifest", render_manifest, "ensemble manifest")->required();
  render->add_option("-t,--time-index", time_index, "snapshot time index")->required();
  render->add_option("-w,--what", what, "sample:M, mean, or std");
  render->add_option("-g,--grid", grid_label, "grid label, e.g. 500x100 (default: finest)");
  render->add_option("--variable", variable, "rho|mom_x|mom_y|energy");
  render->add_option("-o,--out", img_out, "output PPM path")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path);
    if (*metrics) return cmd_metrics(manifest_path, metrics_out, rates_out);
    if (*rates) return cmd_rates(rates_csv, rates_only_out);
    if (*render) {
      return cmd_render(render_manifest, time_index, what, grid_label, variable, img_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
