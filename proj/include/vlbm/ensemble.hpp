#pragma once

#include <atomic>
#include <cinttypes>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vlbm/config.hpp"
#include "vlbm/perturbation.hpp"
#include "vlbm/snapshot_io.hpp"
#include "vlbm/solver.hpp"

namespace vlbm {

enum class RunStatus { NotRun, Admissible, Diverged };

inline std::string run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::NotRun: return "not-run";
    case RunStatus::Admissible: return "admissible";
    case RunStatus::Diverged: return "diverged";
  }
  return "not-run";
}

inline RunStatus run_status_from_name(const std::string& s) {
  if (s == "not-run") return RunStatus::NotRun;
  if (s == "admissible") return RunStatus::Admissible;
  if (s == "diverged") return RunStatus::Diverged;
  throw std::runtime_error("manifest: unknown run status '" + s + "'");
}

struct SampleRecord {
  int index = 0;
  std::uint64_t seed = 0;
  ModeCoefficients coeffs;
  std::vector<RunStatus> status;                    // one entry per grid
  std::vector<std::vector<std::string>> files;      // per grid, relative to output dir
};

/// Index of the empirical measure: every sample, seed, grid, and flag.
struct EnsembleManifest {
  CaseConfig config;
  std::vector<SampleRecord> samples;

  std::filesystem::path root;  // directory holding manifest and snapshots

  int grid_index(const std::string& label) const {
    for (std::size_t gi = 0; gi < config.grids.size(); ++gi) {
      if (config.make_grid(gi).label() == label) return static_cast<int>(gi);
    }
    throw std::runtime_error("manifest: grid " + label + " not present");
  }
};

/// Joint validity over a grid pair: mask[m] true iff the sample is
/// admissible on both grids.
struct ValidityMask {
  std::vector<bool> mask;
  int m_star() const {
    int n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
  }
};

inline ValidityMask joint_validity(const EnsembleManifest& man, std::size_t coarse_gi,
                                   std::size_t fine_gi) {
  if (coarse_gi >= man.config.grids.size() || fine_gi >= man.config.grids.size()) {
    throw std::runtime_error("joint_validity: grid index out of range");
  }
  ValidityMask v;
  v.mask.resize(man.samples.size());
  for (std::size_t m = 0; m < man.samples.size(); ++m) {
    const SampleRecord& r = man.samples[m];
    if (r.status[coarse_gi] == RunStatus::NotRun || r.status[fine_gi] == RunStatus::NotRun) {
      throw std::runtime_error("joint_validity: grids not fully run");
    }
    v.mask[m] = r.status[coarse_gi] == RunStatus::Admissible &&
                r.status[fine_gi] == RunStatus::Admissible;
  }
  return v;
}

/// Admissibility indicator over one sample's recorded trajectory: true iff
/// every component of every cell at every time is finite. When
/// require_positivity is set, finite-but-unphysical states also fail.
inline bool admissibility_flag(const std::vector<FieldSnapshot>& snapshots,
                               const GasParams& gas, bool require_positivity = false) {
  for (const FieldSnapshot& s : snapshots) {
    if (s.diverged) return false;
    for (const ConservedState& u : s.data) {
      if (!std::isfinite(u.rho) || !std::isfinite(u.mom_x) || !std::isfinite(u.mom_y) ||
          !std::isfinite(u.energy)) {
        return false;
      }
      if (require_positivity && !admissible(u, gas)) return false;
    }
  }
  return true;
}

inline std::string snapshot_filename(int sample_index, int time_index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "sample_%06d_t%02d.vlbm", sample_index, time_index);
  return buf;
}

// ---------------------------------------------------------------------------
// Manifest persistence: human-readable structured text with a format-version
// field. The case configuration is embedded verbatim between begin-config /
// end-config markers.

inline void write_manifest(const EnsembleManifest& man, const std::filesystem::path& path) {
  std::ostringstream o;
  o << "vlbm-manifest-version = 1\n";
  o << "begin-config\n" << serialize_config(man.config) << "end-config\n";
  o << "samples = " << man.samples.size() << "\n";
  for (const SampleRecord& r : man.samples) {
    o << "[sample " << r.index << "]\n";
    o << "seed = " << r.seed << "\n";
    o << "y_coeffs =";
    for (double v : r.coeffs.y_coeffs) o << " " << cfgdetail::fmt(v);
    o << "\n";
    o << "z_coeffs =";
    for (double v : r.coeffs.z_coeffs) o << " " << cfgdetail::fmt(v);
    o << "\n";
    for (std::size_t gi = 0; gi < man.config.grids.size(); ++gi) {
      const std::string label = man.config.make_grid(gi).label();
      o << "status " << label << " = " << run_status_name(r.status[gi]) << "\n";
      o << "files " << label << " =";
      for (const std::string& f : r.files[gi]) o << " " << f;
      o << "\n";
    }
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("manifest: cannot open " + tmp.string());
    out << o.str();
  }
  std::filesystem::rename(tmp, path);
}

inline EnsembleManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || cfgdetail::trim(line) != "vlbm-manifest-version = 1") {
    throw std::runtime_error("manifest: missing or unsupported version line in " +
                             path.string());
  }
  if (!std::getline(in, line) || cfgdetail::trim(line) != "begin-config") {
    throw std::runtime_error("manifest: missing begin-config in " + path.string());
  }
  std::ostringstream cfg_text;
  while (std::getline(in, line) && cfgdetail::trim(line) != "end-config") {
    cfg_text << line << "\n";
  }
  EnsembleManifest man;
  {
    std::istringstream cfg_in(cfg_text.str());
    man.config = parse_config_text(cfg_in);
  }
  man.root = path.parent_path();

  auto expect_kv = [&](const std::string& raw, const std::string& key) {
    const std::size_t eq = raw.find('=');
    if (eq == std::string::npos || cfgdetail::trim(raw.substr(0, eq)) != key) {
      throw std::runtime_error("manifest: expected '" + key + "' line, got: " + raw);
    }
    return cfgdetail::trim(raw.substr(eq + 1));
  };

  if (!std::getline(in, line)) throw std::runtime_error("manifest: truncated file");
  const int n_samples = std::stoi(expect_kv(line, "samples"));
  const std::size_t n_grids = man.config.grids.size();
  man.samples.resize(n_samples);
  for (int m = 0; m < n_samples; ++m) {
    SampleRecord& r = man.samples[m];
    r.index = m;
    if (!std::getline(in, line) ||
        cfgdetail::trim(line) != "[sample " + std::to_string(m) + "]") {
      throw std::runtime_error("manifest: expected [sample " + std::to_string(m) + "]");
    }
    if (!std::getline(in, line)) throw std::runtime_error("manifest: truncated sample block");
    r.seed = std::stoull(expect_kv(line, "seed"));
    r.coeffs.seed = r.seed;
    auto read_list = [&](const std::string& key) {
      if (!std::getline(in, line)) throw std::runtime_error("manifest: truncated sample block");
      std::vector<double> out;
      std::istringstream vs(expect_kv(line, key));
      double v;
      while (vs >> v) out.push_back(v);
      return out;
    };
    r.coeffs.y_coeffs = read_list("y_coeffs");
    r.coeffs.z_coeffs = read_list("z_coeffs");
    r.status.resize(n_grids, RunStatus::NotRun);
    r.files.resize(n_grids);
    for (std::size_t gi = 0; gi < n_grids; ++gi) {
      const std::string label = man.config.make_grid(gi).label();
      if (!std::getline(in, line)) throw std::runtime_error("manifest: truncated sample block");
      r.status[gi] = run_status_from_name(expect_kv(line, "status " + label));
      if (!std::getline(in, line)) throw std::runtime_error("manifest: truncated sample block");
      std::istringstream fs(expect_kv(line, "files " + label));
      std::string f;
      while (fs >> f) r.files[gi].push_back(f);
    }
  }
  return man;
}

// ---------------------------------------------------------------------------

struct EnsembleProgress {
  int completed = 0;
  int total = 0;
  int diverged = 0;
};

/// Monte Carlo orchestration: runs every (sample, grid) pair that the
/// manifest does not already mark complete, writes snapshots, and keeps the
/// manifest current after each completion. Sample runs are independent;
/// manifest updates go through a single mutex. The optional stop hook is
/// polled between tasks so an interrupted run can resume later.
inline EnsembleManifest run_ensemble(
    const CaseConfig& cfg,
    const std::function<void(const EnsembleProgress&)>& progress = {},
    const std::function<bool()>& should_stop = {}) {
  cfg.validate();
  const std::filesystem::path root = cfg.output_dir;
  std::filesystem::create_directories(root);

  EnsembleManifest man;
  const std::filesystem::path manifest_path = root / "manifest.txt";
  if (std::filesystem::exists(manifest_path)) {
    man = read_manifest(manifest_path);
    // Resuming requires the identical case; the stored config is canonical.
    if (serialize_config(man.config) != serialize_config(cfg)) {
      throw std::runtime_error("run_ensemble: output directory holds a manifest for a "
                               "different configuration");
    }
  } else {
    man.config = cfg;
    man.root = root;
    man.samples.resize(cfg.samples);
    for (int m = 0; m < cfg.samples; ++m) {
      SampleRecord& r = man.samples[m];
      r.index = m;
      r.coeffs = draw_coefficients(cfg.base_seed, m, cfg.perturbation.modes);
      r.seed = r.coeffs.seed;
      r.status.assign(cfg.grids.size(), RunStatus::NotRun);
      r.files.resize(cfg.grids.size());
    }
    write_manifest(man, manifest_path);
  }
  for (std::size_t gi = 0; gi < cfg.grids.size(); ++gi) {
    std::filesystem::create_directories(root / ("grid_" + cfg.make_grid(gi).label()));
  }

  struct Task {
    int m;
    std::size_t gi;
  };
  std::vector<Task> tasks;
  int already_done = 0, already_diverged = 0;
  for (std::size_t gi = 0; gi < cfg.grids.size(); ++gi) {
    for (int m = 0; m < cfg.samples; ++m) {
      if (man.samples[m].status[gi] == RunStatus::NotRun) {
        tasks.push_back({m, gi});
      } else {
        ++already_done;
        if (man.samples[m].status[gi] == RunStatus::Diverged) ++already_diverged;
      }
    }
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  EnsembleProgress prog;
  prog.total = cfg.samples * static_cast<int>(cfg.grids.size());
  prog.completed = already_done;
  prog.diverged = already_diverged;

  auto worker = [&]() {
    for (;;) {
      if (should_stop && should_stop()) return;
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task task = tasks[t];
      const Grid grid = cfg.make_grid(task.gi);
      const std::string grid_dir = "grid_" + grid.label();

      SampleSpec spec;
      spec.grid = grid;
      spec.lattice = cfg.lattice;
      spec.gas = cfg.gas;
      spec.perturbation = cfg.perturbation;
      spec.coeffs = man.samples[task.m].coeffs;
      spec.inlet_strip_width = cfg.inlet_strip_width;
      spec.snapshot_times = cfg.snapshot_times;
      SampleResult result = run_sample(spec);

      std::vector<std::string> rel_files;
      for (std::size_t ti = 0; ti < result.snapshots.size(); ++ti) {
        const std::string rel =
            grid_dir + "/" + snapshot_filename(task.m, static_cast<int>(ti));
        write_snapshot(result.snapshots[ti], root / rel);
        rel_files.push_back(rel);
      }
      const bool ok = result.admissible &&
                      admissibility_flag(result.snapshots, cfg.gas,
                                         cfg.positivity_admissibility);

      std::lock_guard<std::mutex> lock(mu);
      man.samples[task.m].status[task.gi] = ok ? RunStatus::Admissible : RunStatus::Diverged;
      man.samples[task.m].files[task.gi] = rel_files;
      write_manifest(man, manifest_path);
      ++prog.completed;
      if (!ok) ++prog.diverged;
      if (progress) progress(prog);
    }
  };

  int n_workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min<int>(n_workers, std::max<std::size_t>(tasks.size(), 1));
  std::vector<std::thread> threads;
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  return man;
}

/// Loads the snapshots of one sample on one grid (in time order).
inline std::vector<FieldSnapshot> load_sample_snapshots(const EnsembleManifest& man,
                                                        std::size_t gi, int m) {
  std::vector<FieldSnapshot> out;
  const Grid grid = man.config.make_grid(gi);
  for (const std::string& rel : man.samples[m].files[gi]) {
    out.push_back(read_snapshot(man.root / rel, grid));
  }
  return out;
}

}  // namespace vlbm
