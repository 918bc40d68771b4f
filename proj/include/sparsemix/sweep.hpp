#pragma once

// Monte Carlo sweeps over (dimension x dilation x method) grids and the files
// they produce.

#include <filesystem>
#include <string>
#include <vector>

#include "sparsemix/evaluation.hpp"
#include "sparsemix/model.hpp"
#include "sparsemix/simulation.hpp"

namespace sparsemix {

inline constexpr std::string_view kSoftwareVersion = "0.1.0";

struct SweepSpec {
  std::vector<int> dims{2};
  std::vector<double> dilations{10.0, 30.0, 50.0, 70.0, 100.0};
  std::vector<Method> methods{Method::Sparse};
  int replicates = 200;
  std::uint64_t seed = 1;
  // n_points, num_components, weights and variances are taken from here;
  // dim, dilation, replicates and seed are overwritten per cell.
  ScenarioConfig scenario;
  Hyperparams hyperparams;
  std::filesystem::path out_dir = "sweep_out";
  int jobs = 1;
  // Wall-clock seconds go to timings.csv only when set, so the default
  // outputs stay byte-identical between runs.
  bool record_timings = false;

  /// Throws std::invalid_argument on empty grids or invalid scenario/hyperparams.
  void validate() const;
  ScenarioConfig cell_scenario(int dim, double dilation) const;
};

/// Parses the JSON config. Top-level sections "sweep", "scenario" and
/// "hyperparams" are all optional; keys not present keep the values in `base`.
/// Unknown keys are rejected.
SweepSpec parse_sweep_config(const std::string& text, SweepSpec base = {});
SweepSpec load_sweep_config(const std::filesystem::path& path, SweepSpec base = {});

/// Canonical JSON rendering of the spec, readable by parse_sweep_config.
std::string sweep_config_text(const SweepSpec& spec);

/// Reads hyperparams from the "hyperparams" section of a JSON config.
Hyperparams parse_hyperparams_config(const std::string& text, Hyperparams base = {});

struct SweepResult {
  std::vector<McResult> cells;  // methods outermost, then dims, then dilations
  int failures = 0;
};

/// Runs every cell, spreading (cell, replicate) tasks over spec.jobs threads.
SweepResult run_sweep(const SweepSpec& spec);

/// Writes ancrci_<method>.csv, replicates.csv, plot/<cell>.csv, manifest.json
/// and, when requested, timings.csv into spec.out_dir.
void write_sweep_outputs(const SweepSpec& spec, const SweepResult& result);

/// Shortest round-trip decimal text for a double.
std::string format_number(double v);

}  // namespace sparsemix
