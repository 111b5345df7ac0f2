#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgeflow/bounds.hpp"
#include "edgeflow/config.hpp"
#include "edgeflow/topology.hpp"

namespace edgeflow {

struct MethodSummary {
  Method method = Method::kFedAvg;
  Real final_accuracy_mean = 0;
  Real final_accuracy_std = 0;
  Real rounds_to_threshold = 0;  // first round reaching 90% of own final accuracy
  std::int64_t total_params_hop_units = 0;  // summed over repeats
  Real compression_ratio_vs_fedavg = 1.0;
  BoundBreakdown bound;          // repeat 0
  BoundComparison comparison;    // repeat 0
  Real lk_eta = 0;
  bool lk_eta_ok = false;
  int lemma3_violations = 0;     // summed over repeats
  Real lemma3_max_ratio = 0;     // max over repeats
  std::vector<std::string> failures;
  std::vector<std::vector<Real>> accuracy_curves;  // per repeat
};

struct RunSummary {
  std::string partition;
  std::string output_dir;  // resolved against EDGEFLOW_OUTPUT_ROOT
  std::vector<MethodSummary> methods;
  bool any_failed = false;
};

// Executes every (method, repeat) cell of the grid, persisting per-round
// metrics CSVs, communication ledgers, bound reports, plot data, and the
// summary JSON under the config's output directory. A failing cell is
// recorded and the rest proceed.
RunSummary run_experiment(const ExperimentConfig& config);

enum class SweepAxis { kClusterSize, kLocalSteps };

SweepAxis parse_sweep_axis(const std::string& name);

struct SweepCell {
  int value = 0;
  RunSummary summary;
};

// Re-runs the config once per axis value, nesting each run's artifacts under
// the output directory, and emits the cross-value accuracy curves and final
// table.
std::vector<SweepCell> sweep_experiment(const ExperimentConfig& config, SweepAxis axis,
                                        const std::vector<int>& values);

struct TopoRow {
  TopologyKind kind = TopologyKind::kSimple;
  CommMethod method = CommMethod::kFedAvg;
  std::int64_t total = 0;
  Real ratio_vs_fedavg = 1.0;
};

// Communication totals for the config's schedule across the four builtin
// topologies; no training involved.
std::vector<TopoRow> topo_report_rows(const ExperimentConfig& config);

// Writes topo_report.csv plus the four topology description files.
std::vector<TopoRow> topo_report(const ExperimentConfig& config);

// Reads the bound JSONs persisted by run_experiment and prints one line per
// cell; returns the number of cells reported.
int bound_report(const std::string& run_dir, std::ostream& os);

// Output directory resolution: relative paths hang off EDGEFLOW_OUTPUT_ROOT
// when that variable is set.
std::string resolve_output_dir(const std::string& dir);

}  // namespace edgeflow
