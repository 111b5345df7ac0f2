#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgeflow/harness.hpp"

using namespace edgeflow;

int main(int argc, char** argv) {
  CLI::App app{"EdgeFLow federated-learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir;
  std::string axis_name;
  std::vector<int> axis_values;

  CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment grid");
  run_cmd->add_option("config", config_path, "experiment config file")->required();

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep one hyperparameter axis");
  sweep_cmd->add_option("config", config_path, "experiment config file")->required();
  sweep_cmd->add_option("--axis", axis_name, "axis to sweep: N_m or K")->required();
  sweep_cmd->add_option("--values", axis_values, "axis values")->required()->delimiter(',');

  CLI::App* topo_cmd = app.add_subcommand("topo-report", "communication load per topology");
  topo_cmd->add_option("config", config_path, "experiment config file")->required();

  CLI::App* bound_cmd = app.add_subcommand("bound-report", "print persisted bound results");
  bound_cmd->add_option("run_dir", run_dir, "output directory of a finished run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run_cmd)) {
      const RunSummary summary = run_experiment(parse_config_file(config_path));
      for (const MethodSummary& ms : summary.methods) {
        std::cout << method_str(ms.method) << ": final_acc=" << ms.final_accuracy_mean
                  << " +- " << ms.final_accuracy_std
                  << " rounds_to_threshold=" << ms.rounds_to_threshold
                  << " comm_units=" << ms.total_params_hop_units
                  << " compression=" << ms.compression_ratio_vs_fedavg
                  << " lemma3_violations=" << ms.lemma3_violations << "\n";
        for (const std::string& failure : ms.failures) {
          std::cout << "  failed " << failure << "\n";
        }
      }
      std::cout << "artifacts: " << summary.output_dir << "\n";
      return summary.any_failed ? 1 : 0;
    }
    if (app.got_subcommand(sweep_cmd)) {
      const ExperimentConfig config = parse_config_file(config_path);
      const auto cells = sweep_experiment(config, parse_sweep_axis(axis_name), axis_values);
      bool any_failed = false;
      for (const SweepCell& cell : cells) {
        for (const MethodSummary& ms : cell.summary.methods) {
          std::cout << axis_name << "=" << cell.value << " " << method_str(ms.method)
                    << ": final_acc=" << ms.final_accuracy_mean << " +- "
                    << ms.final_accuracy_std << "\n";
        }
        any_failed = any_failed || cell.summary.any_failed;
      }
      return any_failed ? 1 : 0;
    }
    if (app.got_subcommand(topo_cmd)) {
      const ExperimentConfig config = parse_config_file(config_path);
      for (const TopoRow& row : topo_report(config)) {
        std::cout << topology_kind_str(row.kind) << " " << comm_method_str(row.method)
                  << ": total=" << row.total << " ratio=" << row.ratio_vs_fedavg << "\n";
      }
      return 0;
    }
    if (app.got_subcommand(bound_cmd)) {
      const int cells = bound_report(run_dir, std::cout);
      if (cells == 0) {
        std::cerr << "no bound reports found in " << run_dir << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error (line " << e.line << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
