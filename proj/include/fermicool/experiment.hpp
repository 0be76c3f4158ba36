#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "fermicool/config.hpp"
#include "fermicool/kinetics.hpp"
#include "fermicool/thermo.hpp"

namespace fermicool {

/// Tables for one trap, built once and shared by engines.
struct TrapTables {
  std::shared_ptr<const StateSpace> space;
  EngineTables engine;
};

TrapTables build_tables(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// Thermal initial state for the configured species.
OccupationState initial_state(const ExperimentConfig& config, const StateSpace& space, Rng& rng);

struct RunResult {
  Trajectory trajectory;
  std::unique_ptr<ShellStats> stats1;
  std::unique_ptr<ShellStats> stats2;
  OccupationState final_state;
  double wall_seconds = 0.0;
};

RunResult run_experiment(const ExperimentConfig& config, const TrapTables& tables,
                         std::ostream* progress = nullptr);

/// Runs and writes trajectory, statistics, config echo and summary into
/// config.output.dir. Returns the process exit status; engine faults leave a
/// fault.txt behind.
int run_to_directory(const ConfigMap& config, std::ostream* progress = nullptr);

/// Writes the matrix-element dumps of the `tables` command.
int dump_tables(const ConfigMap& config, std::ostream* progress = nullptr);

}  // namespace fermicool
