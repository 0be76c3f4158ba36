#pragma once

#include <string>
#include <vector>

#include "fermicool/config.hpp"
#include "fermicool/kinetics.hpp"
#include "fermicool/thermo.hpp"

namespace fermicool {

inline constexpr int kSchemaVersion = 1;

/// Nine significant digits.
std::string fmt9(double value);

void write_text(const std::string& path, const std::string& text);

/// Tab-separated; a `# fermicool <kind> v<schema>` line, then a header row.
void write_trajectory(const std::string& path, const Trajectory& traj, const TrapSpec& trap);
void write_events(const std::string& path, const std::vector<EventRecord>& events, const TrapSpec& trap);
/// Columns E, g_E, mean, variance, thermal_mean, thermal_variance, plus the
/// standard errors of mean and variance.
void write_stats(const std::string& path, const std::vector<const ShellStats*>& stats,
                 const std::vector<FermiFit>& fits);

/// xi for every pair of states up to max_shell, and |U~|^2 with its method
/// tag for every conserving shell quadruple up to max_shell.
void write_xi_table(const std::string& path, const ExperimentConfig& config, int max_shell);
void write_u_tilde_table(const std::string& path, const ExperimentConfig& config, int max_shell);

}  // namespace fermicool
