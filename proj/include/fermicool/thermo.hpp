#pragma once

#include <vector>

#include <Eigen/Core>

#include "fermicool/statespace.hpp"

namespace fermicool {

struct FermiFit {
  double T = 0.0;             // hbar omega / k_B
  double mu = 0.0;            // hbar omega
  double residual = 0.0;      // sum_E g_E (f_E - f(E))^2
  double T_over_TF = 0.0;     // T_F = fermi_shell(n_atoms)
  double n_atoms = 0.0;
  int fermi_shell = 0;
  bool zero_temperature = false;
};

/// k_B T_F in hbar omega for n atoms; 0 for an empty trap.
double fermi_temperature(double n_atoms);

/// Least-squares fit of f(E; T, mu) to per-shell occupation fractions with
/// weights g_E. mu is tied to T by the atom-number constraint, leaving a
/// scalar minimization over log T. Fewer than three partially filled shells
/// returns the T = 0 flag with mu placed between the last full and first
/// empty shell. Throws FitError if the minimizer cannot settle.
FermiFit fit_fermi_dirac(const Eigen::ArrayXd& fractions, double n_atoms);

/// Same, from per-shell atom counts.
FermiFit fit_shell_counts(const Eigen::ArrayXd& counts, double n_atoms);

/// g_E f_E (1 - f_E) per shell for the fitted distribution.
Eigen::ArrayXd thermal_variance_curve(const FermiFit& fit, int n_shells);

/// g_E f_E per shell for the fitted distribution.
Eigen::ArrayXd thermal_mean_curve(const FermiFit& fit, int n_shells);

/// Per-shell running mean and variance of the shell population over a time
/// window. Welford update for the moments; the raw series is kept so that
/// standard errors of the mean can account for autocorrelation (batch means).
class ShellStats {
 public:
  explicit ShellStats(int n_shells, double t_start = 0.0, double t_end = 1e300);

  int n_shells() const { return n_shells_; }
  long count() const { return count_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  bool in_window(double t) const { return t >= t_start_ && t <= t_end_; }

  void accumulate(const Eigen::ArrayXd& shell_counts, double t);
  void accumulate(const OccupationState& occ, double t, int component = 1);

  const Eigen::ArrayXd& mean() const { return mean_; }
  /// Population variance of the recorded samples.
  Eigen::ArrayXd variance() const;
  /// Standard error of the mean from non-overlapping batch means.
  Eigen::ArrayXd standard_error(int batches = 20) const;
  /// Standard error of the variance estimate, again from batches.
  Eigen::ArrayXd variance_error(int batches = 20) const;

 private:
  int n_shells_;
  double t_start_, t_end_;
  long count_ = 0;
  Eigen::ArrayXd mean_;
  Eigen::ArrayXd m2_;
  std::vector<Eigen::ArrayXd> series_;
};

/// Reduced chi^2 of the time-averaged shell means against a fit, over shells
/// with a nonzero standard error. dof = shells used - 1.
struct ChiSquare {
  double value = 0.0;
  int dof = 0;
  double reduced() const { return dof > 0 ? value / dof : 0.0; }
};
ChiSquare mean_chi_square(const ShellStats& stats, const FermiFit& fit, int batches = 20);

}  // namespace fermicool
