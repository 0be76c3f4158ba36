#include "fermicool/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "fermicool/errors.hpp"

namespace fermicool {

double fermi_temperature(double n_atoms) {
  if (n_atoms < 1.0) return 0.0;
  return fermi_shell(std::llround(n_atoms));
}

namespace {

constexpr double kInterior = 1e-9;

double weighted_residual(const Eigen::ArrayXd& fractions, double T, double mu) {
  double sum = 0.0;
  for (Eigen::Index e = 0; e < fractions.size(); ++e) {
    const double d = fractions[e] - fermi_dirac(static_cast<double>(e), T, mu);
    sum += static_cast<double>(shell_degeneracy(static_cast<int>(e))) * d * d;
  }
  return sum;
}

}  // namespace

FermiFit fit_fermi_dirac(const Eigen::ArrayXd& fractions, double n_atoms) {
  if (!(n_atoms > 0)) throw ContractError("fit_fermi_dirac: n_atoms must be > 0");
  const int n_shells = static_cast<int>(fractions.size());
  if (n_shells < 1) throw ContractError("fit_fermi_dirac: no shells");
  const Eigen::ArrayXd f = fractions.max(0.0).min(1.0);

  FermiFit fit;
  fit.n_atoms = n_atoms;
  fit.fermi_shell = fermi_shell(std::max<long>(1, std::llround(n_atoms)));
  const int interior = static_cast<int>(((f > kInterior) && (f < 1.0 - kInterior)).count());
  if (interior < 3) {
    fit.zero_temperature = true;
    fit.T = 0.0;
    fit.mu = chemical_potential(n_shells, 0.0, n_atoms);
    fit.residual = weighted_residual(f, 0.0, fit.mu);
    fit.T_over_TF = 0.0;
    return fit;
  }

  auto objective = [&](double log_t) {
    const double T = std::exp(log_t);
    return weighted_residual(f, T, chemical_potential(n_shells, T, n_atoms));
  };
  const double lo = std::log(1e-3), hi = std::log(5.0 * n_shells);
  const int grid = 80;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double v = objective(lo + (hi - lo) * i / grid);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double a = lo + (hi - lo) * std::max(0, best - 1) / grid;
  const double b = lo + (hi - lo) * std::min(grid, best + 1) / grid;
  std::uintmax_t iterations = 200;
  const auto [log_t, value] = boost::math::tools::brent_find_minima(objective, a, b, 40, iterations);
  if (!std::isfinite(log_t) || !std::isfinite(value))
    throw FitError("fit_fermi_dirac: minimizer did not converge", value);
  fit.T = std::exp(log_t);
  fit.mu = chemical_potential(n_shells, fit.T, n_atoms);
  fit.residual = value;
  fit.T_over_TF = fit.fermi_shell > 0 ? fit.T / fit.fermi_shell : std::numeric_limits<double>::infinity();
  return fit;
}

FermiFit fit_shell_counts(const Eigen::ArrayXd& counts, double n_atoms) {
  Eigen::ArrayXd fractions(counts.size());
  for (Eigen::Index e = 0; e < counts.size(); ++e)
    fractions[e] = counts[e] / static_cast<double>(shell_degeneracy(static_cast<int>(e)));
  return fit_fermi_dirac(fractions, n_atoms);
}

Eigen::ArrayXd thermal_mean_curve(const FermiFit& fit, int n_shells) {
  Eigen::ArrayXd out(n_shells);
  for (int e = 0; e < n_shells; ++e) out[e] = shell_degeneracy(e) * fermi_dirac(e, fit.T, fit.mu);
  return out;
}

Eigen::ArrayXd thermal_variance_curve(const FermiFit& fit, int n_shells) {
  Eigen::ArrayXd out(n_shells);
  for (int e = 0; e < n_shells; ++e) {
    const double f = fermi_dirac(e, fit.T, fit.mu);
    out[e] = shell_degeneracy(e) * f * (1.0 - f);
  }
  return out;
}

ShellStats::ShellStats(int n_shells, double t_start, double t_end)
    : n_shells_(n_shells), t_start_(t_start), t_end_(t_end),
      mean_(Eigen::ArrayXd::Zero(n_shells)), m2_(Eigen::ArrayXd::Zero(n_shells)) {
  if (n_shells < 1) throw ContractError("ShellStats: n_shells must be >= 1");
  if (t_end < t_start) throw ContractError("ShellStats: empty window");
}

void ShellStats::accumulate(const Eigen::ArrayXd& shell_counts, double t) {
  if (shell_counts.size() != n_shells_) throw ContractError("ShellStats: shell count mismatch");
  if (!in_window(t)) throw ContractError("ShellStats: sample outside the window");
  ++count_;
  const Eigen::ArrayXd delta = shell_counts - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (shell_counts - mean_);
  series_.push_back(shell_counts);
}

void ShellStats::accumulate(const OccupationState& occ, double t, int component) {
  accumulate(component == 1 ? occ.shells1() : occ.shells2(), t);
}

Eigen::ArrayXd ShellStats::variance() const {
  if (count_ == 0) return Eigen::ArrayXd::Zero(n_shells_);
  return (m2_ / static_cast<double>(count_)).max(0.0);
}

namespace {

// Splits the series into equal consecutive batches and returns, per batch,
// the batch mean (kind 0) or the batch variance about its own mean (kind 1).
std::vector<Eigen::ArrayXd> batch_moments(const std::vector<Eigen::ArrayXd>& series, int batches,
                                          int n_shells, int kind) {
  const long n = static_cast<long>(series.size());
  const long size = n / batches;
  std::vector<Eigen::ArrayXd> out;
  for (int b = 0; b < batches; ++b) {
    Eigen::ArrayXd m = Eigen::ArrayXd::Zero(n_shells), s = Eigen::ArrayXd::Zero(n_shells);
    for (long i = b * size; i < (b + 1) * size; ++i) m += series[static_cast<std::size_t>(i)];
    m /= static_cast<double>(size);
    if (kind == 0) {
      out.push_back(m);
      continue;
    }
    for (long i = b * size; i < (b + 1) * size; ++i) s += (series[static_cast<std::size_t>(i)] - m).square();
    out.push_back(s / static_cast<double>(size));
  }
  return out;
}

Eigen::ArrayXd spread_of_mean(const std::vector<Eigen::ArrayXd>& values, int n_shells) {
  const double b = static_cast<double>(values.size());
  Eigen::ArrayXd m = Eigen::ArrayXd::Zero(n_shells), s = Eigen::ArrayXd::Zero(n_shells);
  for (const auto& v : values) m += v;
  m /= b;
  for (const auto& v : values) s += (v - m).square();
  return (s / (b - 1.0) / b).sqrt();
}

}  // namespace

Eigen::ArrayXd ShellStats::standard_error(int batches) const {
  if (count_ < 2) return Eigen::ArrayXd::Zero(n_shells_);
  if (count_ < 2L * batches) return (variance() / static_cast<double>(count_ - 1)).sqrt();
  return spread_of_mean(batch_moments(series_, batches, n_shells_, 0), n_shells_);
}

Eigen::ArrayXd ShellStats::variance_error(int batches) const {
  if (count_ < 4L * batches) batches = std::max(2, static_cast<int>(count_ / 4));
  if (count_ < 4) return Eigen::ArrayXd::Zero(n_shells_);
  return spread_of_mean(batch_moments(series_, batches, n_shells_, 1), n_shells_);
}

ChiSquare mean_chi_square(const ShellStats& stats, const FermiFit& fit, int batches) {
  const Eigen::ArrayXd model = thermal_mean_curve(fit, stats.n_shells());
  const Eigen::ArrayXd se = stats.standard_error(batches);
  ChiSquare chi;
  int used = 0;
  for (int e = 0; e < stats.n_shells(); ++e) {
    if (!(se[e] > 1e-12)) continue;
    const double d = (stats.mean()[e] - model[e]) / se[e];
    chi.value += d * d;
    ++used;
  }
  chi.dof = std::max(0, used - 1);
  return chi;
}

}  // namespace fermicool
