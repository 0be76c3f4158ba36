#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "fermicool/collision.hpp"
#include "fermicool/emission.hpp"
#include "fermicool/statespace.hpp"

namespace fermicool {

/// One Raman pulse. All quantities in trap units.
struct PulseSpec {
  double detuning = 0.0;    // delta / omega
  double rabi_ratio = 0.0;  // Omega / gamma
  double gamma = 1.0;       // gamma / omega
  double duration = 0.0;    // omega * dt

  void validate() const;
  double rabi() const { return rabi_ratio * gamma; }
  /// Omega < gamma and Omega^2 / gamma small against the trap frequency.
  bool weak_excitation() const { return rabi_ratio < 1.0 && rabi() * rabi() / gamma < 0.1; }
};

/// R_l = 1 - sum over occupied n of xi_ln, by direct pair evaluation.
double r_factor(std::size_t l, const OccupationState& occ, const XiKernel& kernel);

/// Spontaneous-emission blocking factor R for every trap state, kept in sync
/// with component 1 by rank-one updates. The exact mode adds and subtracts
/// xi columns; the shell mode assumes uniform occupation within each shell.
class BlockingField {
 public:
  enum class Mode { exact, shell };

  /// shell_table is required in shell mode (see shell_xi_table).
  BlockingField(const XiKernel& kernel, Mode mode,
                std::shared_ptr<const Eigen::MatrixXd> shell_table = nullptr);

  Mode mode() const { return mode_; }
  void reset(const OccupationState& occ);
  void on_fill(std::size_t state);
  void on_vacate(std::size_t state);

  /// R_l clamped to [0, 1]. Shell mode evaluates it on demand from the
  /// shell fractions.
  double operator[](std::size_t l) const {
    const double r = mode_ == Mode::shell ? 1.0 - table_t_.col(static_cast<Eigen::Index>(l)).dot(fraction_)
                                          : r_[static_cast<Eigen::Index>(l)];
    return std::clamp(r, 0.0, 1.0);
  }
  double max() const;

 private:
  void apply(std::size_t state, double sign);

  const XiKernel* kernel_;
  Mode mode_;
  std::shared_ptr<const Eigen::MatrixXd> shell_table_;
  Eigen::MatrixXd table_t_;   // shell mode: transposed shell table
  Eigen::VectorXd fraction_;  // shell mode: occupied fraction per shell
  Eigen::ArrayXd r_;
  Eigen::ArrayXd column_;
};

/// An intermediate excited state l reachable from ground state p by a kick
/// along the beam axis: l differs from p only in that axis.
struct LaserLine {
  std::size_t l;
  int delta;      // shell(l) - shell(p)
  double fc;      // |eta_lp(k_L)|^2
  double xi_lp;
};

/// Lazily built laser line lists per (state, beam axis).
class LaserLineCache {
 public:
  explicit LaserLineCache(const XiKernel& kernel);
  const std::vector<LaserLine>& lines(std::size_t p, int axis);
  const XiKernel& kernel() const { return *kernel_; }

 private:
  const XiKernel* kernel_;
  std::vector<std::vector<LaserLine>> cache_;
  std::vector<std::uint8_t> built_;
};

/// Lorentzian excitation weight of one line, without the Rabi prefactor.
inline double line_profile(const LaserLine& line, const PulseSpec& pulse, double r_l) {
  const double off = pulse.detuning - line.delta;
  const double width = pulse.gamma * (r_l + line.xi_lp);
  return line.fc / (off * off + width * width);
}

/// Omega^2 gamma / 2, the common prefactor of every laser rate.
inline double laser_prefactor(const PulseSpec& pulse) {
  return 0.5 * pulse.rabi() * pulse.rabi() * pulse.gamma;
}

/// P^opt_{p->n}: Pauli-blocked rate for the component-1 atom in p to end in n
/// after absorbing from the beam along `axis` and re-emitting.
double laser_rate(std::size_t p, std::size_t n, const PulseSpec& pulse, int axis,
                  const OccupationState& occ, const BlockingField& r, LaserLineCache& lines);

/// Total rate for the atom in p to leave p by a laser cycle, summed over all
/// unblocked final states including those beyond the trap.
double atom_laser_rate(std::size_t p, const PulseSpec& pulse, int axis, const BlockingField& r,
                       LaserLineCache& lines);

struct BlockingAverage {
  double mean_r = 1.0;
  bool inhibited = false;  // atoms are present but every reachable R_l is 0
};

/// <R>: R_l averaged over the lines of every atom, weighted by the rate of
/// each line. 1 when no atom has a line.
BlockingAverage mean_blocking(const OccupationState& occ, const PulseSpec& pulse, int axis,
                              const BlockingField& r, LaserLineCache& lines);

struct ControllerResult {
  double gamma = 0.0;
  double mean_r = 1.0;
  bool inhibited = false;
};

/// Sets gamma so that gamma * <R> meets the target, where <R> averages R_l over
/// the lines of every atom weighted by their current transition rates.
/// Iterates to self-consistency since the weights depend on gamma.
ControllerResult gamma_controller(const OccupationState& occ, double target, const PulseSpec& pulse,
                                  int axis, const BlockingField& r, LaserLineCache& lines,
                                  double gamma_min = 1e-3, double gamma_max = 1.0);

/// Rate of the channel (e1, e2) -> (e3, e4), summed over initial pairs:
/// N1[e1] N2[e2] pi |U~|^2 (g3 - N1[e3])(g4 - N2[e4]) / (g1 g2 g3 g4).
double collision_event_rate(int e1, int e2, int e3, int e4, const OccupationState& occ,
                            const UTildeTable& table);

/// Non-identity collision channels grouped by the initial shell pair.
class CollisionCatalog {
 public:
  explicit CollisionCatalog(const UTildeTable& table);

  void refresh(const OccupationState& occ);
  double total() const { return total_; }

  /// Incremental update around an occupancy change: call with sign -1 before
  /// the change and +1 after, listing the touched shells of each component
  /// (-1 for none).
  void touch(const OccupationState& occ, std::array<int, 2> shells1, std::array<int, 2> shells2, double sign);

  struct Channel {
    int e1, e2, e3, e4;
  };
  /// Draws a channel proportionally to its rate; u uniform in [0, total).
  Channel pick(double u, const OccupationState& occ) const;

 private:
  double channel_rate(int e1, int e2, int e3, const OccupationState& occ) const;

  int n_shells_;
  // k_(e1 * L + e2, e3) = pi |U~|^2 / (g1 g2 g3 g4), zero for the identity channel.
  Eigen::MatrixXd k_;
  Eigen::ArrayXd pair_total_;
  double total_ = 0.0;
};

}  // namespace fermicool
