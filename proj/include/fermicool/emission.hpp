#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fermicool/quadrature.hpp"
#include "fermicool/statespace.hpp"

namespace fermicool {

/// Angular distribution W of the spontaneously emitted photon.
struct EmissionPattern {
  enum class Kind { isotropic, dipole };
  Kind kind = Kind::isotropic;
  int axis = 2;             // dipole axis
  int polar_nodes = 0;      // 0 picks the exact order for the integrand
  int azimuthal_nodes = 0;

  static EmissionPattern isotropic() { return {}; }
  static EmissionPattern dipole(int axis) { return {Kind::dipole, axis, 0, 0}; }
  static EmissionPattern parse(const std::string& name);
  std::string name() const;

  /// 4 pi W at a direction with squared cosines (kx2, ky2, kz2); averages to 1.
  double weight(double kx2, double ky2, double kz2) const;
  /// Polynomial degree W adds to the integrand.
  int extra_degree() const { return kind == Kind::dipole ? 1 : 0; }
};

/// xi_lm: angular average of |<l| e^{i k.r} |m>|^2 weighted by W, by direct
/// quadrature on the sphere. Node counts come from the pattern when set (>= 8),
/// otherwise from the polynomial degree shell(l) + shell(m).
double xi(const TrapState& l, const TrapState& m, const EmissionPattern& pattern, double eta);

/// Batched xi over a whole trap. Holds per-node 1D Franck-Condon tables so
/// that the column xi(., p) over every state costs a few small GEMMs.
class XiKernel {
 public:
  XiKernel(const StateSpace& space, double eta, EmissionPattern pattern);

  const StateSpace& space() const { return *space_; }
  double eta() const { return eta_; }
  const EmissionPattern& pattern() const { return pattern_; }
  const SphereRule& rule() const { return rule_; }

  /// out[l] = xi(l, p) for every state l.
  void column(std::size_t p, Eigen::Ref<Eigen::ArrayXd> out) const;
  Eigen::ArrayXd column(std::size_t p) const;

  double pair(std::size_t l, std::size_t p) const;

 private:
  const Eigen::MatrixXd& fu(int level, int polar) const { return fu_[static_cast<std::size_t>(level * npolar_ + polar)]; }
  const Eigen::MatrixXd& fv(int level, int polar) const { return fv_[static_cast<std::size_t>(level * npolar_ + polar)]; }

  const StateSpace* space_;
  double eta_;
  EmissionPattern pattern_;
  SphereRule rule_;
  int levels_;
  int npolar_;
  // fu_[p, i](l, j) = w_ij F(eta^2 kx^2; l, p), fv_ without weights for ky^2,
  // ft_[p](l, i) = F(eta^2 kz^2; l, p).
  std::vector<Eigen::MatrixXd> fu_;
  std::vector<Eigen::MatrixXd> fv_;
  std::vector<Eigen::MatrixXd> ft_;
  std::vector<int> lx_, ly_, lz_;
  mutable std::vector<Eigen::MatrixXd> scratch_;
};

/// Emission probabilities from a state l into whole shells:
/// table(l, E) = sum over m in shell E of xi(l, m).
Eigen::MatrixXd shell_xi_table(const XiKernel& kernel);

/// Exact sampler of the final state after spontaneous emission from l:
/// draws a photon direction from W, then each axis level from its 1D
/// Franck-Condon distribution. Returns nullopt when the atom leaves the trap.
class EmissionSampler {
 public:
  EmissionSampler(const StateSpace& space, double eta, EmissionPattern pattern);
  std::optional<std::size_t> sample(const TrapState& l, Rng& rng) const;
  Eigen::Vector3d sample_direction(Rng& rng) const;

 private:
  const StateSpace* space_;
  double eta_;
  EmissionPattern pattern_;
};

}  // namespace fermicool
