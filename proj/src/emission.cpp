#include "fermicool/emission.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fermicool/errors.hpp"
#include "fermicool/oscillator.hpp"

namespace fermicool {

EmissionPattern EmissionPattern::parse(const std::string& name) {
  if (name == "isotropic") return isotropic();
  if (name == "dipole_x") return dipole(0);
  if (name == "dipole_y") return dipole(1);
  if (name == "dipole_z" || name == "dipole") return dipole(2);
  throw ContractError("unknown emission pattern '" + name +
                      "' (isotropic, dipole_x, dipole_y, dipole_z)");
}

std::string EmissionPattern::name() const {
  if (kind == Kind::isotropic) return "isotropic";
  return std::string("dipole_") + "xyz"[axis];
}

double EmissionPattern::weight(double kx2, double ky2, double kz2) const {
  if (kind == Kind::isotropic) return 1.0;
  const double along = axis == 0 ? kx2 : (axis == 1 ? ky2 : kz2);
  return 1.5 * (1.0 - along);
}

namespace {

SphereRule rule_for(const EmissionPattern& pattern, int degree) {
  if (pattern.polar_nodes > 0 || pattern.azimuthal_nodes > 0) {
    if (pattern.polar_nodes < 8 || pattern.azimuthal_nodes < 8)
      throw ContractError("emission quadrature needs at least 8 nodes per direction");
    return sphere_rule(pattern.polar_nodes, pattern.azimuthal_nodes);
  }
  const int n = std::max(8, sphere_nodes_for_degree(degree + pattern.extra_degree()));
  return sphere_rule(n, n);
}

}  // namespace

double xi(const TrapState& l, const TrapState& m, const EmissionPattern& pattern, double eta) {
  if (eta < 0) throw ContractError("xi: eta must be >= 0");
  const SphereRule rule = rule_for(pattern, l.shell() + m.shell());
  const double x = eta * eta;
  double sum = 0.0;
  for (int i = 0; i < rule.polar_nodes(); ++i) {
    const double t = rule.t[i];
    const double fz = displacement_weight<double>(l.nz, m.nz, x * t);
    if (fz == 0.0) continue;
    for (int j = 0; j < rule.azimuthal_nodes(); ++j) {
      const double u = (1.0 - t) * rule.s[j];
      const double v = (1.0 - t) * (1.0 - rule.s[j]);
      sum += rule.polar_w[i] * rule.azimuth_w[j] * pattern.weight(u, v, t) * fz *
             displacement_weight<double>(l.nx, m.nx, x * u) *
             displacement_weight<double>(l.ny, m.ny, x * v);
    }
  }
  return sum;
}

XiKernel::XiKernel(const StateSpace& space, double eta, EmissionPattern pattern)
    : space_(&space), eta_(eta), pattern_(pattern) {
  if (eta < 0) throw ContractError("XiKernel: eta must be >= 0");
  levels_ = space.n_shells();
  rule_ = rule_for(pattern_, 2 * (levels_ - 1));
  npolar_ = rule_.polar_nodes();
  const int nazi = rule_.azimuthal_nodes();
  const double x = eta * eta;

  fu_.assign(static_cast<std::size_t>(levels_ * npolar_), Eigen::MatrixXd(levels_, nazi));
  fv_.assign(static_cast<std::size_t>(levels_ * npolar_), Eigen::MatrixXd(levels_, nazi));
  ft_.assign(static_cast<std::size_t>(levels_), Eigen::MatrixXd(levels_, npolar_));
  for (int i = 0; i < npolar_; ++i) {
    const double t = rule_.t[i];
    for (int j = 0; j < nazi; ++j) {
      const double u = (1.0 - t) * rule_.s[j];
      const double v = (1.0 - t) * (1.0 - rule_.s[j]);
      const double w = rule_.polar_w[i] * rule_.azimuth_w[j] * pattern_.weight(u, v, t);
      for (int p = 0; p < levels_; ++p)
        for (int l = 0; l < levels_; ++l) {
          fu_[static_cast<std::size_t>(p * npolar_ + i)](l, j) = w * displacement_weight<double>(l, p, x * u);
          fv_[static_cast<std::size_t>(p * npolar_ + i)](l, j) = displacement_weight<double>(l, p, x * v);
        }
    }
    for (int p = 0; p < levels_; ++p)
      for (int l = 0; l < levels_; ++l)
        ft_[static_cast<std::size_t>(p)](l, i) = displacement_weight<double>(l, p, x * t);
  }

  lx_.resize(space.size());
  ly_.resize(space.size());
  lz_.resize(space.size());
  for (std::size_t s = 0; s < space.size(); ++s) {
    lx_[s] = space.state(s).nx;
    ly_[s] = space.state(s).ny;
    lz_[s] = space.state(s).nz;
  }
  scratch_.assign(static_cast<std::size_t>(npolar_), Eigen::MatrixXd(levels_, levels_));
}

void XiKernel::column(std::size_t p, Eigen::Ref<Eigen::ArrayXd> out) const {
  if (out.size() != static_cast<Eigen::Index>(space_->size()))
    throw ContractError("XiKernel::column: output size mismatch");
  const TrapState& ps = space_->state(p);
  const Eigen::MatrixXd& ft = ft_[static_cast<std::size_t>(ps.nz)];
  for (int i = 0; i < npolar_; ++i)
    scratch_[static_cast<std::size_t>(i)].noalias() = fu(ps.nx, i) * fv(ps.ny, i).transpose();
  out.setZero();
  for (int i = 0; i < npolar_; ++i) {
    const Eigen::MatrixXd& g = scratch_[static_cast<std::size_t>(i)];
    for (std::size_t l = 0; l < space_->size(); ++l)
      out[static_cast<Eigen::Index>(l)] += ft(lz_[l], i) * g(lx_[l], ly_[l]);
  }
}

Eigen::ArrayXd XiKernel::column(std::size_t p) const {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(space_->size()));
  column(p, out);
  return out;
}

double XiKernel::pair(std::size_t l, std::size_t p) const {
  const TrapState& ls = space_->state(l);
  const TrapState& ps = space_->state(p);
  const Eigen::MatrixXd& ft = ft_[static_cast<std::size_t>(ps.nz)];
  double sum = 0.0;
  for (int i = 0; i < npolar_; ++i) {
    const double fz = ft(ls.nz, i);
    if (fz == 0.0) continue;
    sum += fz * fu(ps.nx, i).row(ls.nx).dot(fv(ps.ny, i).row(ls.ny));
  }
  return sum;
}

Eigen::MatrixXd shell_xi_table(const XiKernel& kernel) {
  const StateSpace& space = kernel.space();
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(space.size()), space.n_shells());
  Eigen::ArrayXd col(static_cast<Eigen::Index>(space.size()));
  for (std::size_t p = 0; p < space.size(); ++p) {
    kernel.column(p, col);
    table.col(space.shell(p)) += col.matrix();
  }
  return table;
}

EmissionSampler::EmissionSampler(const StateSpace& space, double eta, EmissionPattern pattern)
    : space_(&space), eta_(eta), pattern_(pattern) {
  if (eta < 0) throw ContractError("EmissionSampler: eta must be >= 0");
}

Eigen::Vector3d EmissionSampler::sample_direction(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double z = 2.0 * unit(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Eigen::Vector3d k(r * std::cos(phi), r * std::sin(phi), z);
    if (pattern_.kind == EmissionPattern::Kind::isotropic) return k;
    // W / max(W) = 1 - k_axis^2
    if (unit(rng) < 1.0 - k[pattern_.axis] * k[pattern_.axis]) return k;
  }
}

std::optional<std::size_t> EmissionSampler::sample(const TrapState& l, Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Vector3d k = sample_direction(rng);
  const int top = space_->n_shells() - 1;
  int level[3];
  int shell = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const double x = eta_ * eta_ * k[axis] * k[axis];
    const double r = unit(rng);
    double cumulative = 0.0;
    int chosen = -1;
    for (int m = 0; m <= top - shell; ++m) {
      cumulative += displacement_weight<double>(m, l.level(axis), x);
      if (r < cumulative) {
        chosen = m;
        break;
      }
    }
    if (chosen < 0) return std::nullopt;
    level[axis] = chosen;
    shell += chosen;
  }
  return space_->index(level[0], level[1], level[2]);
}

}  // namespace fermicool
