#include "fermicool/rates.hpp"

#include <cmath>
#include <numbers>

#include "fermicool/errors.hpp"
#include "fermicool/oscillator.hpp"

namespace fermicool {

void PulseSpec::validate() const {
  if (!(duration > 0)) throw ContractError("PulseSpec: duration must be > 0");
  if (!(gamma > 0)) throw ContractError("PulseSpec: gamma must be > 0");
  if (rabi_ratio < 0) throw ContractError("PulseSpec: rabi_ratio must be >= 0");
}

double r_factor(std::size_t l, const OccupationState& occ, const XiKernel& kernel) {
  double blocked = 0.0;
  for (std::size_t n = 0; n < occ.comp1.size(); ++n)
    if (occ.comp1[n]) blocked += kernel.pair(l, n);
  return std::clamp(1.0 - blocked, 0.0, 1.0);
}

BlockingField::BlockingField(const XiKernel& kernel, Mode mode,
                             std::shared_ptr<const Eigen::MatrixXd> shell_table)
    : kernel_(&kernel), mode_(mode), shell_table_(std::move(shell_table)) {
  const auto n = static_cast<Eigen::Index>(kernel.space().size());
  if (mode_ == Mode::shell &&
      (!shell_table_ || shell_table_->rows() != n || shell_table_->cols() != kernel.space().n_shells()))
    throw ContractError("BlockingField: shell mode needs a matching shell xi table");
  r_ = Eigen::ArrayXd::Ones(n);
  column_.resize(n);
  if (mode_ == Mode::shell) {
    table_t_ = shell_table_->transpose();
    fraction_ = Eigen::VectorXd::Zero(kernel.space().n_shells());
  }
}

double BlockingField::max() const {
  if (mode_ == Mode::shell) return std::clamp(1.0 - (table_t_.transpose() * fraction_).maxCoeff(), 0.0, 1.0);
  return std::clamp(r_.maxCoeff(), 0.0, 1.0);
}

void BlockingField::reset(const OccupationState& occ) {
  const StateSpace& space = kernel_->space();
  r_.setOnes();
  if (mode_ == Mode::shell) {
    for (int e = 0; e < space.n_shells(); ++e)
      fraction_[e] = occ.shell_counts1[static_cast<std::size_t>(e)] / space.degeneracies()[e];
    return;
  }
  for (std::size_t s = 0; s < space.size(); ++s)
    if (occ.comp1[s]) apply(s, -1.0);
}

void BlockingField::apply(std::size_t state, double sign) {
  if (mode_ == Mode::shell) {
    const int e = kernel_->space().shell(state);
    fraction_[e] -= sign / kernel_->space().degeneracies()[e];
    return;
  }
  kernel_->column(state, column_);
  r_ += sign * column_;
}

void BlockingField::on_fill(std::size_t state) { apply(state, -1.0); }
void BlockingField::on_vacate(std::size_t state) { apply(state, +1.0); }

LaserLineCache::LaserLineCache(const XiKernel& kernel)
    : kernel_(&kernel), cache_(3 * kernel.space().size()), built_(3 * kernel.space().size(), 0) {}

const std::vector<LaserLine>& LaserLineCache::lines(std::size_t p, int axis) {
  const std::size_t key = 3 * p + static_cast<std::size_t>(axis);
  auto& out = cache_[key];
  if (built_[key]) return out;
  const StateSpace& space = kernel_->space();
  const TrapState ps = space.state(p);
  const int level = ps.level(axis);
  const int room = space.n_shells() - 1 - ps.shell();
  const double x = kernel_->eta() * kernel_->eta();
  for (int target = 0; target <= level + room; ++target) {
    TrapState ls = ps;
    (axis == 0 ? ls.nx : (axis == 1 ? ls.ny : ls.nz)) = target;
    const double fc = displacement_weight<double>(target, level, x);
    if (fc == 0.0) continue;
    const std::size_t l = space.index(ls);
    out.push_back({l, target - level, fc, kernel_->pair(l, p)});
  }
  built_[key] = 1;
  return out;
}

double laser_rate(std::size_t p, std::size_t n, const PulseSpec& pulse, int axis,
                  const OccupationState& occ, const BlockingField& r, LaserLineCache& lines) {
  if (!occ.comp1[p]) throw ContractError("laser_rate: initial state is empty");
  if (occ.comp1[n]) return 0.0;
  double sum = 0.0;
  for (const LaserLine& line : lines.lines(p, axis))
    sum += lines.kernel().pair(line.l, n) * line_profile(line, pulse, r[line.l]);
  return laser_prefactor(pulse) * sum;
}

double atom_laser_rate(std::size_t p, const PulseSpec& pulse, int axis, const BlockingField& r,
                       LaserLineCache& lines) {
  double sum = 0.0;
  for (const LaserLine& line : lines.lines(p, axis)) {
    const double rl = r[line.l];
    sum += rl * line_profile(line, pulse, rl);
  }
  return laser_prefactor(pulse) * sum;
}

BlockingAverage mean_blocking(const OccupationState& occ, const PulseSpec& pulse, int axis,
                              const BlockingField& r, LaserLineCache& lines) {
  double weight = 0.0, weighted_r = 0.0, reach = 0.0;
  for (std::size_t p = 0; p < occ.comp1.size(); ++p) {
    if (!occ.comp1[p]) continue;
    for (const LaserLine& line : lines.lines(p, axis)) {
      const double rl = r[line.l];
      const double w = line_profile(line, pulse, rl);
      reach += w;
      weight += rl * w;
      weighted_r += rl * rl * w;
    }
  }
  if (reach == 0.0) return {1.0, false};
  if (weight == 0.0) return {0.0, true};
  return {weighted_r / weight, false};
}

ControllerResult gamma_controller(const OccupationState& occ, double target, const PulseSpec& pulse,
                                  int axis, const BlockingField& r, LaserLineCache& lines,
                                  double gamma_min, double gamma_max) {
  if (!(target > 0) || target >= 1.0) throw ContractError("gamma_controller: target must be in (0, 1)");
  if (!(gamma_min > 0) || gamma_min > gamma_max) throw ContractError("gamma_controller: bad clamp range");
  PulseSpec trial = pulse;
  trial.gamma = std::clamp(pulse.gamma, gamma_min, gamma_max);
  ControllerResult result;
  for (int iter = 0; iter < 100; ++iter) {
    const BlockingAverage avg = mean_blocking(occ, trial, axis, r, lines);
    if (avg.inhibited) return {gamma_max, 0.0, true};
    result.mean_r = avg.mean_r;
    const double next = std::clamp(target / avg.mean_r, gamma_min, gamma_max);
    const bool done = std::abs(next - trial.gamma) <= 1e-9 * next;
    trial.gamma = next;
    if (done) break;
  }
  result.gamma = trial.gamma;
  return result;
}

double collision_event_rate(int e1, int e2, int e3, int e4, const OccupationState& occ,
                            const UTildeTable& table) {
  require_conserving(e1, e2, e3, e4);
  const int top = table.n_shells();
  if (std::max({e1, e2, e3, e4}) >= top) throw ContractError("collision_event_rate: shell beyond trap");
  const double n1 = occ.shell_counts1[static_cast<std::size_t>(e1)];
  const double n2 = occ.comp2[static_cast<std::size_t>(e2)];
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  const double g1 = shell_degeneracy(e1), g2 = shell_degeneracy(e2);
  const double g3 = shell_degeneracy(e3), g4 = shell_degeneracy(e4);
  const double free3 = g3 - occ.shell_counts1[static_cast<std::size_t>(e3)];
  const double free4 = g4 - occ.comp2[static_cast<std::size_t>(e4)];
  return n1 * n2 * std::numbers::pi * table(e1, e2, e3, e4) * free3 * free4 / (g1 * g2 * g3 * g4);
}

CollisionCatalog::CollisionCatalog(const UTildeTable& table) : n_shells_(table.n_shells()) {
  const int top = n_shells_;
  k_ = Eigen::MatrixXd::Zero(top * top, top);
  for (int e1 = 0; e1 < top; ++e1)
    for (int e2 = 0; e2 < top; ++e2)
      for (int e3 = 0; e3 < top; ++e3) {
        const int e4 = e1 + e2 - e3;
        if (e4 < 0 || e4 >= top || e3 == e1) continue;
        const double g = static_cast<double>(shell_degeneracy(e1)) * shell_degeneracy(e2) *
                         shell_degeneracy(e3) * shell_degeneracy(e4);
        k_(e1 * top + e2, e3) = std::numbers::pi * table(e1, e2, e3, e4) / g;
      }
  pair_total_ = Eigen::ArrayXd::Zero(top * top);
}

double CollisionCatalog::channel_rate(int e1, int e2, int e3, const OccupationState& occ) const {
  const int e4 = e1 + e2 - e3;
  const double kval = k_(e1 * n_shells_ + e2, e3);
  if (kval == 0.0) return 0.0;
  const double free3 = shell_degeneracy(e3) - occ.shell_counts1[static_cast<std::size_t>(e3)];
  const double free4 = shell_degeneracy(e4) - occ.comp2[static_cast<std::size_t>(e4)];
  return kval * free3 * free4;
}

void CollisionCatalog::refresh(const OccupationState& occ) {
  total_ = 0.0;
  const int top = n_shells_;
  for (int e1 = 0; e1 < top; ++e1) {
    const double n1 = occ.shell_counts1[static_cast<std::size_t>(e1)];
    for (int e2 = 0; e2 < top; ++e2) {
      const double n2 = occ.comp2[static_cast<std::size_t>(e2)];
      double sum = 0.0;
      if (n1 > 0 && n2 > 0) {
        const int lo = std::max(0, e1 + e2 - (top - 1)), hi = std::min(top - 1, e1 + e2);
        for (int e3 = lo; e3 <= hi; ++e3) sum += channel_rate(e1, e2, e3, occ);
        sum *= n1 * n2;
      }
      if (!(sum >= 0.0) || !std::isfinite(sum))
        throw EngineFault("collision catalog holds an invalid rate",
                          "pair (" + std::to_string(e1) + "," + std::to_string(e2) + ") rate " +
                              std::to_string(sum));
      pair_total_[e1 * top + e2] = sum;
      total_ += sum;
    }
  }
}

void CollisionCatalog::touch(const OccupationState& occ, std::array<int, 2> shells1, std::array<int, 2> shells2,
                             double sign) {
  const int top = n_shells_;
  for (int e1 = 0; e1 < top; ++e1) {
    const double n1 = occ.shell_counts1[static_cast<std::size_t>(e1)];
    const bool whole1 = e1 == shells1[0] || e1 == shells1[1];
    for (int e2 = 0; e2 < top; ++e2) {
      const int k = e1 * top + e2;
      const double n2 = occ.comp2[static_cast<std::size_t>(e2)];
      const int lo = std::max(0, e1 + e2 - (top - 1)), hi = std::min(top - 1, e1 + e2);
      if (whole1 || e2 == shells2[0] || e2 == shells2[1]) {
        // the pair's own populations change: drop it, then rebuild it
        total_ -= pair_total_[k];
        pair_total_[k] = 0.0;
        if (sign < 0 || n1 == 0.0 || n2 == 0.0) continue;
        double sum = 0.0;
        for (int e3 = lo; e3 <= hi; ++e3) sum += channel_rate(e1, e2, e3, occ);
        pair_total_[k] = n1 * n2 * sum;
        total_ += pair_total_[k];
        continue;
      }
      if (n1 == 0.0 || n2 == 0.0) continue;
      // only the channels whose final shells were touched
      const std::array<int, 4> e3s{shells1[0], shells1[1], shells2[0] < 0 ? -1 : e1 + e2 - shells2[0],
                                   shells2[1] < 0 ? -1 : e1 + e2 - shells2[1]};
      double sum = 0.0;
      for (std::size_t i = 0; i < e3s.size(); ++i) {
        const int e3 = e3s[i];
        if (e3 < lo || e3 > hi) continue;
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) seen = seen || e3s[j] == e3;
        if (!seen) sum += channel_rate(e1, e2, e3, occ);
      }
      const double delta = sign * n1 * n2 * sum;
      pair_total_[k] = std::max(0.0, pair_total_[k] + delta);
      total_ += delta;
    }
  }
}

CollisionCatalog::Channel CollisionCatalog::pick(double u, const OccupationState& occ) const {
  const int top = n_shells_;
  int last_pair = -1;
  for (int pair = 0; pair < top * top; ++pair) {
    if (pair_total_[pair] <= 0.0) continue;
    last_pair = pair;
    if (u < pair_total_[pair]) break;
    u -= pair_total_[pair];
  }
  if (last_pair < 0) throw EngineFault("collision pick from an empty catalog", "total 0");
  const int e1 = last_pair / top, e2 = last_pair % top;
  const double scale = static_cast<double>(occ.shell_counts1[static_cast<std::size_t>(e1)]) *
                       occ.comp2[static_cast<std::size_t>(e2)];
  u = std::min(u, pair_total_[last_pair]) / scale;
  const int lo = std::max(0, e1 + e2 - (top - 1)), hi = std::min(top - 1, e1 + e2);
  int chosen = -1;
  for (int e3 = lo; e3 <= hi; ++e3) {
    const double rate = channel_rate(e1, e2, e3, occ);
    if (rate <= 0.0) continue;
    chosen = e3;
    if (u < rate) break;
    u -= rate;
  }
  if (chosen < 0) throw EngineFault("collision pair without open channel", "pair " + std::to_string(last_pair));
  return {e1, e2, chosen, e1 + e2 - chosen};
}

}  // namespace fermicool
