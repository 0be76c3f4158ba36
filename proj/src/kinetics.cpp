#include "fermicool/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fermicool/errors.hpp"

namespace fermicool {

void Schedule::validate() const {
  for (const Stage& stage : stages) {
    if (stage.repetitions < 0) throw ContractError("Schedule: negative repetitions");
    stage.first.validate();
    stage.second.validate();
    if (stage.gamma_target < 0 || stage.gamma_target >= 1.0)
      throw ContractError("Schedule: gamma target must be in [0, 1)");
  }
  if (sample_every < 1) throw ContractError("Schedule: sample_every must be >= 1");
  if (!(gamma_min > 0) || gamma_max < gamma_min) throw ContractError("Schedule: bad gamma range");
}

double Schedule::duration() const {
  double t = 0.0;
  for (const Stage& s : stages) t += s.repetitions * (s.first.duration + s.second.duration);
  return t;
}

long Schedule::pulses() const {
  long n = 0;
  for (const Stage& s : stages) n += 2L * s.repetitions;
  return n;
}

const char* event_name(EventKind kind) {
  switch (kind) {
    case EventKind::laser: return "laser";
    case EventKind::collision: return "coll";
    case EventKind::bg1: return "bg1";
    case EventKind::bg2: return "bg2";
    case EventKind::removal: return "removal";
    case EventKind::escape: return "escape";
  }
  return "?";
}

Engine::Engine(EngineTables tables, EngineOptions options, OccupationState initial, std::uint64_t seed)
    : tables_(std::move(tables)), options_(options), occ_(std::move(initial)), rng_(seed) {
  if (!tables_.space) throw ContractError("Engine: missing state space");
  const StateSpace& space = *tables_.space;
  occ_.check(space);
  if (options_.gamma_bg < 0) throw ContractError("Engine: gamma_bg must be >= 0");
  initial_n1_ = occ_.n_atoms1;
  initial_n2_ = occ_.n_atoms2;

  perm_.resize(space.size());
  where_.resize(space.size());
  stamp_.assign(space.size(), 0);
  for (int e = 0; e < space.n_shells(); ++e) {
    std::size_t k = space.shell_begin(e);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t s = space.shell_begin(e); s < space.shell_end(e); ++s)
        if ((occ_.comp1[s] != 0) == (pass == 0)) {
          perm_[k] = s;
          where_[s] = k++;
        }
  }

  if (options_.lasers) {
    if (!tables_.kernel) throw ContractError("Engine: lasers need the xi kernel");
    blocking_ = std::make_unique<BlockingField>(*tables_.kernel, options_.blocking, tables_.shell_xi);
    blocking_->reset(occ_);
    lines_ = std::make_unique<LaserLineCache>(*tables_.kernel);
    sampler_ = std::make_unique<EmissionSampler>(space, tables_.kernel->eta(), tables_.pattern);
    atom_rate_ = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(space.size()));
    bound_epoch_.assign(space.size(), 0);
    bound_.assign(space.size(), 0.0);
    shell_bound_ = Eigen::ArrayXd::Zero(space.n_shells());
  }
  if (options_.collisions) {
    if (!occ_.two_components) throw ContractError("Engine: collisions need two components");
    if (!tables_.u_tilde) throw ContractError("Engine: collisions need the amplitude table");
    if (tables_.u_tilde->n_shells() != space.n_shells())
      throw ContractError("Engine: amplitude table does not match the trap");
    catalog_ = std::make_unique<CollisionCatalog>(*tables_.u_tilde);
  }
}

void Engine::fill1(std::size_t state) {
  const StateSpace& space = *tables_.space;
  const int e = space.shell(state);
  const std::size_t boundary = space.shell_begin(e) + static_cast<std::size_t>(occ_.shell_counts1[static_cast<std::size_t>(e)]);
  occ_.fill(space, state);
  const std::size_t other = perm_[boundary];
  std::swap(perm_[where_[state]], perm_[boundary]);
  where_[other] = where_[state];
  where_[state] = boundary;
  if (blocking_) blocking_->on_fill(state);
  if (laser_on_) {
    const double b = laser_bound(state);
    shell_bound_[e] += b;
    bound_total_ += b;
  }
}

void Engine::vacate1(std::size_t state) {
  const StateSpace& space = *tables_.space;
  const int e = space.shell(state);
  const std::size_t last = space.shell_begin(e) + static_cast<std::size_t>(occ_.shell_counts1[static_cast<std::size_t>(e)]) - 1;
  occ_.vacate(space, state);
  const std::size_t other = perm_[last];
  std::swap(perm_[where_[state]], perm_[last]);
  where_[other] = where_[state];
  where_[state] = last;
  ++stamp_[state];
  if (blocking_) blocking_->on_vacate(state);
  if (laser_on_) {
    const double b = laser_bound(state);
    shell_bound_[e] -= b;
    bound_total_ -= b;
  }
}

std::size_t Engine::random_occupied(int shell) {
  const int k = occ_.shell_counts1[static_cast<std::size_t>(shell)];
  std::uniform_int_distribution<int> pick(0, k - 1);
  return perm_[tables_.space->shell_begin(shell) + static_cast<std::size_t>(pick(rng_))];
}

std::size_t Engine::random_empty(int shell) {
  const int k = occ_.shell_counts1[static_cast<std::size_t>(shell)];
  const int g = static_cast<int>(shell_degeneracy(shell));
  std::uniform_int_distribution<int> pick(k, g - 1);
  return perm_[tables_.space->shell_begin(shell) + static_cast<std::size_t>(pick(rng_))];
}

std::size_t Engine::random_atom1() {
  std::uniform_int_distribution<long> pick(0, occ_.n_atoms1 - 1);
  long u = pick(rng_);
  for (int e = 0; e < tables_.space->n_shells(); ++e) {
    const int k = occ_.shell_counts1[static_cast<std::size_t>(e)];
    if (u < k) return perm_[tables_.space->shell_begin(e) + static_cast<std::size_t>(u)];
    u -= k;
  }
  throw EngineFault("component-1 shell counts out of sync", "random_atom1");
}

int Engine::random_shell2() {
  std::uniform_int_distribution<long> pick(0, occ_.n_atoms2 - 1);
  long u = pick(rng_);
  for (int e = 0; e < tables_.space->n_shells(); ++e) {
    const int k = occ_.comp2[static_cast<std::size_t>(e)];
    if (u < k) return e;
    u -= k;
  }
  throw EngineFault("component-2 shell counts out of sync", "random_shell2");
}

void Engine::refresh_laser(const PulseSpec& pulse, int axis) {
  laser_total_ = 0.0;
  if (!options_.lasers || pulse.rabi_ratio == 0.0) return;
  const StateSpace& space = *tables_.space;
  const double pre = laser_prefactor(pulse);
  for (int e = 0; e < space.n_shells(); ++e) {
    const std::size_t begin = space.shell_begin(e);
    const std::size_t end = begin + static_cast<std::size_t>(occ_.shell_counts1[static_cast<std::size_t>(e)]);
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t p = perm_[k];
      double sum = 0.0;
      for (const LaserLine& line : lines_->lines(p, axis)) {
        const double rl = (*blocking_)[line.l];
        sum += rl * line_profile(line, pulse, rl);
      }
      const double rate = pre * sum;
      if (!(rate >= 0.0) || !std::isfinite(rate)) {
        std::ostringstream dump;
        dump << "state " << p << " axis " << axis << " rate " << rate << " detuning " << pulse.detuning
             << " gamma " << pulse.gamma;
        throw EngineFault("laser rate is negative or not finite", dump.str());
      }
      atom_rate_[static_cast<Eigen::Index>(p)] = rate;
      laser_total_ += rate;
    }
  }
}

double Engine::laser_bound(std::size_t state) {
  if (bound_epoch_[state] == epoch_) return bound_[state];
  // R / (off^2 + gamma^2 (R + xi)^2) peaks at R = sqrt(off^2 / gamma^2 + xi^2)
  const double g = active_.gamma;
  double sum = 0.0;
  for (const LaserLine& line : lines_->lines(state, active_axis_)) {
    const double off = active_.detuning - line.delta;
    const double r = std::min(1.0, std::sqrt(off * off / (g * g) + line.xi_lp * line.xi_lp));
    sum += r * line_profile(line, active_, r);
  }
  bound_epoch_[state] = epoch_;
  bound_[state] = laser_prefactor(active_) * sum;
  return bound_[state];
}

double Engine::laser_rate_of(std::size_t state) {
  double sum = 0.0;
  for (const LaserLine& line : lines_->lines(state, active_axis_)) {
    const double rl = (*blocking_)[line.l];
    sum += rl * line_profile(line, active_, rl);
  }
  return laser_prefactor(active_) * sum;
}

void Engine::begin_pulse(const PulseSpec& pulse, int axis) {
  laser_on_ = false;
  refresh_collisions();
  touches_ = 0;
  if (!options_.lasers || pulse.rabi_ratio == 0.0) return;
  active_ = pulse;
  active_axis_ = axis;
  ++epoch_;
  const StateSpace& space = *tables_.space;
  bound_total_ = 0.0;
  for (int e = 0; e < space.n_shells(); ++e) {
    const std::size_t begin = space.shell_begin(e);
    const std::size_t end = begin + static_cast<std::size_t>(occ_.shell_counts1[static_cast<std::size_t>(e)]);
    double sum = 0.0;
    for (std::size_t k = begin; k < end; ++k) sum += laser_bound(perm_[k]);
    shell_bound_[e] = sum;
    bound_total_ += sum;
  }
  laser_on_ = true;
}

std::size_t Engine::pick_by_bound(double u) const {
  const StateSpace& space = *tables_.space;
  std::size_t last = space.size();
  for (int e = 0; e < space.n_shells(); ++e) {
    if (shell_bound_[e] <= 0.0) continue;
    const std::size_t begin = space.shell_begin(e);
    const std::size_t end = begin + static_cast<std::size_t>(occ_.shell_counts1[static_cast<std::size_t>(e)]);
    if (u >= shell_bound_[e]) {
      u -= shell_bound_[e];
      for (std::size_t k = end; k > begin; --k)
        if (bound_[perm_[k - 1]] > 0.0) {
          last = perm_[k - 1];
          break;
        }
      continue;
    }
    for (std::size_t k = begin; k < end; ++k) {
      const double b = bound_[perm_[k]];
      if (b <= 0.0) continue;
      last = perm_[k];
      if (u < b) return last;
      u -= b;
    }
  }
  // rounding pushed u past the end
  if (last == space.size()) throw EngineFault("laser candidate without an atom", "bound " + std::to_string(bound_total_));
  return last;
}

void Engine::touch(std::array<int, 2> shells1, std::array<int, 2> shells2, double sign) {
  if (catalog_) catalog_->touch(occ_, shells1, shells2, sign);
}

void Engine::refresh_collisions() {
  if (catalog_) catalog_->refresh(occ_);
}

double Engine::total_rate(const PulseSpec* pulse, int axis) {
  if (pulse) refresh_laser(*pulse, axis);
  else laser_total_ = 0.0;
  refresh_collisions();
  const double bg = options_.gamma_bg * static_cast<double>(occ_.n_atoms1 + occ_.n_atoms2);
  return laser_total_ + (catalog_ ? catalog_->total() : 0.0) + bg;
}

void Engine::log(EventKind kind, long a, long b, long c, long d) {
  if (options_.log_events) traj_.events.push_back({t_, kind, a, b, c, d});
}

void Engine::check() const {
  try {
    occ_.check(*tables_.space);
  } catch (const ContractError& err) {
    std::ostringstream dump;
    dump << "t " << t_ << " n1 " << occ_.n_atoms1 << " n2 " << occ_.n_atoms2;
    throw EngineFault(std::string("occupancy invariant violated: ") + err.what(), dump.str());
  }
}

std::vector<Excitation> Engine::run_pulse(const PulseSpec& pulse, int axis) {
  pulse.validate();
  if (axis < 0 || axis > 2) throw ContractError("run_pulse: axis must be 0, 1 or 2");
  std::vector<Excitation> excitations;
  std::exponential_distribution<double> wait(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double remaining = pulse.duration;
  begin_pulse(pulse, axis);
  for (;;) {
    // laser events are thinned from the bound; the catalog is kept current
    // incrementally and rebuilt now and then against drift
    if (catalog_ && touches_ >= 4096) {
      catalog_->refresh(occ_);
      touches_ = 0;
    }
    const double laser = laser_on_ ? std::max(0.0, bound_total_) : 0.0;
    const double coll = catalog_ ? catalog_->total() : 0.0;
    const double bg = options_.gamma_bg * static_cast<double>(occ_.n_atoms1 + occ_.n_atoms2);
    const double total = laser + coll + bg;
    if (!(total >= 0.0) || !std::isfinite(total)) {
      std::ostringstream dump;
      dump << "laser bound " << laser << " collisions " << coll;
      laser_on_ = false;
      throw EngineFault("total event rate is negative or not finite", dump.str());
    }
    if (total == 0.0) {
      t_ += remaining;
      break;
    }
    const double dt = wait(rng_) / total;
    if (dt >= remaining) {
      t_ += remaining;
      break;
    }
    t_ += dt;
    remaining -= dt;
    double u = unit(rng_) * total;
    EventKind kind;
    std::size_t atom = 0;
    if (u < laser) {
      atom = pick_by_bound(u);
      const double rate = laser_rate_of(atom);
      if (!(rate >= 0.0) || !std::isfinite(rate)) {
        laser_on_ = false;
        throw EngineFault("laser rate is negative or not finite",
                          "state " + std::to_string(atom) + " rate " + std::to_string(rate));
      }
      if (unit(rng_) * bound_[atom] >= rate) continue;
      kind = EventKind::laser;
    } else if ((u -= laser) < coll) {
      kind = EventKind::collision;
    } else {
      kind = EventKind::bg1;
    }
    if (options_.frozen) {
      log(kind, -1);
      continue;
    }
    switch (kind) {
      case EventKind::laser: do_laser(atom, pulse, axis, remaining, excitations); break;
      case EventKind::collision: do_collision(); break;
      default: do_background(); break;
    }
    ++touches_;
    if (options_.check_invariants) check();
  }
  laser_on_ = false;
  return excitations;
}

void Engine::do_laser(std::size_t p, const PulseSpec& pulse, int axis, double time_left,
                      std::vector<Excitation>& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const StateSpace& space = *tables_.space;

  // Intermediate state proportional to its line weight.
  const auto& lines = lines_->lines(p, axis);
  double sum = 0.0;
  for (const LaserLine& line : lines) {
    const double rl = (*blocking_)[line.l];
    sum += rl * line_profile(line, pulse, rl);
  }
  double v = unit(rng_) * sum;
  const LaserLine* chosen = nullptr;
  for (const LaserLine& line : lines) {
    const double rl = (*blocking_)[line.l];
    const double w = rl * line_profile(line, pulse, rl);
    if (w <= 0.0) continue;
    chosen = &line;
    if (v < w) break;
    v -= w;
  }
  if (!chosen) throw EngineFault("laser event without an open line", "state " + std::to_string(p));
  const double r_l = (*blocking_)[chosen->l];

  // Final state from the emission distribution of l, conditioned on being free.
  const TrapState ls = space.state(chosen->l);
  for (long attempt = 0; attempt < 100000000L; ++attempt) {
    const auto n = sampler_->sample(ls, rng_);
    if (!n) {
      touch({space.shell(p), -1}, {-1, -1}, -1.0);
      vacate1(p);
      touch({space.shell(p), -1}, {-1, -1}, +1.0);
      ++traj_.losses.escape;
      log(EventKind::escape, static_cast<long>(p), static_cast<long>(chosen->l));
      return;
    }
    if (occ_.comp1[*n]) continue;
    const std::array<int, 2> shells{space.shell(p), space.shell(*n)};
    touch(shells, {-1, -1}, -1.0);
    vacate1(p);
    fill1(*n);
    touch(shells, {-1, -1}, +1.0);
    ++traj_.laser_events;
    log(EventKind::laser, static_cast<long>(p), static_cast<long>(chosen->l), static_cast<long>(*n));
    out.push_back({*n, stamp_[*n], r_l, time_left});
    return;
  }
  throw EngineFault("emission found no free final state", "l " + std::to_string(chosen->l) + " R " + std::to_string(r_l));
}

void Engine::do_collision() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto ch = catalog_->pick(unit(rng_) * catalog_->total(), occ_);
  const std::size_t from = random_occupied(ch.e1);
  const std::size_t to = random_empty(ch.e3);
  const StateSpace& space = *tables_.space;
  if (space.shell(from) + ch.e2 != space.shell(to) + ch.e4) ++traj_.energy_violations;
  touch({ch.e1, ch.e3}, {ch.e2, ch.e4}, -1.0);
  vacate1(from);
  fill1(to);
  occ_.remove2(ch.e2);
  occ_.add2(ch.e4);
  touch({ch.e1, ch.e3}, {ch.e2, ch.e4}, +1.0);
  ++traj_.collision_events;
  log(EventKind::collision, ch.e1, ch.e2, ch.e3, ch.e4);
}

void Engine::do_background() {
  std::uniform_int_distribution<long> pick(0, occ_.n_atoms1 + occ_.n_atoms2 - 1);
  if (pick(rng_) < occ_.n_atoms1) {
    const std::size_t s = random_atom1();
    const int e = tables_.space->shell(s);
    touch({e, -1}, {-1, -1}, -1.0);
    vacate1(s);
    touch({e, -1}, {-1, -1}, +1.0);
    ++traj_.losses.bg1;
    log(EventKind::bg1, static_cast<long>(s));
  } else {
    const int e = random_shell2();
    touch({-1, -1}, {e, -1}, -1.0);
    occ_.remove2(e);
    touch({-1, -1}, {e, -1}, +1.0);
    ++traj_.losses.bg2;
    log(EventKind::bg2, e);
  }
}

long Engine::apply_excited_removal(const PulseSpec& pulse, const std::vector<Excitation>& excitations) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  long removed = 0;
  for (const Excitation& x : excitations) {
    if (!occ_.comp1[x.state] || stamp_[x.state] != x.stamp) continue;
    const double still_excited = std::exp(-2.0 * pulse.gamma * x.r_l * x.tau);
    if (unit(rng_) < still_excited) {
      vacate1(x.state);
      ++removed;
      ++traj_.losses.removal;
      log(EventKind::removal, static_cast<long>(x.state));
    }
  }
  if (options_.check_invariants) check();
  return removed;
}

ControllerResult Engine::controller(const PulseSpec& pulse, int axis, double target, double gamma_min,
                                    double gamma_max) {
  if (!options_.lasers) return {pulse.gamma, 1.0, false};
  if (target > 0) return gamma_controller(occ_, target, pulse, axis, *blocking_, *lines_, gamma_min, gamma_max);
  const BlockingAverage avg = mean_blocking(occ_, pulse, axis, *blocking_, *lines_);
  return {pulse.gamma, avg.mean_r, avg.inhibited};
}

Sample Engine::snapshot(double gamma, double gamma_n, int stage) const {
  Sample s;
  s.t = t_;
  s.stage = stage;
  s.n1 = occ_.n_atoms1;
  s.n2 = occ_.n_atoms2;
  s.gamma = gamma;
  s.gamma_n = gamma_n;
  if (s.n1 > 0) {
    s.fit1 = fit_shell_counts(occ_.shells1(), static_cast<double>(s.n1));
    const double tf = fermi_temperature(static_cast<double>(initial_n1_));
    s.t_over_tf1_initial = tf > 0 ? s.fit1.T / tf : 0.0;
  }
  if (occ_.two_components && s.n2 > 0) {
    s.fit2 = fit_shell_counts(occ_.shells2(), static_cast<double>(s.n2));
    const double tf = fermi_temperature(static_cast<double>(initial_n2_));
    s.t_over_tf2_initial = tf > 0 ? s.fit2.T / tf : 0.0;
  }
  return s;
}

Trajectory Engine::run_schedule(const Schedule& schedule, const SampleHook& hook) {
  schedule.validate();
  double gamma = schedule.stages.empty() ? 0.0 : schedule.stages.front().first.gamma;
  double gamma_n = 0.0;
  if (!schedule.stages.empty() && options_.lasers) {
    const Stage& s0 = schedule.stages.front();
    const auto c = controller(s0.first, 0, s0.gamma_target, schedule.gamma_min, schedule.gamma_max);
    gamma = c.gamma;
    gamma_n = c.gamma * c.mean_r;
  }
  traj_.samples.push_back(snapshot(gamma, gamma_n, -1));
  if (hook) hook(traj_.samples.back(), occ_);

  long pulse_index = 0;
  for (std::size_t si = 0; si < schedule.stages.size(); ++si) {
    const Stage& stage = schedule.stages[si];
    for (int rep = 0; rep < stage.repetitions; ++rep)
      for (int half = 0; half < 2; ++half) {
        PulseSpec pulse = half == 0 ? stage.first : stage.second;
        const int axis = static_cast<int>(pulse_index % 3);
        if (options_.lasers && pulse.rabi_ratio > 0) {
          const auto c = controller(pulse, axis, stage.gamma_target, schedule.gamma_min, schedule.gamma_max);
          pulse.gamma = c.gamma;
          gamma_n = c.gamma * c.mean_r;
        } else {
          gamma_n = 0.0;
        }
        const auto excitations = run_pulse(pulse, axis);
        if (options_.excited_removal && !excitations.empty()) apply_excited_removal(pulse, excitations);
        ++pulse_index;
        if (pulse_index % schedule.sample_every == 0) {
          traj_.samples.push_back(snapshot(pulse.gamma, gamma_n, static_cast<int>(si)));
          if (hook) hook(traj_.samples.back(), occ_);
        }
      }
  }
  return traj_;
}

}  // namespace fermicool
