// Acceptance checks. Prints one PASS/FAIL line per criterion; pass criterion
// numbers as arguments to run a subset. The exit status is nonzero only when a
// check could not be carried out (an exception), not when a criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "fermicool/collision.hpp"
#include "fermicool/config.hpp"
#include "fermicool/emission.hpp"
#include "fermicool/errors.hpp"
#include "fermicool/experiment.hpp"
#include "fermicool/kinetics.hpp"
#include "fermicool/thermo.hpp"

using namespace fermicool;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string cache_dir() {
  const char* env = std::getenv("FERMICOOL_CACHE");
  return env ? env : (std::filesystem::temp_directory_path() / "fermicool-cache").string();
}

// Reduced-scale preset with overrides, run in process.
struct Run {
  ExperimentConfig config;
  std::unique_ptr<RunResult> result;
};

Run run_preset(const std::string& name, const std::map<std::string, std::string>& overrides, double scale = 0.5) {
  ConfigMap m = preset(name, scale);
  m.set("output.cache_dir", cache_dir());
  for (const auto& [k, v] : overrides) m.set(k, v);
  Run r;
  r.config = resolve(m);
  const TrapTables tables = build_tables(r.config);
  r.result = std::make_unique<RunResult>(run_experiment(r.config, tables));
  return r;
}

std::vector<std::array<int, 4>> conserving_quadruples(int max_shell) {
  std::vector<std::array<int, 4>> out;
  for (int e1 = 0; e1 <= max_shell; ++e1)
    for (int e2 = 0; e2 <= max_shell; ++e2)
      for (int e3 = 0; e3 <= max_shell; ++e3) {
        const int e4 = e1 + e2 - e3;
        if (e4 >= 0 && e4 <= max_shell) out.push_back({e1, e2, e3, e4});
      }
  return out;
}

// 1. Series amplitudes against the brute-force state sum.
Verdict criterion1() {
  const double u0 = 0.3216;
  const UTildeTable table(7, u0);
  std::vector<double> ratio, printed;
  for (const auto& q : conserving_quadruples(6)) {
    const double brute = u_tilde_sq_brute(q[0], q[1], q[2], q[3], u0);
    ratio.push_back(table.exact(q[0], q[1], q[2], q[3]) / brute);
    printed.push_back(u_tilde_sq_hermite_sum(q[0], q[1], q[2], q[3], u0) / brute);
  }
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    return std::pair{(*hi - *lo) / mean, mean};
  };
  const auto [s, c] = spread(ratio);
  const auto [sp, cp] = spread(printed);
  std::cout << "  note: Hermite-integral form / state sum spans " << fmt("%.3g", sp) << " relative (mean ratio "
            << fmt("%.3g", cp) << "); not usable as a closed form\n";
  return {s <= 1e-6, std::to_string(ratio.size()) + " quadruples, relative spread " + fmt("%.2e", s) +
                         ", calibration constant " + fmt("%.12f", c)};
}

// 2. Far-shell form against the exact amplitudes.
Verdict criterion2() {
  const UTildeTable table(11, 1.0);
  double worst = 0.0;
  std::array<int, 4> at{};
  int n = 0, bad = 0;
  for (const auto& q : conserving_quadruples(10)) {
    if (*std::max_element(q.begin(), q.end()) - *std::min_element(q.begin(), q.end()) < 2) continue;
    const double dev = std::abs(u_tilde_sq_far(q[0], q[1], q[2], q[3], 1.0) / table.exact(q[0], q[1], q[2], q[3]) - 1.0);
    ++n;
    if (dev > 0.2) ++bad;
    if (dev > worst) {
      worst = dev;
      at = q;
    }
  }
  std::ostringstream d;
  d << n << " quadruples, " << bad << " beyond 20%, worst " << fmt("%.3f", worst) << " at (" << at[0] << ","
    << at[1] << "," << at[2] << "," << at[3] << ")";
  return {bad == 0, d.str()};
}

// 3. Completeness in the full trap and insensitivity to node doubling.
Verdict criterion3() {
  const StateSpace full(81);
  const XiKernel kernel(full, 2.0, EmissionPattern::isotropic());
  double min_sum = 2.0;
  Eigen::ArrayXd col(static_cast<Eigen::Index>(full.size()));
  for (std::size_t l = 0; l < full.shell_end(20); ++l) {
    kernel.column(l, col);  // xi is symmetric: the column is the row
    min_sum = std::min(min_sum, col.sum());
  }
  const StateSpace half(41);
  const XiKernel base(half, 2.0, EmissionPattern::isotropic());
  EmissionPattern doubled = EmissionPattern::isotropic();
  doubled.polar_nodes = 2 * base.rule().polar_nodes();
  doubled.azimuthal_nodes = 2 * base.rule().azimuthal_nodes();
  const XiKernel fine(half, 2.0, doubled);
  double max_change = 0.0;
  Eigen::ArrayXd a(static_cast<Eigen::Index>(half.size())), b(static_cast<Eigen::Index>(half.size()));
  for (std::size_t l = 0; l < half.shell_end(20); ++l) {
    base.column(l, a);
    fine.column(l, b);
    max_change = std::max(max_change, (a - b).abs().maxCoeff());
  }
  // the direct evaluator agrees with an independent sphere grid
  const double direct = xi({3, 5, 2}, {6, 1, 4}, EmissionPattern::isotropic(), 2.0);
  const double grid = oracle::xi({3, 5, 2}, {6, 1, 4}, EmissionPattern::isotropic(), 2.0, 64, 128);
  std::ostringstream d;
  d << "min row sum (shell <= 20, 81 shells) " << fmt("%.12f", min_sum) << ", max change on node doubling "
    << fmt("%.2e", max_change) << ", grid check " << fmt("%.1e", std::abs(direct / grid - 1));
  return {min_sum >= 0.999 && max_change < 1e-10 && std::abs(direct / grid - 1) < 1e-9, d.str()};
}

// Per-shell variance of component 1 conditioned on N1, N2 and E1 + E2, from
// independent shell fluctuations v (component 1) and w (component 2).
Eigen::ArrayXd constrained_variance(const Eigen::ArrayXd& v, const Eigen::ArrayXd& w) {
  const Eigen::ArrayXd e = Eigen::ArrayXd::LinSpaced(v.size(), 0.0, static_cast<double>(v.size() - 1));
  Eigen::Matrix3d c;
  c << v.sum(), 0.0, (e * v).sum(),
       0.0, w.sum(), (e * w).sum(),
       (e * v).sum(), (e * w).sum(), (e * e * (v + w)).sum();
  const Eigen::Matrix3d inv = c.inverse();
  Eigen::ArrayXd out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const Eigen::Vector3d x(v[k], 0.0, e[k] * v[k]);
    out[k] = v[k] - x.dot(inv * x);
  }
  return out;
}

// 4. Collisional equilibrium holds a thermal state.
Verdict criterion4() {
  const Run r = run_preset("thermalize", {{"species.n1", "2000"},
                                          {"species.n2", "2000"},
                                          {"schedule.stage1.repetitions", "400"}});
  const auto& traj = r.result->trajectory;
  const double per_atom = 2.0 * static_cast<double>(traj.collision_events) / 4000.0;
  const double t0 = 0.1 * fermi_temperature(2000.0);
  // late window: second half of the run
  const double t_end = traj.samples.back().t;
  double t_late = 0.0;
  int n_late = 0;
  for (const Sample& s : traj.samples)
    if (s.t >= 0.5 * t_end) {
      t_late += s.fit1.T;
      ++n_late;
    }
  t_late /= std::max(1, n_late);
  const FermiFit fit = fit_shell_counts(r.result->stats1->mean(), 2000.0);
  const ChiSquare chi = mean_chi_square(*r.result->stats1, fit);
  const Eigen::ArrayXd var = r.result->stats1->variance();
  const Eigen::ArrayXd var_err = r.result->stats1->variance_error();
  const Eigen::ArrayXd thermal = thermal_variance_curve(fit, r.config.trap.n_shells);
  int checked = 0, outside = 0;
  for (int e = 0; e < r.config.trap.n_shells; ++e) {
    if (thermal[e] <= 1.0) continue;
    ++checked;
    if (std::abs(var[e] - thermal[e]) > 3.0 * var_err[e]) ++outside;
  }
  // The run holds N1, N2 and the total energy fixed, which pulls the shell
  // variances near mu below g f (1 - f). Same comparison against the
  // Gaussian-conditioned prediction:
  const FermiFit fit2 = fit_shell_counts(r.result->stats2->mean(), 2000.0);
  const Eigen::ArrayXd constrained =
      constrained_variance(thermal, thermal_variance_curve(fit2, r.config.trap.n_shells));
  int outside_constrained = 0;
  for (int e = 0; e < r.config.trap.n_shells; ++e)
    if (thermal[e] > 1.0 && std::abs(var[e] - constrained[e]) > 3.0 * var_err[e]) ++outside_constrained;
  std::cout << "  note: against the fixed-N, fixed-energy prediction " << outside_constrained << "/" << checked
            << " shells lie outside 3 sigma\n";
  const double drift = std::abs(t_late / t0 - 1.0);
  std::ostringstream d;
  d << fmt("%.1f", per_atom) << " collisions/atom, T0 " << fmt("%.3f", t0) << " -> late mean " << fmt("%.3f", t_late)
    << " (drift " << fmt("%.1f", 100 * drift) << "%), reduced chi2 " << fmt("%.2f", chi.reduced()) << " on "
    << chi.dof << " dof, variances outside 3 sigma: " << outside << "/" << checked;
  return {per_atom >= 30 && drift <= 0.15 && chi.reduced() <= 2.0 && outside == 0, d.str()};
}

// Reduced single-component cooling, shared by 5, 7 and 10.
const Run& cooling_run() {
  static Run run = run_preset("cool1c", {});
  return run;
}

Verdict criterion5() {
  const Run& r = cooling_run();
  const Sample& last = r.result->trajectory.samples.back();
  const Sample& first = r.result->trajectory.samples.front();
  std::ostringstream d;
  d << "T/TF " << fmt("%.3f", first.fit1.T_over_TF) << " -> " << fmt("%.3f", last.fit1.T_over_TF) << ", N "
    << first.n1 << " -> " << last.n1 << " after " << fmt("%.2f", r.config.trap.seconds(last.t)) << " s";
  return {last.fit1.T_over_TF <= 0.15, d.str()};
}

Verdict criterion6() {
  const Run r = run_preset("cool2c", {});
  const Sample& last = r.result->trajectory.samples.back();
  const Sample& first = r.result->trajectory.samples.front();
  const double worst = std::max(last.fit1.T_over_TF, last.fit2.T_over_TF);
  std::ostringstream d;
  d << "T/TF " << fmt("%.3f", first.fit1.T_over_TF) << "," << fmt("%.3f", first.fit2.T_over_TF) << " -> "
    << fmt("%.3f", last.fit1.T_over_TF) << "," << fmt("%.3f", last.fit2.T_over_TF) << " after "
    << fmt("%.2f", r.config.trap.seconds(last.t)) << " s, N " << last.n1 << "," << last.n2;
  return {worst <= 0.08, d.str()};
}

// 7. Laser-cooled steady state: statistics over a holding stage after cooling.
Verdict criterion7() {
  // the last cooling stage again, held for 60 repetitions
  std::map<std::string, std::string> hold{{"schedule.stages", "4"}, {"schedule.stage4.repetitions", "60"}};
  const ConfigMap base = preset("cool1c", 0.5);
  for (const char* key : {"detuning", "rabi_ratio", "duration", "gamma", "gamma_target"})
    hold[std::string("schedule.stage4.") + key] = base.at(std::string("schedule.stage3.") + key);
  const Run r = run_preset("cool1c", hold);
  const ShellStats& s = *r.result->stats1;
  const FermiFit fit = fit_shell_counts(s.mean(), s.mean().sum());
  const Eigen::ArrayXd var = s.variance();
  const Eigen::ArrayXd thermal = thermal_variance_curve(fit, s.n_shells());
  double best = 0.0, deep = 0.0;
  int best_e = -1;
  for (int e = 0; e < s.n_shells(); ++e) {
    if (e <= fit.mu && e >= fit.mu - 5.0 && thermal[e] > 0) {
      if (var[e] / thermal[e] > best) {
        best = var[e] / thermal[e];
        best_e = e;
      }
    }
    if (e < fit.mu - 10.0) deep = std::max(deep, var[e]);
  }
  std::ostringstream d;
  d << s.count() << " samples, mu " << fmt("%.2f", fit.mu) << ", T/TF " << fmt("%.3f", fit.T_over_TF)
    << ", max variance/thermal below mu " << fmt("%.2f", best) << " (shell " << best_e << ")"
    << ", max variance >10 below mu " << fmt("%.4f", deep);
  return {best >= 1.5 && deep < 0.05, d.str()};
}

// Linear least-squares slope of y(x).
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Verdict criterion8() {
  const Run off = run_preset("store", {{"engine.lasers", "false"}});
  const Run on = run_preset("store", {});
  auto series = [](const Run& r, std::vector<double>& t, std::vector<double>& temp) {
    for (const Sample& s : r.result->trajectory.samples) {
      t.push_back(r.config.trap.seconds(s.t));
      temp.push_back(0.5 * (s.fit1.T + s.fit2.T));
    }
  };
  std::vector<double> t_off, T_off, t_on, T_on;
  series(off, t_off, T_off);
  series(on, t_on, T_on);
  const double heating = slope(t_off, T_off);
  // |dT|/T from the mean of the first and last tenth
  auto edge_mean = [](const std::vector<double>& v, bool tail) {
    const std::size_t k = std::max<std::size_t>(1, v.size() / 10);
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += tail ? v[v.size() - 1 - i] : v[i];
    return s / static_cast<double>(k);
  };
  const double change = std::abs(edge_mean(T_on, true) / edge_mean(T_on, false) - 1.0);
  const auto& lon = on.result->trajectory.losses;
  const auto& loff = off.result->trajectory.losses;
  const double n0 = static_cast<double>(on.result->trajectory.samples.front().n1 + on.result->trajectory.samples.front().n2);
  const double extra = static_cast<double>(lon.total() - loff.total()) / n0;
  std::ostringstream d;
  d << "lasers off: dT/dt " << fmt("%.3g", heating) << " hbar omega/s; lasers on: |dT|/T " << fmt("%.3f", change)
    << ", extra loss " << fmt("%.2f", 100 * extra) << "% (" << lon.removal << " removed, " << lon.escape
    << " escaped) over " << fmt("%.1f", t_on.back()) << " s";
  return {heating > 0 && change <= 0.2 && extra <= 0.05, d.str()};
}

// 9. Engine properties.
Verdict criterion9() {
  const StateSpace space(21);
  EngineTables tables;
  tables.space = &space;
  tables.u_tilde = std::make_shared<UTildeTable>(21, 0.3216);
  tables.kernel = std::make_shared<XiKernel>(space, 2.0, EmissionPattern::isotropic());
  auto gas = [&](std::uint64_t seed) {
    Rng rng(seed);
    OccupationState occ = thermal_populate(space, 3.0, 400, rng);
    thermal_populate_component2(space, 3.0, 400, rng, occ);
    return occ;
  };
  auto energy = [&](const OccupationState& o) {
    long s = 0;
    for (int e = 0; e < 21; ++e) s += e * (o.shell_counts1[static_cast<std::size_t>(e)] + o.comp2[static_cast<std::size_t>(e)]);
    return s;
  };

  // a million collisions with per-event energy and Pauli checks
  EngineOptions coll;
  coll.lasers = false;
  coll.collisions = true;
  coll.check_invariants = true;
  const OccupationState start = gas(1);
  Engine e(tables, coll, start, 2);
  while (e.trajectory().collision_events < 1000000) e.run_pulse({0, 0, 1, 50}, 0);
  const long violations = e.trajectory().energy_violations + (energy(e.occupation()) != energy(start) ? 1 : 0);

  // waiting times under a frozen catalog
  EngineOptions frozen = coll;
  frozen.frozen = true;
  frozen.log_events = true;
  Engine f(tables, frozen, gas(3), 4);
  const double rate = f.total_rate(nullptr, 0);
  f.run_pulse({0, 0, 1, 10001.0 / rate * 1.05}, 0);
  const auto& ev = f.trajectory().events;
  std::vector<double> waits;
  for (std::size_t i = 1; i < ev.size() && waits.size() < 10000; ++i) waits.push_back(ev[i].t - ev[i - 1].t);
  const double p = oracle::ks_p_value(waits, [rate](double t) { return 1.0 - std::exp(-rate * t); });

  // identical seeds with lasers, collisions and losses all on
  EngineOptions all;
  all.collisions = true;
  all.gamma_bg = 1e-4;
  all.log_events = true;
  all.check_invariants = true;
  Schedule sched;
  Stage st;
  st.first = {-6, 0.1, 0.8, 100};
  st.second = {-7, 0.1, 0.8, 100};
  st.repetitions = 5;
  st.gamma_target = 0.8;
  sched.stages.push_back(st);
  Engine a(tables, all, gas(5), 9), b(tables, all, gas(5), 9);
  const Trajectory ta = a.run_schedule(sched), tb = b.run_schedule(sched);
  bool same = ta.events.size() == tb.events.size() && a.occupation().comp1 == b.occupation().comp1 &&
              a.occupation().comp2 == b.occupation().comp2;
  for (std::size_t i = 0; same && i < ta.events.size(); ++i)
    same = ta.events[i].t == tb.events[i].t && ta.events[i].kind == tb.events[i].kind && ta.events[i].a == tb.events[i].a &&
           ta.events[i].b == tb.events[i].b && ta.events[i].c == tb.events[i].c && ta.events[i].d == tb.events[i].d;

  std::ostringstream d;
  d << e.trajectory().collision_events << " collisions, " << violations << " energy violations, Pauli checks clean; KS p "
    << fmt("%.3f", p) << " on " << waits.size() << " waits; identical seeds " << (same ? "bit-identical" : "DIFFER")
    << " over " << ta.events.size() << " events";
  return {violations == 0 && waits.size() == 10000 && p > 0.01 && same, d.str()};
}

Verdict criterion10() {
  const Run& r = cooling_run();
  double lo = 1e9, hi = 0.0;
  int n = 0;
  for (const Sample& s : r.result->trajectory.samples) {
    if (s.stage != 0 && s.stage != 1) continue;
    lo = std::min(lo, s.gamma_n);
    hi = std::max(hi, s.gamma_n);
    ++n;
  }
  std::ostringstream d;
  d << n << " pulses in stages 1-2, gamma_N in [" << fmt("%.3f", lo) << ", " << fmt("%.3f", hi) << "]";
  return {n > 0 && lo >= 0.6 && hi <= 1.0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0, errors = 0;
  for (int c = 1; c <= static_cast<int>(criteria.size()); ++c) {
    if (!wanted.empty() && !wanted.count(c)) continue;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Verdict v = criteria[static_cast<std::size_t>(c - 1)]();
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << "criterion " << c << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << "  ["
                << fmt("%.0f", secs) << " s]" << std::endl;
      if (!v.pass) ++failed;
    } catch (const std::exception& err) {
      std::cout << "criterion " << c << ": FAIL  error: " << err.what() << std::endl;
      ++errors;
    }
  }
  std::cout << failed + errors << " criteria failed" << std::endl;
  return errors == 0 ? 0 : 1;
}
