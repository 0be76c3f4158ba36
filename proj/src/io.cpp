#include "fermicool/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fermicool/collision.hpp"
#include "fermicool/emission.hpp"

namespace fermicool {

std::string fmt9(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

namespace {

std::string banner(const std::string& kind) {
  return "# fermicool " + kind + " v" + std::to_string(kSchemaVersion) + "\n";
}

}  // namespace

void write_trajectory(const std::string& path, const Trajectory& traj, const TrapSpec& trap) {
  std::ostringstream out;
  out << banner("trajectory");
  out << "t_omega\tt_s\tstage\tn1\tn2\tT1\tmu1\tT1_over_TF1\tT1_over_TF1_initial\t"
         "T2\tmu2\tT2_over_TF2\tT2_over_TF2_initial\tgamma\tgamma_N\n";
  for (const Sample& s : traj.samples) {
    out << fmt9(s.t) << '\t' << fmt9(trap.seconds(s.t)) << '\t' << s.stage + 1 << '\t' << s.n1 << '\t'
        << s.n2 << '\t' << fmt9(s.fit1.T) << '\t' << fmt9(s.fit1.mu) << '\t' << fmt9(s.fit1.T_over_TF)
        << '\t' << fmt9(s.t_over_tf1_initial) << '\t' << fmt9(s.fit2.T) << '\t' << fmt9(s.fit2.mu) << '\t'
        << fmt9(s.fit2.T_over_TF) << '\t' << fmt9(s.t_over_tf2_initial) << '\t' << fmt9(s.gamma) << '\t'
        << fmt9(s.gamma_n) << '\n';
  }
  write_text(path, out.str());
}

void write_events(const std::string& path, const std::vector<EventRecord>& events, const TrapSpec& trap) {
  std::ostringstream out;
  out << banner("events");
  out << "t_omega\tt_s\tkind\ta\tb\tc\td\n";
  for (const EventRecord& e : events)
    out << fmt9(e.t) << '\t' << fmt9(trap.seconds(e.t)) << '\t' << event_name(e.kind) << '\t' << e.a << '\t'
        << e.b << '\t' << e.c << '\t' << e.d << '\n';
  write_text(path, out.str());
}

void write_stats(const std::string& path, const std::vector<const ShellStats*>& stats,
                 const std::vector<FermiFit>& fits) {
  std::ostringstream out;
  out << banner("shell_stats");
  out << "component\tE\tg_E\tmean\tvariance\tthermal_mean\tthermal_variance\tstderr_mean\tstderr_variance\n";
  for (std::size_t c = 0; c < stats.size(); ++c) {
    const ShellStats& s = *stats[c];
    const Eigen::ArrayXd var = s.variance();
    const Eigen::ArrayXd tm = thermal_mean_curve(fits[c], s.n_shells());
    const Eigen::ArrayXd tv = thermal_variance_curve(fits[c], s.n_shells());
    const Eigen::ArrayXd se = s.standard_error();
    const Eigen::ArrayXd sv = s.variance_error();
    for (int e = 0; e < s.n_shells(); ++e)
      out << c + 1 << '\t' << e << '\t' << shell_degeneracy(e) << '\t' << fmt9(s.mean()[e]) << '\t'
          << fmt9(var[e]) << '\t' << fmt9(tm[e]) << '\t' << fmt9(tv[e]) << '\t' << fmt9(se[e]) << '\t'
          << fmt9(sv[e]) << '\n';
  }
  write_text(path, out.str());
}

void write_xi_table(const std::string& path, const ExperimentConfig& config, int max_shell) {
  const StateSpace space(max_shell + 1);
  std::ostringstream out;
  out << banner("xi");
  out << "# eta " << fmt9(config.trap.lamb_dicke) << " pattern " << config.pattern.name() << "\n";
  out << "lx\tly\tlz\tmx\tmy\tmz\txi\tmethod\n";
  for (std::size_t l = 0; l < space.size(); ++l)
    for (std::size_t m = 0; m < space.size(); ++m) {
      const TrapState& a = space.state(l);
      const TrapState& b = space.state(m);
      out << a.nx << '\t' << a.ny << '\t' << a.nz << '\t' << b.nx << '\t' << b.ny << '\t' << b.nz << '\t'
          << fmt9(xi(a, b, config.pattern, config.trap.lamb_dicke)) << "\tquadrature\n";
    }
  write_text(path, out.str());
}

void write_u_tilde_table(const std::string& path, const ExperimentConfig& config, int max_shell) {
  const double u0 = config.trap.interaction_strength();
  const UTildeTable table(max_shell + 1, u0, config.far_threshold);
  std::ostringstream out;
  out << banner("u_tilde_sq");
  out << "# u0 " << fmt9(u0) << " far_threshold " << config.far_threshold << "\n";
  out << "e1\te2\te3\te4\tu_tilde_sq\tmethod\n";
  for (int e1 = 0; e1 <= max_shell; ++e1)
    for (int e2 = 0; e2 <= max_shell; ++e2)
      for (int e3 = 0; e3 <= max_shell; ++e3) {
        const int e4 = e1 + e2 - e3;
        if (e4 < 0 || e4 > max_shell) continue;
        const bool far = table.method(e1, e2, e3, e4) == UTildeTable::Method::far_shell;
        out << e1 << '\t' << e2 << '\t' << e3 << '\t' << e4 << '\t' << fmt9(table(e1, e2, e3, e4)) << '\t'
            << (far ? "far-shell-approx" : "closed-form") << '\n';
      }
  write_text(path, out.str());
}

}  // namespace fermicool
