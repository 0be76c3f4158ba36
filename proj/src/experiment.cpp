#include "fermicool/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fermicool/errors.hpp"
#include "fermicool/io.hpp"
#include "fermicool/table_cache.hpp"

namespace fermicool {

TrapTables build_tables(const ExperimentConfig& config, std::ostream* progress) {
  TrapTables t;
  auto space = std::make_shared<StateSpace>(config.trap.n_shells);
  t.space = space;
  t.engine.space = space.get();
  t.engine.pattern = config.pattern;
  const double eta = config.trap.lamb_dicke;
  if (config.engine.lasers) {
    if (progress) *progress << "building emission kernel for " << space->size() << " states\n";
    t.engine.kernel = std::make_shared<XiKernel>(*space, eta, config.pattern);
    if (config.engine.blocking == BlockingField::Mode::shell) {
      std::ostringstream key;
      key << "shell_xi n_shells=" << config.trap.n_shells << " eta=" << fmt9(eta)
          << " pattern=" << config.pattern.name() << " nodes=" << t.engine.kernel->rule().polar_nodes() << "x"
          << t.engine.kernel->rule().azimuthal_nodes();
      const TableCache cache(config.output.cache_dir);
      if (progress && !cache.load("shell_xi", key.str())) *progress << "building shell emission table\n";
      const auto kernel = t.engine.kernel;
      t.engine.shell_xi = std::make_shared<const Eigen::MatrixXd>(
          cache.get("shell_xi", key.str(), [&] { return shell_xi_table(*kernel); }));
    }
  }
  if (config.engine.collisions)
    t.engine.u_tilde = std::make_shared<UTildeTable>(config.trap.n_shells, config.trap.interaction_strength(),
                                                     config.far_threshold);
  return t;
}

OccupationState initial_state(const ExperimentConfig& config, const StateSpace& space, Rng& rng) {
  const SpeciesSpec& sp = config.species;
  const double t1 = sp.t1_over_tf * fermi_temperature(static_cast<double>(sp.n1));
  OccupationState occ = thermal_populate(space, t1, sp.n1, rng);
  if (sp.components == 2) {
    const double t2 = sp.t2_over_tf * fermi_temperature(static_cast<double>(sp.n2));
    thermal_populate_component2(space, t2, sp.n2, rng, occ);
  }
  return occ;
}

namespace {

std::uint64_t engine_seed(std::uint64_t seed) { return seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL; }

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const TrapTables& tables, std::ostream* progress) {
  const auto start = std::chrono::steady_clock::now();
  Rng init(config.seed);
  OccupationState occ = initial_state(config, *tables.space, init);

  EngineOptions options = config.engine;
  options.log_events = config.output.events;
  Engine engine(tables.engine, options, std::move(occ), engine_seed(config.seed));

  RunResult result;
  const int n_shells = tables.space->n_shells();
  result.stats1 = std::make_unique<ShellStats>(n_shells);
  if (config.species.components == 2) result.stats2 = std::make_unique<ShellStats>(n_shells);
  const int stats_stage =
      config.schedule.stats_stage >= 0 ? config.schedule.stats_stage : static_cast<int>(config.schedule.stages.size()) - 1;
  const long total_pulses = config.schedule.pulses();
  long seen = 0;
  auto hook = [&](const Sample& s, const OccupationState& o) {
    if (s.stage == stats_stage) {
      result.stats1->accumulate(o, s.t, 1);
      if (result.stats2) result.stats2->accumulate(o, s.t, 2);
    }
    if (progress && (seen++ % 20 == 0 || s.stage < 0)) {
      *progress << "t=" << fmt9(config.trap.seconds(s.t)) << "s stage " << s.stage + 1 << " N1=" << s.n1
                << " T1/TF=" << fmt9(s.fit1.T_over_TF);
      if (config.species.components == 2) *progress << " N2=" << s.n2 << " T2/TF=" << fmt9(s.fit2.T_over_TF);
      *progress << " gamma=" << fmt9(s.gamma) << " gammaN=" << fmt9(s.gamma_n) << " (" << seen * config.schedule.sample_every
                << "/" << total_pulses << " pulses)\n";
    }
  };
  result.trajectory = engine.run_schedule(config.schedule, hook);
  result.final_state = engine.occupation();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

FermiFit fit_of_means(const ShellStats& stats, const Eigen::ArrayXd& fallback_counts) {
  const Eigen::ArrayXd counts = stats.count() > 0 ? stats.mean() : fallback_counts;
  const double n = counts.sum();
  if (n <= 0) return {};
  return fit_shell_counts(counts, n);
}

nlohmann::json fit_json(const FermiFit& f) {
  return {{"T", f.T}, {"mu", f.mu}, {"T_over_TF", f.T_over_TF}, {"residual", f.residual},
          {"zero_temperature", f.zero_temperature}};
}

}  // namespace

int run_to_directory(const ConfigMap& map, std::ostream* progress) {
  const ExperimentConfig config = resolve(map);
  const std::filesystem::path dir(config.output.dir);
  std::filesystem::create_directories(dir);
  write_text((dir / "config.echo").string(), "# fermicool config v" + std::to_string(kSchemaVersion) + "\n" + map.echo());
  try {
    const TrapTables tables = build_tables(config, progress);
    const RunResult r = run_experiment(config, tables, progress);
    const Trajectory& traj = r.trajectory;
    write_trajectory((dir / "trajectory.tsv").string(), traj, config.trap);
    if (config.output.events) write_events((dir / "events.tsv").string(), traj.events, config.trap);

    std::vector<const ShellStats*> stats{r.stats1.get()};
    std::vector<FermiFit> fits{fit_of_means(*r.stats1, r.final_state.shells1())};
    if (r.stats2) {
      stats.push_back(r.stats2.get());
      fits.push_back(fit_of_means(*r.stats2, r.final_state.shells2()));
    }
    write_stats((dir / "stats.tsv").string(), stats, fits);

    const Sample& first = traj.samples.front();
    const Sample& last = traj.samples.back();
    nlohmann::json summary;
    summary["schema"] = kSchemaVersion;
    summary["experiment"] = config.experiment;
    summary["seed"] = config.seed;
    summary["scale"] = config.scale;
    summary["n_shells"] = config.trap.n_shells;
    summary["simulated_time_omega"] = last.t;
    summary["simulated_time_s"] = config.trap.seconds(last.t);
    summary["wall_seconds"] = r.wall_seconds;
    summary["initial"] = {{"n1", first.n1}, {"n2", first.n2}, {"T1_over_TF", first.fit1.T_over_TF},
                          {"T2_over_TF", first.fit2.T_over_TF}};
    summary["final"] = {{"n1", last.n1},
                        {"n2", last.n2},
                        {"T1_over_TF", last.fit1.T_over_TF},
                        {"T1_over_TF_initial_N", last.t_over_tf1_initial},
                        {"T2_over_TF", last.fit2.T_over_TF},
                        {"T2_over_TF_initial_N", last.t_over_tf2_initial},
                        {"fit1", fit_json(last.fit1)},
                        {"fit2", fit_json(last.fit2)}};
    summary["losses"] = {{"background1", traj.losses.bg1},
                         {"background2", traj.losses.bg2},
                         {"excited_removal", traj.losses.removal},
                         {"escape", traj.losses.escape},
                         {"total", traj.losses.total()}};
    summary["events"] = {{"laser", traj.laser_events}, {"collision", traj.collision_events}};
    summary["energy_violations"] = traj.energy_violations;
    summary["statistics_fit"] = nlohmann::json::array();
    for (const auto& f : fits) summary["statistics_fit"].push_back(fit_json(f));
    write_text((dir / "summary.json").string(), summary.dump(2) + "\n");
    return 0;
  } catch (const EngineFault& fault) {
    write_text((dir / "fault.txt").string(), std::string(fault.what()) + "\n" + fault.diagnostic + "\n");
    if (progress) *progress << "engine fault: " << fault.what() << "\n";
    return 2;
  }
}

int dump_tables(const ConfigMap& map, std::ostream* progress) {
  const ExperimentConfig config = resolve(map);
  const std::filesystem::path dir(config.output.dir);
  std::filesystem::create_directories(dir);
  write_text((dir / "config.echo").string(), "# fermicool config v" + std::to_string(kSchemaVersion) + "\n" + map.echo());
  if (progress) *progress << "writing tables up to shell " << config.tables_max_shell << "\n";
  write_xi_table((dir / "xi.tsv").string(), config, config.tables_max_shell);
  write_u_tilde_table((dir / "u_tilde_sq.tsv").string(), config, config.tables_max_shell);
  return 0;
}

}  // namespace fermicool
