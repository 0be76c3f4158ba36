#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fermicool/config.hpp"
#include "fermicool/errors.hpp"
#include "fermicool/experiment.hpp"

using namespace fermicool;

int main(int argc, char** argv) {
  CLI::App app{"Kinetic Monte Carlo laser cooling of trapped Fermi gases"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  double scale = 0.0;
  std::string out_dir;
  bool events = false;
  bool preset_dump = false;
  bool quiet = false;
  std::vector<std::string> overrides;

  for (const std::string& name : preset_names()) {
    auto* cmd = app.add_subcommand(name, name == "tables" ? "dump matrix-element tables"
                                                          : "run the " + name + " experiment");
    cmd->add_option("--config", config_path, "key = value file applied over the preset")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--scale", scale, "trap scale in (0, 1]; 1 is the full-size trap");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("--events", events, "write the per-event log");
    cmd->add_flag("--preset-dump", preset_dump, "print the resolved configuration and exit");
    cmd->add_option("--set", overrides, "override a key, KEY=VALUE (repeatable)");
    cmd->add_flag("-q,--quiet", quiet, "no progress output");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ConfigMap file;
    if (!config_path.empty()) file = ConfigMap::load(config_path);
    double resolved_scale = 1.0;
    if (scale > 0) resolved_scale = scale;
    else if (file.has("scale")) resolved_scale = file.number("scale");

    ConfigMap config = preset(command, resolved_scale);
    config.merge(file);
    config.set("experiment", command);
    for (const auto& o : overrides) config.assign(o);
    if (app.get_subcommands().front()->count("--seed")) config.set("seed", std::to_string(seed));
    if (!out_dir.empty()) config.set("output.dir", out_dir);
    if (events) config.set("output.events", "true");

    resolve(config);  // validate before anything runs
    if (preset_dump) {
      std::cout << config.echo();
      return 0;
    }
    std::ostream* progress = quiet ? nullptr : &std::cerr;
    if (command == "tables") return dump_tables(config, progress);
    return run_to_directory(config, progress);
  } catch (const ContractError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 64;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
