#include "fermicool/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fermicool/errors.hpp"
#include "fermicool/units.hpp"

namespace fermicool {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

std::string pair_text(double a, double b) { return fmt(a) + "," + fmt(b); }

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ContractError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ContractError("config line " + std::to_string(number) + ": empty key");
    map.values_[key] = trim(body.substr(eq + 1));
  }
  return map;
}

ConfigMap ConfigMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void ConfigMap::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ContractError("expected KEY=VALUE, got '" + assignment + "'");
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

void ConfigMap::merge(const ConfigMap& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

const std::string& ConfigMap::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ContractError("missing config key '" + key + "'");
  return it->second;
}

double ConfigMap::number(const std::string& key) const {
  const std::string& v = at(key);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ContractError("config key '" + key + "' is not a number: " + v);
  return out;
}

long ConfigMap::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v)) throw ContractError("config key '" + key + "' must be an integer");
  return static_cast<long>(v);
}

std::uint64_t ConfigMap::unsigned_integer(const std::string& key) const {
  const std::string& v = at(key);
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v[0] == '-')
    throw ContractError("config key '" + key + "' is not an unsigned integer: " + v);
  return out;
}

bool ConfigMap::flag(const std::string& key) const {
  const std::string& v = at(key);
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ContractError("config key '" + key + "' is not a boolean: " + v);
}

std::vector<double> ConfigMap::numbers(const std::string& key) const {
  std::vector<double> out;
  std::stringstream in(at(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    ConfigMap one;
    one.set(key, trim(item));
    out.push_back(one.number(key));
  }
  return out;
}

std::string ConfigMap::echo() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"cool1c", "cool2c", "thermalize", "store", "tables"};
  return names;
}

int scaled_shells(double scale) {
  if (!(scale > 0) || scale > 1) throw ContractError("scale must be in (0, 1]");
  return static_cast<int>(std::lround(80.0 * scale)) + 1;
}

long scaled_atoms(double scale) {
  if (!(scale > 0) || scale > 1) throw ContractError("scale must be in (0, 1]");
  return cumulative_states(static_cast<int>(std::lround(38.0 * scale)));
}

namespace {

struct StageText {
  double d1, d2, r1, r2, t1, t2;
  int reps;
  double target;
};

void put_stages(ConfigMap& m, const std::vector<StageText>& stages) {
  m.set("schedule.stages", std::to_string(stages.size()));
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const StageText& s = stages[i];
    const std::string p = "schedule.stage" + std::to_string(i + 1) + ".";
    m.set(p + "detuning", pair_text(s.d1, s.d2));
    m.set(p + "rabi_ratio", pair_text(s.r1, s.r2));
    m.set(p + "duration", pair_text(s.t1, s.t2));
    m.set(p + "repetitions", std::to_string(s.reps));
    m.set(p + "gamma_target", fmt(s.target));
    m.set(p + "gamma", pair_text(s.target > 0 ? s.target : 0.8, s.target > 0 ? s.target : 0.8));
  }
}

}  // namespace

ConfigMap preset(const std::string& name, double scale) {
  if (std::find(preset_names().begin(), preset_names().end(), name) == preset_names().end()) {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ContractError("unknown preset '" + name + "'; valid presets: " + valid);
  }
  const int shells = scaled_shells(scale);
  const long atoms = scaled_atoms(scale);
  const bool reduced = scale < 1.0;

  ConfigMap m;
  m.set("experiment", name);
  m.set("scale", fmt(scale));
  m.set("seed", "1");
  m.set("trap.omega_hz", "2400");
  m.set("trap.n_shells", std::to_string(shells));
  m.set("trap.lamb_dicke", "2");
  m.set("trap.wavelength_nm", "720");
  m.set("trap.mass_amu", fmt(units::kPotassium40MassAmu));
  m.set("trap.a_sc_bohr", "157");
  m.set("trap.gamma_bg_hz", fmt(1.0 / 350.0));
  m.set("emission.pattern", "isotropic");
  m.set("matrix.far_threshold", "0");
  m.set("engine.lasers", "true");
  m.set("engine.collisions", "false");
  m.set("engine.excited_removal", "true");
  m.set("engine.blocking", "exact");
  m.set("engine.check_invariants", "false");
  m.set("schedule.gamma_min", "0.001");
  m.set("schedule.gamma_max", "1");
  m.set("schedule.sample_every", "1");
  m.set("schedule.stats_stage", "0");
  m.set("output.dir", "out-" + name);
  m.set("output.events", "false");
  m.set("output.cache_dir", "");
  m.set("tables.max_shell", "6");
  m.set("species.components", "1");
  m.set("species.n1", std::to_string(atoms));
  m.set("species.n2", "0");
  m.set("species.t1_over_tf", "1.04");
  m.set("species.t2_over_tf", "0");

  if (name == "cool1c" || name == "tables") {
    if (reduced)
      // Tuned on the half-size trap. The sidebands stay at the full-size
      // detunings: the trap depth shrinks but the recoil does not. The last
      // stage runs narrow lines under a low gamma_N target.
      put_stages(m, {{-10, -11, 0.15, 0.15, 250, 250, 8, 0.8},
                     {-11, -12, 0.1, 0.1, 250, 250, 4, 0.8},
                     {-11, -12, 0.95, 0.95, 2000, 2000, 20, 0.01}});
    else
      put_stages(m, {{-11, -12, 0.013, 0.013, 250, 250, 60, 0.8},
                     {-16, -17, 0.007, 0.01, 500, 500, 39, 0.8},
                     {-19, -20, 0.1, 0.8, 2000, 4000, 2, 0.8}});
    if (name == "tables") m.set("engine.lasers", "false");
  } else if (name == "cool2c") {
    m.set("species.components", "2");
    m.set("species.n2", std::to_string(atoms));
    m.set("species.t1_over_tf", "1");
    m.set("species.t2_over_tf", "1");
    m.set("engine.collisions", "true");
    m.set("engine.blocking", "shell");
    if (reduced)
      put_stages(m, {{-10, -11, 0.15, 0.15, 250, 250, 8, 0.8},
                     {-11, -12, 0.1, 0.1, 250, 250, 4, 0.8},
                     {-12, -13, 0.95, 0.95, 4000, 4000, 25, 0.005}});
    else
      put_stages(m, {{-11, -12, 0.113, 0.113, 250, 250, 39, 0.8},
                     {-16, -17, 0.008, 0.012, 2000, 2000, 7, 0.8},
                     {-19, -20, 0.0025, 0.004, 4000, 4000, 3, 0.8}});
  } else if (name == "thermalize") {
    m.set("species.components", "2");
    m.set("species.n2", std::to_string(atoms));
    m.set("species.t1_over_tf", "0.1");
    m.set("species.t2_over_tf", "0.1");
    m.set("engine.lasers", "false");
    m.set("engine.collisions", "true");
    m.set("trap.gamma_bg_hz", "0");
    // 400 ms in 80 sampled chunks.
    const double chunk = 0.4 * 2.0 * units::kPi * 2400.0 / 80.0;
    put_stages(m, {{0, 0, 0, 0, chunk, chunk, 40, 0}});
  } else if (name == "store") {
    m.set("species.components", "2");
    m.set("species.n2", std::to_string(atoms));
    m.set("species.t1_over_tf", reduced ? "0.05" : "0.03");
    m.set("species.t2_over_tf", reduced ? "0.05" : "0.03");
    m.set("engine.collisions", "true");
    m.set("engine.blocking", "shell");
    // Final-stage pulses repeated for about 10 s.
    if (reduced)
      put_stages(m, {{-12, -13, 0.1, 0.1, 4000, 4000, 19, 0.005}});
    else
      put_stages(m, {{-19, -20, 0.0025, 0.004, 4000, 4000, 19, 0.8}});
  }
  return m;
}

ExperimentConfig resolve(const ConfigMap& m) {
  ExperimentConfig c;
  c.experiment = m.at("experiment");
  c.scale = m.number("scale");
  c.seed = m.unsigned_integer("seed");

  const double omega = 2.0 * units::kPi * m.number("trap.omega_hz");
  c.trap.omega = omega;
  c.trap.n_shells = static_cast<int>(m.integer("trap.n_shells"));
  c.trap.lamb_dicke = m.number("trap.lamb_dicke");
  c.trap.wavelength = m.number("trap.wavelength_nm") * 1e-9;
  c.trap.mass = m.number("trap.mass_amu") * units::kAtomicMassUnit;
  c.trap.a_sc = m.number("trap.a_sc_bohr") * units::kBohrRadius;
  c.trap.gamma_bg = m.number("trap.gamma_bg_hz");
  c.trap.validate();

  c.species.components = static_cast<int>(m.integer("species.components"));
  if (c.species.components != 1 && c.species.components != 2)
    throw ContractError("species.components must be 1 or 2");
  c.species.n1 = m.integer("species.n1");
  c.species.t1_over_tf = m.number("species.t1_over_tf");
  c.species.n2 = m.integer("species.n2");
  c.species.t2_over_tf = m.number("species.t2_over_tf");
  if (c.species.n1 < 1) throw ContractError("species.n1 must be >= 1");
  if (c.species.components == 2 && c.species.n2 < 1) throw ContractError("species.n2 must be >= 1");

  c.pattern = EmissionPattern::parse(m.at("emission.pattern"));
  c.far_threshold = static_cast<int>(m.integer("matrix.far_threshold"));

  c.engine.lasers = m.flag("engine.lasers");
  c.engine.collisions = m.flag("engine.collisions");
  c.engine.excited_removal = m.flag("engine.excited_removal");
  c.engine.check_invariants = m.flag("engine.check_invariants");
  c.engine.gamma_bg = c.trap.gamma_bg_trap();
  const std::string blocking = m.at("engine.blocking");
  if (blocking == "exact") c.engine.blocking = BlockingField::Mode::exact;
  else if (blocking == "shell") c.engine.blocking = BlockingField::Mode::shell;
  else throw ContractError("engine.blocking must be exact or shell");
  if (c.engine.collisions && c.species.components != 2)
    throw ContractError("engine.collisions needs species.components = 2");

  c.schedule.seed = c.seed;
  c.schedule.gamma_min = m.number("schedule.gamma_min");
  c.schedule.gamma_max = m.number("schedule.gamma_max");
  c.schedule.sample_every = static_cast<int>(m.integer("schedule.sample_every"));
  const long n_stages = m.integer("schedule.stages");
  for (long i = 1; i <= n_stages; ++i) {
    const std::string p = "schedule.stage" + std::to_string(i) + ".";
    const auto d = m.numbers(p + "detuning");
    const auto r = m.numbers(p + "rabi_ratio");
    const auto t = m.numbers(p + "duration");
    const auto g = m.numbers(p + "gamma");
    if (d.size() != 2 || r.size() != 2 || t.size() != 2 || g.size() != 2)
      throw ContractError(p + "* must list exactly two pulses");
    Stage s;
    s.first = {d[0], r[0], g[0], t[0]};
    s.second = {d[1], r[1], g[1], t[1]};
    s.repetitions = static_cast<int>(m.integer(p + "repetitions"));
    s.gamma_target = m.number(p + "gamma_target");
    c.schedule.stages.push_back(s);
  }
  const long stats_stage = m.integer("schedule.stats_stage");
  c.schedule.stats_stage = stats_stage <= 0 ? -1 : static_cast<int>(stats_stage - 1);
  c.schedule.validate();

  c.output.dir = m.at("output.dir");
  c.output.events = m.flag("output.events");
  c.output.cache_dir = m.at("output.cache_dir");
  c.tables_max_shell = static_cast<int>(m.integer("tables.max_shell"));
  return c;
}

}  // namespace fermicool
