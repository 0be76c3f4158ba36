#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fermicool/emission.hpp"
#include "fermicool/kinetics.hpp"
#include "fermicool/statespace.hpp"

namespace fermicool {

/// Flat `key = value` configuration with dotted keys. Lines starting with '#'
/// are comments. Values are kept as text until resolved.
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text);
  static ConfigMap load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Applies `key=value`.
  void assign(const std::string& assignment);
  void merge(const ConfigMap& other);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& at(const std::string& key) const;

  double number(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Sorted `key = value` lines; parse(echo()) reproduces the map.
  std::string echo() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct SpeciesSpec {
  int components = 1;
  long n1 = 0;
  double t1_over_tf = 0.0;
  long n2 = 0;
  double t2_over_tf = 0.0;
};

struct OutputSpec {
  std::string dir = "out";
  bool events = false;
  std::string cache_dir;  // empty disables the disk cache
};

/// Typed view of a resolved configuration.
struct ExperimentConfig {
  std::string experiment;
  double scale = 1.0;
  std::uint64_t seed = 1;
  TrapSpec trap;
  SpeciesSpec species;
  EmissionPattern pattern;
  int far_threshold = 0;
  EngineOptions engine;
  Schedule schedule;
  OutputSpec output;
  int tables_max_shell = 6;
};

const std::vector<std::string>& preset_names();

/// Every key of the named experiment at the given scale. scale = 1 is the
/// full 81-shell trap; smaller scales shrink the shell count and the Fermi
/// energy together. Below 1 the cooling schedules switch to values tuned for
/// the half-size trap.
ConfigMap preset(const std::string& name, double scale = 1.0);

ExperimentConfig resolve(const ConfigMap& config);

/// Shell count and atom number for a scale: n_shells = round(80 s) + 1 and a
/// Fermi sea filling shells 0..round(38 s).
int scaled_shells(double scale);
long scaled_atoms(double scale);

}  // namespace fermicool
