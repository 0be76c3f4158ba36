#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fermicool/collision.hpp"
#include "fermicool/emission.hpp"
#include "fermicool/rates.hpp"
#include "fermicool/statespace.hpp"
#include "fermicool/thermo.hpp"

namespace fermicool {

/// A cooling stage: a pair of pulses repeated. gamma_target > 0 puts gamma
/// under the controller before each pulse; otherwise the pulses' gamma is used.
struct Stage {
  PulseSpec first;
  PulseSpec second;
  int repetitions = 0;
  double gamma_target = 0.0;
};

struct Schedule {
  std::vector<Stage> stages;
  std::uint64_t seed = 1;
  double gamma_min = 1e-3;
  double gamma_max = 1.0;
  int sample_every = 1;  // pulses between trajectory samples
  int stats_stage = -1;  // stage feeding the shell statistics, -1 = last

  void validate() const;
  double duration() const;
  long pulses() const;
};

enum class EventKind { laser, collision, bg1, bg2, removal, escape };
const char* event_name(EventKind kind);

struct EventRecord {
  double t;
  EventKind kind;
  long a, b, c, d;  // states (laser, bg1, removal, escape) or shells (collision, bg2)
};

struct Sample {
  double t = 0.0;
  int stage = -1;
  long n1 = 0, n2 = 0;
  FermiFit fit1, fit2;
  double t_over_tf1_initial = 0.0;  // normalized by the initial atom number
  double t_over_tf2_initial = 0.0;
  double gamma = 0.0;
  double gamma_n = 0.0;
};

struct LossCounts {
  long bg1 = 0, bg2 = 0, removal = 0, escape = 0;
  long total() const { return bg1 + bg2 + removal + escape; }
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<EventRecord> events;
  LossCounts losses;
  long laser_events = 0;
  long collision_events = 0;
  long energy_violations = 0;
};

struct EngineOptions {
  bool lasers = true;
  bool collisions = false;
  double gamma_bg = 0.0;      // per atom, trap units
  bool excited_removal = true;
  bool log_events = false;
  bool check_invariants = false;
  /// Events are drawn and logged but never applied: the catalog stays frozen.
  bool frozen = false;
  BlockingField::Mode blocking = BlockingField::Mode::exact;
};

/// Precomputed tables an engine runs against. Built once per trap.
struct EngineTables {
  const StateSpace* space = nullptr;
  std::shared_ptr<const XiKernel> kernel;                 // needed with lasers
  std::shared_ptr<const Eigen::MatrixXd> shell_xi;        // needed for shell blocking
  std::shared_ptr<const UTildeTable> u_tilde;             // needed with collisions
  EmissionPattern pattern;
};

/// A laser cycle whose atom may still be excited when the pulse ends.
struct Excitation {
  std::size_t state;     // where the atom landed
  std::uint64_t stamp;   // occupancy stamp of that state when it landed
  double r_l;
  double tau;            // pulse time left after the event
};

/// Exact event-driven simulation of the rate equations. Owns the occupancy,
/// the clock, and the random stream.
class Engine {
 public:
  Engine(EngineTables tables, EngineOptions options, OccupationState initial, std::uint64_t seed);

  const OccupationState& occupation() const { return occ_; }
  double time() const { return t_; }
  const Trajectory& trajectory() const { return traj_; }
  Trajectory& trajectory() { return traj_; }
  Rng& rng() { return rng_; }
  const BlockingField* blocking() const { return blocking_.get(); }

  /// Advances by pulse.duration. Returns the cycles eligible for removal.
  std::vector<Excitation> run_pulse(const PulseSpec& pulse, int axis);
  /// Deletes each atom of the list still excited at pulse end with
  /// probability exp(-2 gamma R_l tau). Returns the number removed.
  long apply_excited_removal(const PulseSpec& pulse, const std::vector<Excitation>& excitations);

  /// Current total rate of every channel, with the laser set by pulse/axis.
  double total_rate(const PulseSpec* pulse, int axis);

  /// gamma * <R> for the pulse and beam axis, <R> as in gamma_controller.
  ControllerResult controller(const PulseSpec& pulse, int axis, double target, double gamma_min,
                              double gamma_max);

  Sample snapshot(double gamma, double gamma_n, int stage) const;

  using SampleHook = std::function<void(const Sample&, const OccupationState&)>;
  /// Runs every stage with the beam axis cycling x, y, z per pulse.
  Trajectory run_schedule(const Schedule& schedule, const SampleHook& hook = {});

  long initial_n1() const { return initial_n1_; }
  long initial_n2() const { return initial_n2_; }

 private:
  void fill1(std::size_t state);
  void vacate1(std::size_t state);
  std::size_t random_occupied(int shell);
  std::size_t random_empty(int shell);
  std::size_t random_atom1();
  int random_shell2();

  void refresh_laser(const PulseSpec& pulse, int axis);
  void refresh_collisions();
  // Thinning bound of the laser rate for an atom in state s under the active
  // pulse: each line at its most favourable R.
  double laser_bound(std::size_t state);
  double laser_rate_of(std::size_t state);
  void begin_pulse(const PulseSpec& pulse, int axis);
  std::size_t pick_by_bound(double u) const;
  void touch(std::array<int, 2> shells1, std::array<int, 2> shells2, double sign);
  void log(EventKind kind, long a, long b = -1, long c = -1, long d = -1);
  void check() const;

  void do_laser(std::size_t p, const PulseSpec& pulse, int axis, double time_left, std::vector<Excitation>& out);
  void do_collision();
  void do_background();

  EngineTables tables_;
  EngineOptions options_;
  OccupationState occ_;
  Rng rng_;
  double t_ = 0.0;
  long initial_n1_, initial_n2_;

  // Per shell, states are kept partitioned [occupied | empty] inside their
  // shell's index range of perm_; where_ is the inverse permutation.
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> where_;
  std::vector<std::uint64_t> stamp_;

  std::unique_ptr<BlockingField> blocking_;
  std::unique_ptr<LaserLineCache> lines_;
  std::unique_ptr<EmissionSampler> sampler_;
  std::unique_ptr<CollisionCatalog> catalog_;

  Eigen::ArrayXd atom_rate_;
  double laser_total_ = 0.0;
  bool laser_on_ = false;
  PulseSpec active_;
  int active_axis_ = 0;
  std::uint64_t epoch_ = 0;
  std::vector<std::uint64_t> bound_epoch_;
  std::vector<double> bound_;
  Eigen::ArrayXd shell_bound_;
  double bound_total_ = 0.0;
  long touches_ = 0;
  Trajectory traj_;
};

}  // namespace fermicool
