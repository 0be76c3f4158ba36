#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace fermicool {

using Rng = std::mt19937_64;

/// Physical trap and species parameters. Everything downstream works in trap
/// units: energies in hbar*omega, times in 1/omega, lengths in
/// xi = sqrt(hbar / m omega). SI values only enter through the conversions here.
struct TrapSpec {
  double omega = 0.0;       // rad/s
  int n_shells = 0;
  double lamb_dicke = 0.0;  // eta = k_L a, a = xi / sqrt(2)
  double wavelength = 0.0;  // m
  double mass = 0.0;        // kg
  double a_sc = 0.0;        // interspecies scattering length, m
  double gamma_bg = 0.0;    // background loss rate per atom, 1/s

  void validate() const;

  double oscillator_length() const;    // xi
  double ground_state_size() const;    // a = xi / sqrt(2)
  double lamb_dicke_from_wavelength() const;
  /// u0 = 4 pi a_sc / xi, the contact coupling in units of hbar*omega.
  double interaction_strength() const;
  double gamma_bg_trap() const { return gamma_bg / omega; }
  double seconds(double trap_time) const { return trap_time / omega; }
  double trap_time(double seconds) const { return seconds * omega; }
};

struct TrapState {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  int shell() const { return nx + ny + nz; }
  int level(int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  friend bool operator==(const TrapState&, const TrapState&) = default;
};

/// g_E = (E+1)(E+2)/2.
constexpr long shell_degeneracy(int shell) {
  return static_cast<long>(shell + 1) * (shell + 2) / 2;
}

/// Number of states in shells 0..shell inclusive.
constexpr long cumulative_states(int shell) {
  return static_cast<long>(shell + 1) * (shell + 2) * (shell + 3) / 6;
}

/// Smallest shell E whose cumulative state count reaches n_atoms.
/// Throws CapacityError when n_atoms exceeds a trap of n_shells shells
/// (n_shells <= 0 means unbounded).
int fermi_shell(long n_atoms, int n_shells = 0);

/// Enumeration of the isotropic 3D oscillator states below the trap top.
/// Ordering is lexicographic in (shell, nx, ny).
class StateSpace {
 public:
  explicit StateSpace(int n_shells);

  int n_shells() const { return n_shells_; }
  std::size_t size() const { return states_.size(); }
  const TrapState& state(std::size_t i) const { return states_[i]; }
  int shell(std::size_t i) const { return states_[i].shell(); }

  bool contains(int nx, int ny, int nz) const {
    return nx >= 0 && ny >= 0 && nz >= 0 && nx + ny + nz < n_shells_;
  }
  std::size_t index(int nx, int ny, int nz) const;
  std::size_t index(const TrapState& s) const { return index(s.nx, s.ny, s.nz); }

  std::size_t shell_begin(int shell) const {
    return static_cast<std::size_t>(shell == 0 ? 0 : cumulative_states(shell - 1));
  }
  std::size_t shell_end(int shell) const {
    return static_cast<std::size_t>(cumulative_states(shell));
  }

  /// g_E for every shell, as doubles.
  const Eigen::ArrayXd& degeneracies() const { return degeneracies_; }

 private:
  int n_shells_;
  std::vector<TrapState> states_;
  Eigen::ArrayXd degeneracies_;
};

/// Monte Carlo state. Component 1 (laser cooled) is resolved per trap state;
/// component 2 (sympathetic) only per shell.
struct OccupationState {
  std::vector<std::uint8_t> comp1;
  std::vector<int> shell_counts1;
  std::vector<int> comp2;
  long n_atoms1 = 0;
  long n_atoms2 = 0;
  bool two_components = false;

  static OccupationState empty(const StateSpace& space, bool two_components);

  bool occupied(std::size_t state) const { return comp1[state] != 0; }
  void fill(const StateSpace& space, std::size_t state);
  void vacate(const StateSpace& space, std::size_t state);
  void add2(int shell);
  void remove2(int shell);

  Eigen::ArrayXd shells1() const;
  Eigen::ArrayXd shells2() const;

  /// Throws ContractError describing the first violated invariant.
  void check(const StateSpace& space) const;
};

/// Fermi-Dirac occupation; T == 0 gives the step (1/2 exactly at E == mu).
double fermi_dirac(double energy, double temperature, double mu);

/// Chemical potential with sum_E g_E f(E) == n_atoms over n_shells shells.
double chemical_potential(int n_shells, double temperature, double n_atoms);

/// Mean occupation fraction f_E per shell for a thermal gas of n_atoms.
Eigen::ArrayXd thermal_fractions(int n_shells, double temperature, double n_atoms);

/// Per-state thermal sample of component 1, conditioned on exactly n_atoms.
OccupationState thermal_populate(const StateSpace& space, double temperature,
                                 long n_atoms, Rng& rng);

/// Per-shell thermal sample of component 2 into occ, conditioned on n_atoms.
void thermal_populate_component2(const StateSpace& space, double temperature,
                                 long n_atoms, Rng& rng, OccupationState& occ);

}  // namespace fermicool
