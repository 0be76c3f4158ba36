#include "fermicool/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "fermicool/errors.hpp"
#include "fermicool/units.hpp"

namespace fermicool {

void TrapSpec::validate() const {
  if (n_shells < 1) throw ContractError("TrapSpec: n_shells must be >= 1");
  if (!(omega > 0)) throw ContractError("TrapSpec: omega must be > 0");
  if (!(lamb_dicke > 0)) throw ContractError("TrapSpec: lamb_dicke must be > 0");
  if (!(mass > 0)) throw ContractError("TrapSpec: mass must be > 0");
  if (gamma_bg < 0) throw ContractError("TrapSpec: gamma_bg must be >= 0");
}

double TrapSpec::oscillator_length() const {
  return std::sqrt(units::kHbar / (mass * omega));
}

double TrapSpec::ground_state_size() const { return oscillator_length() / std::sqrt(2.0); }

double TrapSpec::lamb_dicke_from_wavelength() const {
  return 2.0 * units::kPi * ground_state_size() / wavelength;
}

double TrapSpec::interaction_strength() const {
  return 4.0 * units::kPi * a_sc / oscillator_length();
}

int fermi_shell(long n_atoms, int n_shells) {
  if (n_atoms < 1) throw ContractError("fermi_shell: need at least one atom");
  if (n_shells > 0 && n_atoms > cumulative_states(n_shells - 1)) {
    std::ostringstream msg;
    msg << "fermi_shell: " << n_atoms << " atoms exceed the "
        << cumulative_states(n_shells - 1) << " states of a " << n_shells << "-shell trap";
    throw CapacityError(msg.str());
  }
  int shell = 0;
  while (cumulative_states(shell) < n_atoms) ++shell;
  return shell;
}

StateSpace::StateSpace(int n_shells) : n_shells_(n_shells) {
  if (n_shells < 1) throw ContractError("StateSpace: n_shells must be >= 1");
  states_.reserve(static_cast<std::size_t>(cumulative_states(n_shells - 1)));
  degeneracies_.resize(n_shells);
  for (int e = 0; e < n_shells; ++e) {
    degeneracies_[e] = static_cast<double>(shell_degeneracy(e));
    for (int nx = 0; nx <= e; ++nx)
      for (int ny = 0; ny <= e - nx; ++ny) states_.push_back({nx, ny, e - nx - ny});
  }
}

std::size_t StateSpace::index(int nx, int ny, int nz) const {
  if (!contains(nx, ny, nz)) throw ContractError("StateSpace::index: state outside trap");
  const long e = nx + ny + nz;
  const long offset = nx * (e + 1) - static_cast<long>(nx) * (nx - 1) / 2 + ny;
  return shell_begin(static_cast<int>(e)) + static_cast<std::size_t>(offset);
}

OccupationState OccupationState::empty(const StateSpace& space, bool two_components) {
  OccupationState occ;
  occ.comp1.assign(space.size(), 0);
  occ.shell_counts1.assign(static_cast<std::size_t>(space.n_shells()), 0);
  occ.comp2.assign(static_cast<std::size_t>(space.n_shells()), 0);
  occ.two_components = two_components;
  return occ;
}

void OccupationState::fill(const StateSpace& space, std::size_t state) {
  if (comp1[state]) throw ContractError("OccupationState::fill: state already occupied");
  comp1[state] = 1;
  ++shell_counts1[static_cast<std::size_t>(space.shell(state))];
  ++n_atoms1;
}

void OccupationState::vacate(const StateSpace& space, std::size_t state) {
  if (!comp1[state]) throw ContractError("OccupationState::vacate: state is empty");
  comp1[state] = 0;
  --shell_counts1[static_cast<std::size_t>(space.shell(state))];
  --n_atoms1;
}

void OccupationState::add2(int shell) {
  ++comp2[static_cast<std::size_t>(shell)];
  ++n_atoms2;
}

void OccupationState::remove2(int shell) {
  if (comp2[static_cast<std::size_t>(shell)] <= 0)
    throw ContractError("OccupationState::remove2: shell is empty");
  --comp2[static_cast<std::size_t>(shell)];
  --n_atoms2;
}

Eigen::ArrayXd OccupationState::shells1() const {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(shell_counts1.size()));
  for (std::size_t e = 0; e < shell_counts1.size(); ++e) out[static_cast<Eigen::Index>(e)] = shell_counts1[e];
  return out;
}

Eigen::ArrayXd OccupationState::shells2() const {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(comp2.size()));
  for (std::size_t e = 0; e < comp2.size(); ++e) out[static_cast<Eigen::Index>(e)] = comp2[e];
  return out;
}

void OccupationState::check(const StateSpace& space) const {
  if (comp1.size() != space.size()) throw ContractError("occupancy size mismatch");
  std::vector<int> counts(static_cast<std::size_t>(space.n_shells()), 0);
  long total1 = 0;
  for (std::size_t i = 0; i < comp1.size(); ++i) {
    if (comp1[i] > 1) throw ContractError("Pauli violation in component 1");
    if (comp1[i]) {
      ++counts[static_cast<std::size_t>(space.shell(i))];
      ++total1;
    }
  }
  if (counts != shell_counts1) throw ContractError("shell counts of component 1 out of sync");
  if (total1 != n_atoms1) throw ContractError("atom total of component 1 out of sync");
  long total2 = 0;
  for (int e = 0; e < space.n_shells(); ++e) {
    const int n = comp2[static_cast<std::size_t>(e)];
    if (n < 0 || n > shell_degeneracy(e)) throw ContractError("Pauli violation in component 2");
    total2 += n;
  }
  if (total2 != n_atoms2) throw ContractError("atom total of component 2 out of sync");
}

double fermi_dirac(double energy, double temperature, double mu) {
  if (temperature <= 0.0) {
    if (energy < mu) return 1.0;
    return energy > mu ? 0.0 : 0.5;
  }
  const double x = (energy - mu) / temperature;
  if (x > 0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

namespace {

double thermal_total(int n_shells, double temperature, double mu) {
  double sum = 0.0;
  for (int e = 0; e < n_shells; ++e)
    sum += static_cast<double>(shell_degeneracy(e)) * fermi_dirac(e, temperature, mu);
  return sum;
}

}  // namespace

double chemical_potential(int n_shells, double temperature, double n_atoms) {
  if (!(n_atoms > 0)) throw ContractError("chemical_potential: n_atoms must be > 0");
  const double capacity = static_cast<double>(cumulative_states(n_shells - 1));
  if (n_atoms > capacity) throw CapacityError("chemical_potential: more atoms than states");
  if (temperature <= 0.0) {
    const int ef = fermi_shell(static_cast<long>(std::ceil(n_atoms - 1e-9)), n_shells);
    if (static_cast<double>(cumulative_states(ef)) == n_atoms) return ef + 0.5;
    return ef;
  }
  if (n_atoms >= capacity)
    throw std::domain_error("chemical_potential: a full trap has no finite chemical potential");

  auto excess = [&](double mu) { return thermal_total(n_shells, temperature, mu) - n_atoms; };
  double lo = -temperature, hi = n_shells + temperature;
  for (int i = 0; excess(lo) > 0; ++i) {
    lo -= (hi - lo);
    if (i > 200) throw std::domain_error("chemical_potential: failed to bracket from below");
  }
  for (int i = 0; excess(hi) < 0; ++i) {
    hi += (hi - lo);
    if (i > 200) throw std::domain_error("chemical_potential: failed to bracket from above");
  }
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(
      excess, lo, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
  return 0.5 * (root.first + root.second);
}

Eigen::ArrayXd thermal_fractions(int n_shells, double temperature, double n_atoms) {
  const double mu = chemical_potential(n_shells, temperature, n_atoms);
  Eigen::ArrayXd f(n_shells);
  for (int e = 0; e < n_shells; ++e) f[e] = fermi_dirac(e, temperature, mu);
  if (temperature <= 0.0) {
    // A partially filled top shell at T = 0 holds the remainder.
    const int ef = fermi_shell(static_cast<long>(std::llround(n_atoms)), n_shells);
    const double below = ef == 0 ? 0.0 : static_cast<double>(cumulative_states(ef - 1));
    f[ef] = (n_atoms - below) / static_cast<double>(shell_degeneracy(ef));
  }
  return f;
}

namespace {

// Per-shell counts drawn as independent binomials, redrawn until they sum to
// n_atoms exactly.
std::vector<int> sample_shell_counts(int n_shells, double temperature, long n_atoms, Rng& rng) {
  const Eigen::ArrayXd f = thermal_fractions(n_shells, temperature, static_cast<double>(n_atoms));
  std::vector<int> counts(static_cast<std::size_t>(n_shells));
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    long total = 0;
    for (int e = 0; e < n_shells; ++e) {
      const double p = std::clamp(f[e], 0.0, 1.0);
      std::binomial_distribution<int> draw(static_cast<int>(shell_degeneracy(e)), p);
      counts[static_cast<std::size_t>(e)] = draw(rng);
      total += counts[static_cast<std::size_t>(e)];
    }
    if (total == n_atoms) return counts;
  }
  throw std::runtime_error("thermal_populate: conditioning on the atom number did not converge");
}

}  // namespace

OccupationState thermal_populate(const StateSpace& space, double temperature, long n_atoms,
                                 Rng& rng) {
  if (temperature < 0) throw ContractError("thermal_populate: temperature must be >= 0");
  OccupationState occ = OccupationState::empty(space, false);
  if (n_atoms == 0) return occ;
  const auto counts = sample_shell_counts(space.n_shells(), temperature, n_atoms, rng);
  std::vector<std::size_t> pool;
  for (int e = 0; e < space.n_shells(); ++e) {
    const int k = counts[static_cast<std::size_t>(e)];
    if (k == 0) continue;
    pool.resize(space.shell_end(e) - space.shell_begin(e));
    std::iota(pool.begin(), pool.end(), space.shell_begin(e));
    // Partial Fisher-Yates: the first k entries become a uniform subset.
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
      occ.fill(space, pool[static_cast<std::size_t>(i)]);
    }
  }
  return occ;
}

void thermal_populate_component2(const StateSpace& space, double temperature, long n_atoms,
                                 Rng& rng, OccupationState& occ) {
  if (temperature < 0) throw ContractError("thermal_populate: temperature must be >= 0");
  occ.two_components = true;
  std::fill(occ.comp2.begin(), occ.comp2.end(), 0);
  occ.n_atoms2 = 0;
  if (n_atoms == 0) return;
  const auto counts = sample_shell_counts(space.n_shells(), temperature, n_atoms, rng);
  for (int e = 0; e < space.n_shells(); ++e) {
    occ.comp2[static_cast<std::size_t>(e)] = counts[static_cast<std::size_t>(e)];
    occ.n_atoms2 += counts[static_cast<std::size_t>(e)];
  }
}

}  // namespace fermicool
