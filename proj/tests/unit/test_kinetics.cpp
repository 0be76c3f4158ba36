#include <doctest.h>

#include <cmath>
#include <random>

#include "fermicool/errors.hpp"
#include "fermicool/kinetics.hpp"

using namespace fermicool;

namespace {

struct Small {
  StateSpace space{16};
  std::shared_ptr<const XiKernel> kernel = std::make_shared<XiKernel>(space, 2.0, EmissionPattern::isotropic());
  std::shared_ptr<const UTildeTable> u = std::make_shared<UTildeTable>(16, 0.32);

  EngineTables tables() const {
    EngineTables t;
    t.space = &space;
    t.kernel = kernel;
    t.u_tilde = u;
    return t;
  }
  OccupationState gas(double t, long n, bool two, std::uint64_t seed) const {
    Rng rng(seed);
    OccupationState occ = thermal_populate(space, t, n, rng);
    if (two) thermal_populate_component2(space, t, n, rng, occ);
    return occ;
  }
};

Schedule cooling(int reps) {
  Schedule s;
  Stage st;
  st.first = {-4, 0.1, 0.8, 100};
  st.second = {-5, 0.1, 0.8, 100};
  st.repetitions = reps;
  st.gamma_target = 0.8;
  s.stages.push_back(st);
  return s;
}

}  // namespace

TEST_CASE("schedule bookkeeping") {
  Schedule s = cooling(3);
  CHECK(s.pulses() == 6);
  CHECK(s.duration() == doctest::Approx(600.0));
  s.stages[0].gamma_target = 1.0;
  CHECK_THROWS_AS(s.validate(), ContractError);
  s = cooling(3);
  s.sample_every = 0;
  CHECK_THROWS_AS(s.validate(), ContractError);
}

TEST_CASE("identical seeds give identical trajectories") {
  const Small small;
  EngineOptions opt;
  opt.log_events = true;
  opt.check_invariants = true;
  Engine a(small.tables(), opt, small.gas(2.0, 120, false, 3), 77);
  Engine b(small.tables(), opt, small.gas(2.0, 120, false, 3), 77);
  const Trajectory ta = a.run_schedule(cooling(4));
  const Trajectory tb = b.run_schedule(cooling(4));
  REQUIRE(ta.events.size() == tb.events.size());
  CHECK(!ta.events.empty());
  for (std::size_t i = 0; i < ta.events.size(); ++i) {
    CHECK(ta.events[i].t == tb.events[i].t);
    CHECK(ta.events[i].a == tb.events[i].a);
    CHECK(ta.events[i].c == tb.events[i].c);
  }
  CHECK(a.occupation().comp1 == b.occupation().comp1);
  Engine c(small.tables(), opt, small.gas(2.0, 120, false, 3), 78);
  c.run_schedule(cooling(4));
  CHECK(c.occupation().comp1 != a.occupation().comp1);
}

TEST_CASE("trajectory invariants under lasers") {
  const Small small;
  EngineOptions opt;
  opt.check_invariants = true;
  opt.gamma_bg = 1e-4;
  Engine e(small.tables(), opt, small.gas(2.5, 150, false, 5), 1);
  const Trajectory t = e.run_schedule(cooling(6));
  REQUIRE(t.samples.size() == 13);
  for (std::size_t i = 1; i < t.samples.size(); ++i) {
    CHECK(t.samples[i].t > t.samples[i - 1].t);
    CHECK(t.samples[i].n1 <= t.samples[i - 1].n1);
    CHECK(t.samples[i].gamma <= 1.0);
    CHECK(t.samples[i].gamma >= 1e-3);
  }
  CHECK(t.laser_events > 0);
  CHECK(t.samples.back().n1 + t.losses.total() == 150);
}

TEST_CASE("background loss is exponential in the mean") {
  const Small small;
  EngineOptions opt;
  opt.lasers = false;
  opt.gamma_bg = 1e-3;
  long total = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    Engine e(small.tables(), opt, small.gas(3.0, 200, false, 10 + r), 100 + r);
    PulseSpec idle{0, 0, 1, 1000};
    e.run_pulse(idle, 0);
    total += e.occupation().n_atoms1;
  }
  const double expect = 200 * std::exp(-1.0);
  const double sd = std::sqrt(200 * std::exp(-1.0) * (1 - std::exp(-1.0)) / runs);
  CHECK(std::abs(static_cast<double>(total) / runs - expect) < 5 * sd);
}

TEST_CASE("collisions conserve energy and atom numbers") {
  const Small small;
  EngineOptions opt;
  opt.lasers = false;
  opt.collisions = true;
  opt.check_invariants = true;
  const OccupationState start = small.gas(2.0, 100, true, 8);
  auto energy = [&](const OccupationState& o) {
    long s = 0;
    for (int e = 0; e < 16; ++e) s += e * (o.shell_counts1[static_cast<std::size_t>(e)] + o.comp2[static_cast<std::size_t>(e)]);
    return s;
  };
  Engine e(small.tables(), opt, start, 4);
  e.run_pulse({0, 0, 1, 2000}, 0);
  CHECK(e.trajectory().collision_events > 100);
  CHECK(e.trajectory().energy_violations == 0);
  CHECK(energy(e.occupation()) == energy(start));
  CHECK(e.occupation().n_atoms1 == 100);
  CHECK(e.occupation().n_atoms2 == 100);
}

TEST_CASE("frozen engine leaves the state alone") {
  const Small small;
  EngineOptions opt;
  opt.lasers = false;
  opt.collisions = true;
  opt.frozen = true;
  opt.log_events = true;
  const OccupationState start = small.gas(2.0, 80, true, 8);
  Engine e(small.tables(), opt, start, 4);
  e.run_pulse({0, 0, 1, 200}, 0);
  CHECK(e.trajectory().events.size() > 10);
  CHECK(e.occupation().comp1 == start.comp1);
  CHECK(e.occupation().comp2 == start.comp2);
}

TEST_CASE("engine preconditions") {
  const Small small;
  EngineOptions opt;
  opt.collisions = true;
  CHECK_THROWS_AS(Engine(small.tables(), opt, small.gas(2.0, 50, false, 1), 1), ContractError);
  EngineTables bare;
  bare.space = &small.space;
  CHECK_THROWS_AS(Engine(bare, EngineOptions{}, small.gas(2.0, 50, false, 1), 1), ContractError);
  Engine e(small.tables(), EngineOptions{}, small.gas(2.0, 50, false, 1), 1);
  CHECK_THROWS_AS(e.run_pulse({-3, 0.1, 0.8, 10}, 3), ContractError);
}

TEST_CASE("thinned laser events keep the exact rate") {
  const Small small;
  EngineOptions opt;
  opt.frozen = true;
  opt.log_events = true;
  for (const auto mode : {BlockingField::Mode::exact, BlockingField::Mode::shell}) {
    CAPTURE(static_cast<int>(mode));
    opt.blocking = mode;
    EngineTables tables = small.tables();
    tables.shell_xi = std::make_shared<Eigen::MatrixXd>(shell_xi_table(*small.kernel));
    Engine engine(tables, opt, small.gas(2.0, 300, false, 8), 21);
    const PulseSpec pulse{-5, 0.1, 0.8, 1.0};
    const double rate = engine.total_rate(&pulse, 1);
    REQUIRE(rate > 0);
    const double duration = 20000.0 / rate;
    engine.run_pulse({-5, 0.1, 0.8, duration}, 1);
    const double n = static_cast<double>(engine.trajectory().events.size());
    CHECK(std::abs(n - 20000.0) < 5.0 * std::sqrt(20000.0));
  }
}

TEST_CASE("incremental collision catalog matches a rebuild") {
  const Small small;
  OccupationState occ = small.gas(2.5, 250, true, 4);
  CollisionCatalog live(*small.u);
  live.refresh(occ);
  Rng rng(5);
  for (int step = 0; step < 300; ++step) {
    const auto ch = live.pick(std::uniform_real_distribution<double>(0.0, live.total())(rng), occ);
    const StateSpace& space = small.space;
    std::size_t from = space.size(), to = space.size();
    for (std::size_t s = space.shell_begin(ch.e1); s < space.shell_end(ch.e1); ++s)
      if (occ.occupied(s)) from = s;
    for (std::size_t s = space.shell_begin(ch.e3); s < space.shell_end(ch.e3); ++s)
      if (!occ.occupied(s)) to = s;
    REQUIRE(from < space.size());
    REQUIRE(to < space.size());
    live.touch(occ, {ch.e1, ch.e3}, {ch.e2, ch.e4}, -1.0);
    occ.vacate(space, from);
    occ.fill(space, to);
    occ.remove2(ch.e2);
    occ.add2(ch.e4);
    live.touch(occ, {ch.e1, ch.e3}, {ch.e2, ch.e4}, +1.0);
  }
  CollisionCatalog fresh(*small.u);
  fresh.refresh(occ);
  CHECK(live.total() == doctest::Approx(fresh.total()).epsilon(1e-10));
}
