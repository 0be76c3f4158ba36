#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "fermicool/collision.hpp"
#include "fermicool/rates.hpp"

using namespace fermicool;

TEST_CASE("quartic overlaps against a grid") {
  const oracle::HermiteGrid grid(8);
  const QuarticOverlap1D j(8);
  CHECK(j(0, 0, 0, 0) == doctest::Approx(1.0 / std::sqrt(2 * M_PI)).epsilon(1e-13));
  for (int a = 0; a <= 8; a += 3)
    for (int b = 0; b <= 8; b += 2)
      for (int c = 0; c <= 8; ++c) {
        const int d = (a + b + c) % 2;
        CHECK(j(a, b, c, d) == doctest::Approx(grid.quartic(a, b, c, d)).epsilon(1e-10));
      }
  CHECK(j(1, 0, 0, 0) == 0.0);
  CHECK_THROWS_AS(j(9, 0, 0, 1), ContractError);
}

TEST_CASE("ground-shell amplitude") {
  const double u0 = 0.32;
  const UTildeTable table(4, u0);
  CHECK(table(0, 0, 0, 0) == doctest::Approx(u0 * u0 / (8 * M_PI * M_PI * M_PI)).epsilon(1e-13));
  CHECK(u_tilde_sq_brute(0, 0, 0, 0, u0) == doctest::Approx(u0 * u0 / (8 * M_PI * M_PI * M_PI)).epsilon(1e-13));
}

TEST_CASE("series amplitudes match the state sum") {
  const oracle::HermiteGrid grid(5);
  const UTildeTable table(6, 1.0);
  for (int e1 = 0; e1 <= 4; ++e1)
    for (int e2 = 0; e2 <= 4; ++e2)
      for (int e3 = 0; e3 <= 4; ++e3) {
        const int e4 = e1 + e2 - e3;
        if (e4 < 0 || e4 > 4) continue;
        CAPTURE(e1);
        CAPTURE(e2);
        CAPTURE(e3);
        CHECK(table(e1, e2, e3, e4) == doctest::Approx(oracle::u_tilde_sq(grid, e1, e2, e3, e4, 1.0)).epsilon(1e-9));
      }
}

TEST_CASE("amplitudes are symmetric and positive far up") {
  const UTildeTable table(41, 1.0);
  CHECK(table(3, 17, 9, 11) == doctest::Approx(table(17, 3, 11, 9)).epsilon(1e-14));
  CHECK(table(3, 17, 9, 11) == doctest::Approx(table(9, 11, 3, 17)).epsilon(1e-14));
  for (int e = 0; e <= 40; e += 5) CHECK(table(e, 40 - e, 20, 20) > 0.0);
  // long double and double recurrences agree
  const ShellAmplitudeSeries<double> d(40);
  const ShellAmplitudeSeries<long double> ld(40);
  CHECK(d(40, 0, 20, 20) == doctest::Approx(static_cast<double>(ld(40, 0, 20, 20))).epsilon(1e-11));
}

TEST_CASE("far-shell form") {
  CHECK(u_tilde_sq_far(2, 7, 4, 5, 1.0) == doctest::Approx(6.0 / (4 * std::pow(M_PI, 4))));
  const UTildeTable far(12, 1.0, 3);
  CHECK(far.method(0, 6, 3, 3) == UTildeTable::Method::far_shell);
  CHECK(far.method(2, 3, 3, 2) == UTildeTable::Method::closed_form);
  CHECK(far(0, 6, 3, 3) == u_tilde_sq_far(0, 6, 3, 3, 1.0));
  CHECK(far.exact(0, 6, 3, 3) != far(0, 6, 3, 3));
}

TEST_CASE("energy conservation is enforced") {
  const UTildeTable table(6, 1.0);
  CHECK_THROWS_AS(table(1, 2, 2, 2), ContractError);
  CHECK_THROWS_AS(u_tilde_sq_brute(1, 1, 0, 1, 1.0), ContractError);
  CHECK_THROWS_AS(require_conserving(-1, 2, 1, 0), ContractError);
}

TEST_CASE("collision event rate") {
  const StateSpace space(6);
  const UTildeTable table(6, 1.0);
  OccupationState occ = OccupationState::empty(space, true);
  CHECK(collision_event_rate(2, 2, 1, 3, occ, table) == 0.0);
  occ.fill(space, space.index(2, 0, 0));
  occ.fill(space, space.index(0, 2, 0));
  occ.add2(2);
  const double g1 = 6, g2 = 6, g3 = 3, g4 = 10;
  const double expect = 2 * 1 * M_PI * table(2, 2, 1, 3) * (g3 - 0) * (g4 - 0) / (g1 * g2 * g3 * g4);
  CHECK(collision_event_rate(2, 2, 1, 3, occ, table) == doctest::Approx(expect));
  // a full final shell for component 1 blocks the channel
  for (int i = 0; i < 3; ++i) occ.fill(space, space.shell_begin(1) + static_cast<std::size_t>(i));
  CHECK(collision_event_rate(2, 2, 1, 3, occ, table) == 0.0);
  CHECK_THROWS_AS(collision_event_rate(2, 2, 1, 2, occ, table), ContractError);
}

TEST_CASE("collision catalog sums the channel rates") {
  const StateSpace space(8);
  const UTildeTable table(8, 1.0);
  Rng rng(3);
  OccupationState occ = thermal_populate(space, 2.0, 40, rng);
  thermal_populate_component2(space, 2.0, 40, rng, occ);
  CollisionCatalog cat(table);
  cat.refresh(occ);
  double direct = 0.0;
  for (int e1 = 0; e1 < 8; ++e1)
    for (int e2 = 0; e2 < 8; ++e2)
      for (int e3 = 0; e3 < 8; ++e3) {
        const int e4 = e1 + e2 - e3;
        if (e4 < 0 || e4 >= 8 || (e3 == e1 && e4 == e2)) continue;
        direct += collision_event_rate(e1, e2, e3, e4, occ, table);
      }
  CHECK(cat.total() == doctest::Approx(direct).epsilon(1e-12));
  for (double u : {0.0, 0.3, 0.77, 0.999}) {
    const auto ch = cat.pick(u * cat.total(), occ);
    CHECK(ch.e1 + ch.e2 == ch.e3 + ch.e4);
    CHECK(!(ch.e1 == ch.e3 && ch.e2 == ch.e4));
    CHECK(collision_event_rate(ch.e1, ch.e2, ch.e3, ch.e4, occ, table) > 0.0);
  }
}
