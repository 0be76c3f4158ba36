#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "fermicool/errors.hpp"
#include "fermicool/thermo.hpp"

using namespace fermicool;

TEST_CASE("fermi temperature is the fermi shell") {
  CHECK(fermi_temperature(10660) == 38.0);
  CHECK(fermi_temperature(1540) == 19.0);
  CHECK(fermi_temperature(0) == 0.0);
}

TEST_CASE("fit recovers a thermal distribution") {
  for (double t : {0.8, 3.0, 12.0}) {
    CAPTURE(t);
    const double n = 1540;
    const Eigen::ArrayXd f = thermal_fractions(41, t, n);
    // the oracle sum reproduces the atom number at the fitted mu
    const FermiFit fit = fit_fermi_dirac(f, n);
    CHECK(fit.T == doctest::Approx(t).epsilon(1e-5));
    CHECK(oracle::fermi_sum(41, fit.T, fit.mu) == doctest::Approx(n).epsilon(1e-8));
    CHECK(fit.T_over_TF == doctest::Approx(t / 19.0).epsilon(1e-5));
    CHECK(fit.residual < 1e-10);
    CHECK_FALSE(fit.zero_temperature);
  }
}

TEST_CASE("fit of a closed-shell sea is flagged as zero temperature") {
  Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(20);
  for (int e = 0; e <= 6; ++e) counts[e] = static_cast<double>(shell_degeneracy(e));
  const FermiFit fit = fit_shell_counts(counts, counts.sum());
  CHECK(fit.zero_temperature);
  CHECK(fit.T == 0.0);
  CHECK(fit.mu > 6.0);
  CHECK(fit.mu < 7.0);
  CHECK_THROWS_AS(fit_fermi_dirac(Eigen::ArrayXd::Zero(5), 0.0), ContractError);
}

TEST_CASE("thermal curves") {
  FermiFit fit;
  fit.T = 2.0;
  fit.mu = chemical_potential(30, 2.0, 500.0);
  const Eigen::ArrayXd mean = thermal_mean_curve(fit, 30);
  const Eigen::ArrayXd var = thermal_variance_curve(fit, 30);
  CHECK(mean.sum() == doctest::Approx(500.0).epsilon(1e-9));
  for (int e = 0; e < 30; ++e) {
    const double g = static_cast<double>(shell_degeneracy(e));
    const double f = mean[e] / g;
    CHECK(var[e] == doctest::Approx(g * f * (1 - f)).epsilon(1e-12).scale(1e-300));
  }
}

TEST_CASE("running moments match a two-pass computation") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 3.0);
  ShellStats stats(3);
  std::vector<Eigen::ArrayXd> xs;
  for (int i = 0; i < 5000; ++i) {
    Eigen::ArrayXd x(3);
    x << 1e6 + noise(rng), noise(rng), 2.0;
    xs.push_back(x);
    stats.accumulate(x, i);
  }
  Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(3), var = Eigen::ArrayXd::Zero(3);
  for (const auto& x : xs) mean += x;
  mean /= xs.size();
  for (const auto& x : xs) var += (x - mean).square();
  var /= xs.size();
  CHECK(stats.count() == 5000);
  for (int k = 0; k < 3; ++k) {
    CHECK(stats.mean()[k] == doctest::Approx(mean[k]).epsilon(1e-12));
    CHECK(stats.variance()[k] == doctest::Approx(var[k]).epsilon(1e-9).scale(1e-12));
  }
  CHECK(stats.variance()[2] == 0.0);
  // iid samples: the batch error is close to sigma / sqrt(n)
  CHECK(stats.standard_error()[1] == doctest::Approx(3.0 / std::sqrt(5000.0)).epsilon(0.4));
}

TEST_CASE("alternating stream") {
  ShellStats stats(1);
  for (int i = 0; i < 1000; ++i) stats.accumulate(Eigen::ArrayXd::Constant(1, (i % 2) ? 2.0 : 0.0), i);
  CHECK(stats.mean()[0] == doctest::Approx(1.0));
  CHECK(stats.variance()[0] == doctest::Approx(1.0));
}

TEST_CASE("time window") {
  ShellStats stats(2, 10.0, 20.0);
  for (int t = 10; t <= 20; ++t) stats.accumulate(Eigen::ArrayXd::Constant(2, t), t);
  CHECK(stats.count() == 11);
  CHECK_THROWS_AS(stats.accumulate(Eigen::ArrayXd::Constant(2, 1.0), 25.0), ContractError);
  CHECK(stats.mean()[0] == doctest::Approx(15.0));
}

TEST_CASE("occupancy accumulation and chi square") {
  const StateSpace space(25);
  Rng rng(12);
  const double t = 2.5;
  const long n = 600;
  ShellStats stats(25);
  for (int i = 0; i < 400; ++i) stats.accumulate(thermal_populate(space, t, n, rng), i);
  const FermiFit fit = fit_shell_counts(stats.mean(), static_cast<double>(n));
  CHECK(fit.T == doctest::Approx(t).epsilon(0.05));
  const ChiSquare chi = mean_chi_square(stats, fit);
  CHECK(chi.dof > 5);
  CHECK(chi.reduced() < 3.0);
}
