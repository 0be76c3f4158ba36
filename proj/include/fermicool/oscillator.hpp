#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <Eigen/Core>

#include "fermicool/statespace.hpp"

namespace fermicool {

/// Generalized Laguerre polynomial L_n^(alpha)(x) by upward recurrence in n.
template <typename Scalar>
Scalar generalized_laguerre(int n, int alpha, Scalar x) {
  if (n == 0) return Scalar(1);
  Scalar prev(1);
  Scalar curr = Scalar(1 + alpha) - x;
  for (int j = 1; j < n; ++j) {
    const Scalar next = ((Scalar(2 * j + 1 + alpha) - x) * curr - Scalar(j + alpha) * prev) / Scalar(j + 1);
    prev = curr;
    curr = next;
  }
  return curr;
}

/// |<m| D(alpha) |n>|^2 for a displacement with |alpha|^2 = x:
///   e^{-x} (n<! / n>!) x^{|m-n|} [L_{n<}^{|m-n|}(x)]^2,
/// assembled in the log domain so large levels never overflow.
template <typename Scalar>
Scalar displacement_weight(int m, int n, Scalar x) {
  using std::exp;
  using std::log;
  using std::abs;
  using std::lgamma;
  if (x == Scalar(0)) return m == n ? Scalar(1) : Scalar(0);
  const int lo = std::min(m, n);
  const int d = std::abs(m - n);
  const Scalar lag = generalized_laguerre<Scalar>(lo, d, x);
  if (lag == Scalar(0)) return Scalar(0);
  const Scalar log_w = -x + lgamma(Scalar(lo + 1)) - lgamma(Scalar(lo + d + 1)) +
                       Scalar(d) * log(x) + Scalar(2) * log(abs(lag));
  return exp(log_w);
}

/// Squared 1D Franck-Condon factor |<n_f| exp(i eta (b + b^dagger)) |n_i>|^2,
/// i.e. a photon kick of Lamb-Dicke parameter eta along the axis.
template <typename Scalar>
Scalar overlap_1d_sq(int n_f, int n_i, Scalar eta) {
  return displacement_weight<Scalar>(n_f, n_i, eta * eta);
}

/// displacement_weight(m, n, x) for m = 0..m_max at fixed n.
Eigen::ArrayXd displacement_row(int n, double x, int m_max);

/// Product of the per-axis factors for a kick eta * k_dir.
double franck_condon_sq(const TrapState& l, const TrapState& m, const Eigen::Vector3d& k_dir,
                        double eta);

/// I^k = int exp(-x^2) x^k H_n H_m H_p H_q dx with physicists' Hermite
/// polynomials, exact by Gauss-Hermite quadrature.
double hermite_quad_integral(int k, int n, int m, int p, int q);

/// Normalized Hermite functions without their Gaussian factor:
/// psi_n(x) = h_n(x) exp(-x^2 / 2), returned as h_0..h_n_max at x.
Eigen::ArrayXd hermite_function_polys(double x, int n_max);

}  // namespace fermicool
