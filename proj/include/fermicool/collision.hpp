#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "fermicool/errors.hpp"
#include "fermicool/statespace.hpp"

namespace fermicool {

/// J(n,m,q,p) = int psi_n psi_m psi_q psi_p dx for 1D levels <= max_level, in
/// units of 1/xi. Exact separable Gauss-Hermite quadrature.
class QuarticOverlap1D {
 public:
  explicit QuarticOverlap1D(int max_level);
  int max_level() const { return max_level_; }
  double operator()(int n, int m, int q, int p) const;

 private:
  int max_level_;
  Eigen::MatrixXd h_;   // h_(level, node) = normalized Hermite polynomial part
  Eigen::ArrayXd w_;    // node weights, Gaussian folded in
};

/// U_{n,m;q,p} = u0 * int phi_n phi_m phi_q phi_p d^3x in units of hbar*omega.
double u_amplitude_direct(const TrapState& n, const TrapState& m, const TrapState& q,
                          const TrapState& p, double u0);

/// Shell sum of |U|^2 over all states of shells (e1, e2, e3, e4), brute force.
/// Cost grows as the fourth power of the shell degeneracy; meant for small shells.
double u_tilde_sq_brute(int e1, int e2, int e3, int e4, double u0);

/// The shell-summed expression in Hermite-polynomial integrals I^k,
/// as a quadruple sum over parity-matched 1D indices.
double u_tilde_sq_hermite_sum(int e1, int e2, int e3, int e4, double u0);

/// Far-shell form u0^2 g_{e_min} / (4 pi^4).
double u_tilde_sq_far(int e1, int e2, int e3, int e4, double u0);

inline void require_conserving(int e1, int e2, int e3, int e4) {
  if (e1 + e2 != e3 + e4) throw ContractError("collision channel violates energy conservation");
  if (std::min({e1, e2, e3, e4}) < 0) throw ContractError("negative shell index");
}

/// Coefficients c(w) of the generating function
///   sum_w |U~|^2(w) / u0^2 * s^w = (8 pi^3)^{-1} D(s)^{-3/2},
///   D = (1 - s1 s2 s3 s4)^2 - (e1(s) - e3(s))^2 / 4,
/// with e1, e3 the elementary symmetric polynomials of degree 1 and 3.
/// c is fully symmetric, so only sorted quadruples are stored. Filled by the
/// first-order recurrence from s_i d/ds_i applied to D^{3/2} G = 1.
template <typename Scalar>
class ShellAmplitudeSeries {
 public:
  explicit ShellAmplitudeSeries(int max_shell) : max_shell_(max_shell) {
    if (max_shell < 0) throw ContractError("ShellAmplitudeSeries: max_shell must be >= 0");
    build_polynomial();
    coeff_.assign(static_cast<std::size_t>(slot(max_shell, max_shell, max_shell, max_shell) + 1), Scalar(0));
    fill();
  }

  int max_shell() const { return max_shell_; }

  /// |U~|^2 / u0^2 for any quadruple of shells <= max_shell.
  Scalar operator()(int e1, int e2, int e3, int e4) const {
    if (std::max({e1, e2, e3, e4}) > max_shell_)
      throw ContractError("ShellAmplitudeSeries: shell beyond table");
    return coeff_[static_cast<std::size_t>(index(e1, e2, e3, e4))] /
           (Scalar(8) * std::numbers::pi_v<Scalar> * std::numbers::pi_v<Scalar> * std::numbers::pi_v<Scalar>);
  }

 private:
  struct Term {
    std::array<int, 4> m;
    Scalar d;
  };

  static long binom(long n, int k) {
    if (n < k) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  }
  // Combinatorial number system for multisets a >= b >= c >= d.
  static long slot(int a, int b, int c, int d) {
    return binom(a + 3, 4) + binom(b + 2, 3) + binom(c + 1, 2) + d;
  }
  static long index(int e1, int e2, int e3, int e4) {
    std::array<int, 4> w{e1, e2, e3, e4};
    std::sort(w.begin(), w.end(), std::greater<>());
    return slot(w[0], w[1], w[2], w[3]);
  }

  void build_polynomial() {
    // Expand D as a map from exponent vectors (entries 0..2) to coefficients.
    std::array<Scalar, 81> dense{};
    auto at = [&](std::array<int, 4> m) -> Scalar& {
      return dense[static_cast<std::size_t>(((m[0] * 3 + m[1]) * 3 + m[2]) * 3 + m[3])];
    };
    at({0, 0, 0, 0}) += 1;
    at({1, 1, 1, 1}) -= 2;
    at({2, 2, 2, 2}) += 1;
    // (e1 - e3)^2 / 4 with monomials x_i and prod_{j != i} x_j
    std::vector<std::pair<std::array<int, 4>, Scalar>> b;
    for (int i = 0; i < 4; ++i) {
      std::array<int, 4> single{0, 0, 0, 0}, triple{1, 1, 1, 1};
      single[static_cast<std::size_t>(i)] = 1;
      triple[static_cast<std::size_t>(i)] = 0;
      b.push_back({single, Scalar(1)});
      b.push_back({triple, Scalar(-1)});
    }
    for (const auto& [ma, ca] : b)
      for (const auto& [mb, cb] : b) {
        std::array<int, 4> m{};
        for (int k = 0; k < 4; ++k) m[static_cast<std::size_t>(k)] = ma[static_cast<std::size_t>(k)] + mb[static_cast<std::size_t>(k)];
        at(m) -= ca * cb / Scalar(4);
      }
    for (int a = 0; a < 3; ++a)
      for (int b2 = 0; b2 < 3; ++b2)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) {
            const std::array<int, 4> m{a, b2, c, d};
            if (a + b2 + c + d == 0) continue;
            const Scalar v = at(m);
            if (v != Scalar(0)) terms_.push_back({m, v});
          }
  }

  void fill() {
    coeff_[0] = Scalar(1);
    const int top = max_shell_;
    for (int total = 2; total <= 4 * top; total += 2)
      for (int a = std::min(top, total); a >= 0; --a)
        for (int b = std::min(a, total - a); b >= 0; --b)
          for (int c = std::min(b, total - a - b); c >= 0; --c) {
            const int d = total - a - b - c;
            if (d > c) break;
            // Step along the largest exponent (a > 0 here).
            const std::array<int, 4> w{a, b, c, d};
            Scalar sum(0);
            for (const Term& t : terms_) {
              const int r0 = w[0] - t.m[0], r1 = w[1] - t.m[1], r2 = w[2] - t.m[2], r3 = w[3] - t.m[3];
              if (r0 < 0 || r1 < 0 || r2 < 0 || r3 < 0) continue;
              sum += t.d * (Scalar(a) + Scalar(t.m[0]) / Scalar(2)) *
                     coeff_[static_cast<std::size_t>(index(r0, r1, r2, r3))];
            }
            coeff_[static_cast<std::size_t>(slot(a, b, c, d))] = -sum / Scalar(a);
          }
  }

  int max_shell_;
  std::vector<Term> terms_;
  std::vector<Scalar> coeff_;
};

/// |U~|^2 per shell quadruple for a trap of n_shells, in (hbar*omega)^2.
/// Entries come from the closed-form series; a positive far_threshold switches
/// quadruples with e_max - e_min >= far_threshold to the far-shell form.
class UTildeTable {
 public:
  enum class Method { closed_form, far_shell };

  UTildeTable(int n_shells, double u0, int far_threshold = 0);

  int n_shells() const { return n_shells_; }
  double u0() const { return u0_; }
  int far_threshold() const { return far_threshold_; }

  double operator()(int e1, int e2, int e3, int e4) const;
  Method method(int e1, int e2, int e3, int e4) const;
  /// Closed-form value regardless of the threshold.
  double exact(int e1, int e2, int e3, int e4) const;

 private:
  int n_shells_;
  double u0_;
  int far_threshold_;
  ShellAmplitudeSeries<long double> series_;
};

}  // namespace fermicool
