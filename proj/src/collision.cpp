#include "fermicool/collision.hpp"

#include <cmath>
#include <numbers>

#include "fermicool/oscillator.hpp"
#include "fermicool/quadrature.hpp"

namespace fermicool {

QuarticOverlap1D::QuarticOverlap1D(int max_level) : max_level_(max_level) {
  if (max_level < 0) throw ContractError("QuarticOverlap1D: max_level must be >= 0");
  // psi^4 carries exp(-2x^2); with y = sqrt(2) x the rule for exp(-y^2) is
  // exact for the remaining polynomial of degree <= 4 * max_level.
  const auto rule = gauss_hermite<double>(2 * max_level + 1);
  const Eigen::Index n = rule.nodes.size();
  h_.resize(max_level + 1, n);
  w_ = rule.weights / std::sqrt(2.0);
  for (Eigen::Index k = 0; k < n; ++k)
    h_.col(k) = hermite_function_polys(rule.nodes[k] / std::sqrt(2.0), max_level).matrix();
}

double QuarticOverlap1D::operator()(int n, int m, int q, int p) const {
  if (std::max({n, m, q, p}) > max_level_) throw ContractError("QuarticOverlap1D: level beyond table");
  if ((n + m + q + p) % 2 != 0) return 0.0;
  return (w_ * h_.row(n).array().transpose() * h_.row(m).array().transpose() *
          h_.row(q).array().transpose() * h_.row(p).array().transpose())
      .sum();
}

double u_amplitude_direct(const TrapState& n, const TrapState& m, const TrapState& q,
                          const TrapState& p, double u0) {
  const int top = std::max({n.shell(), m.shell(), q.shell(), p.shell()});
  const QuarticOverlap1D j(top);
  double value = u0;
  for (int axis = 0; axis < 3; ++axis)
    value *= j(n.level(axis), m.level(axis), q.level(axis), p.level(axis));
  return value;
}

double u_tilde_sq_brute(int e1, int e2, int e3, int e4, double u0) {
  require_conserving(e1, e2, e3, e4);
  const int top = std::max({e1, e2, e3, e4});
  const QuarticOverlap1D j(top);
  auto shell_states = [](int e) {
    std::vector<TrapState> out;
    for (int nx = 0; nx <= e; ++nx)
      for (int ny = 0; ny <= e - nx; ++ny) out.push_back({nx, ny, e - nx - ny});
    return out;
  };
  const auto s1 = shell_states(e1), s2 = shell_states(e2), s3 = shell_states(e3), s4 = shell_states(e4);
  double sum = 0.0;
  for (const auto& a : s1)
    for (const auto& b : s2)
      for (const auto& c : s3)
        for (const auto& d : s4) {
          const double jx = j(a.nx, b.nx, c.nx, d.nx);
          if (jx == 0.0) continue;
          const double jy = j(a.ny, b.ny, c.ny, d.ny);
          if (jy == 0.0) continue;
          const double v = jx * jy * j(a.nz, b.nz, c.nz, d.nz);
          sum += v * v;
        }
  return u0 * u0 * sum;
}

double u_tilde_sq_hermite_sum(int e1, int e2, int e3, int e4, double u0) {
  require_conserving(e1, e2, e3, e4);
  double sum = 0.0;
  for (int n = e1 % 2; n <= e1; n += 2)
    for (int m = e2 % 2; m <= e2; m += 2)
      for (int p = e3 % 2; p <= e3; p += 2)
        for (int q = e4 % 2; q <= e4; q += 2) {
          const double i0 = hermite_quad_integral(0, n, m, p, q);
          const double i2 = hermite_quad_integral(2, n, m, p, q);
          const double i4 = hermite_quad_integral(4, n, m, p, q);
          const double log_den = (n + m + p + q) * std::log(2.0) + std::lgamma(n + 1.0) +
                                 std::lgamma(m + 1.0) + std::lgamma(p + 1.0) + std::lgamma(q + 1.0);
          sum += (i4 * i0 - i2 * i2) * std::exp(-log_den);
        }
  const double pi4 = std::pow(std::numbers::pi, 4);
  return 2.0 / pi4 * u0 * u0 * sum;
}

double u_tilde_sq_far(int e1, int e2, int e3, int e4, double u0) {
  require_conserving(e1, e2, e3, e4);
  const int emin = std::min({e1, e2, e3, e4});
  return u0 * u0 * static_cast<double>(shell_degeneracy(emin)) / (4.0 * std::pow(std::numbers::pi, 4));
}

UTildeTable::UTildeTable(int n_shells, double u0, int far_threshold)
    : n_shells_(n_shells), u0_(u0), far_threshold_(far_threshold), series_(n_shells - 1) {
  if (n_shells < 1) throw ContractError("UTildeTable: n_shells must be >= 1");
  if (far_threshold < 0) throw ContractError("UTildeTable: far_threshold must be >= 0");
}

UTildeTable::Method UTildeTable::method(int e1, int e2, int e3, int e4) const {
  require_conserving(e1, e2, e3, e4);
  if (far_threshold_ > 0 &&
      std::max({e1, e2, e3, e4}) - std::min({e1, e2, e3, e4}) >= far_threshold_)
    return Method::far_shell;
  return Method::closed_form;
}

double UTildeTable::exact(int e1, int e2, int e3, int e4) const {
  require_conserving(e1, e2, e3, e4);
  return u0_ * u0_ * static_cast<double>(series_(e1, e2, e3, e4));
}

double UTildeTable::operator()(int e1, int e2, int e3, int e4) const {
  if (method(e1, e2, e3, e4) == Method::far_shell) return u_tilde_sq_far(e1, e2, e3, e4, u0_);
  return exact(e1, e2, e3, e4);
}

}  // namespace fermicool
