#include "fermicool/oscillator.hpp"

#include <numbers>

#include "fermicool/errors.hpp"
#include "fermicool/quadrature.hpp"

namespace fermicool {

Eigen::ArrayXd displacement_row(int n, double x, int m_max) {
  Eigen::ArrayXd row(m_max + 1);
  for (int m = 0; m <= m_max; ++m) row[m] = displacement_weight<double>(m, n, x);
  return row;
}

double franck_condon_sq(const TrapState& l, const TrapState& m, const Eigen::Vector3d& k_dir,
                        double eta) {
  if (std::abs(k_dir.norm() - 1.0) > 1e-9)
    throw ContractError("franck_condon_sq: k_dir must be a unit vector");
  double value = 1.0;
  for (int axis = 0; axis < 3; ++axis)
    value *= overlap_1d_sq<double>(l.level(axis), m.level(axis), eta * std::abs(k_dir[axis]));
  return value;
}

double hermite_quad_integral(int k, int n, int m, int p, int q) {
  if (k < 0 || n < 0 || m < 0 || p < 0 || q < 0)
    throw ContractError("hermite_quad_integral: negative index");
  const int degree = k + n + m + p + q;
  if (degree % 2 != 0) return 0.0;
  const int top = std::max({n, m, p, q});
  const auto rule = gauss_hermite<double>(degree / 2 + 1);
  return rule.integrate([&](double x) {
    // H_0..H_top by the physicists' recurrence.
    Eigen::ArrayXd h(top + 1);
    h[0] = 1.0;
    if (top > 0) h[1] = 2.0 * x;
    for (int j = 1; j < top; ++j) h[j + 1] = 2.0 * x * h[j] - 2.0 * j * h[j - 1];
    return std::pow(x, k) * h[n] * h[m] * h[p] * h[q];
  });
}

Eigen::ArrayXd hermite_function_polys(double x, int n_max) {
  Eigen::ArrayXd h(n_max + 1);
  h[0] = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  if (n_max > 0) h[1] = std::sqrt(2.0) * x * h[0];
  for (int n = 1; n < n_max; ++n)
    h[n + 1] = std::sqrt(2.0 / (n + 1)) * x * h[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * h[n - 1];
  return h;
}

}  // namespace fermicool
