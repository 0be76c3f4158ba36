#include "fermicool/quadrature.hpp"

#include "fermicool/errors.hpp"

namespace fermicool {

SphereRule sphere_rule(int polar_nodes, int azimuthal_nodes) {
  if (polar_nodes < 1 || azimuthal_nodes < 1) throw ContractError("sphere_rule: need nodes");
  // Even integrand in z = cos(theta): keep the positive half of a 2n-point rule.
  const auto legendre = gauss_legendre<double>(2 * polar_nodes);
  SphereRule rule;
  rule.t.resize(polar_nodes);
  rule.polar_w.resize(polar_nodes);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < legendre.nodes.size(); ++i) {
    if (legendre.nodes[i] <= 0) continue;
    rule.t[k] = legendre.nodes[i] * legendre.nodes[i];
    rule.polar_w[k] = legendre.weights[i];
    ++k;
  }
  // cos^2(phi) with phi uniform is arcsine distributed: Gauss-Chebyshev.
  rule.s.resize(azimuthal_nodes);
  rule.azimuth_w = Eigen::ArrayXd::Constant(azimuthal_nodes, 1.0 / azimuthal_nodes);
  for (int j = 0; j < azimuthal_nodes; ++j) {
    const double c = std::cos((2.0 * j + 1.0) * std::numbers::pi / (4.0 * azimuthal_nodes));
    rule.s[j] = c * c;
  }
  return rule;
}

}  // namespace fermicool
