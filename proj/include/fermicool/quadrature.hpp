#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace fermicool {

template <typename Scalar>
struct QuadratureRule {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> weights;

  template <typename F>
  Scalar integrate(F&& f) const {
    Scalar sum(0);
    for (Eigen::Index i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

namespace detail {

// Golub-Welsch for the nodes (eigenvalues of the symmetric Jacobi matrix).
// Weights come from the Christoffel function 1 / sum_k p_k(x)^2 with p_k the
// orthonormal polynomials of the same recurrence: the eigenvector route loses
// relative accuracy on the tiny outer weights.
template <typename Scalar>
QuadratureRule<Scalar> golub_welsch(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& off_diagonal,
                                    Scalar mu0) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = off_diagonal.size() + 1;
  Matrix jacobi = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = off_diagonal[i];
    jacobi(i + 1, i) = off_diagonal[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  QuadratureRule<Scalar> rule;
  rule.nodes = solver.eigenvalues().array();
  rule.weights.resize(n);
  using std::sqrt;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar x = rule.nodes[i];
    Scalar prev(0), curr = Scalar(1) / sqrt(mu0);
    Scalar sum = curr * curr;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      const Scalar next = (x * curr - (k > 0 ? off_diagonal[k - 1] : Scalar(0)) * prev) / off_diagonal[k];
      prev = curr;
      curr = next;
      sum += curr * curr;
    }
    rule.weights[i] = Scalar(1) / sum;
  }
  return rule;
}

}  // namespace detail

/// Gauss-Hermite rule for the weight exp(-x^2); exact to polynomial degree 2n-1.
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_hermite(int n) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> beta(n - 1);
  for (int k = 1; k < n; ++k) beta[k - 1] = std::sqrt(Scalar(k) / Scalar(2));
  return detail::golub_welsch<Scalar>(beta, std::sqrt(std::numbers::pi_v<Scalar>));
}

/// Gauss-Legendre rule on [-1, 1].
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_legendre(int n) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> beta(n - 1);
  for (int k = 1; k < n; ++k) beta[k - 1] = Scalar(k) / std::sqrt(Scalar(4 * k * k - 1));
  return detail::golub_welsch<Scalar>(beta, Scalar(2));
}

/// Quadrature for the unit-sphere average of a function of the squared
/// direction cosines (kx^2, ky^2, kz^2). A node is (t, s) with kz^2 = t,
/// kx^2 = (1 - t) s, ky^2 = (1 - t)(1 - s). Exact whenever the integrand is a
/// polynomial of total degree below 2 * min(polar, azimuthal) in those squares.
struct SphereRule {
  Eigen::ArrayXd t;         // kz^2 at each polar node
  Eigen::ArrayXd polar_w;   // sums to 1
  Eigen::ArrayXd s;         // cos^2(phi) at each azimuthal node
  Eigen::ArrayXd azimuth_w; // sums to 1

  int polar_nodes() const { return static_cast<int>(t.size()); }
  int azimuthal_nodes() const { return static_cast<int>(s.size()); }
};

SphereRule sphere_rule(int polar_nodes, int azimuthal_nodes);

/// Node count per direction that integrates degree-`degree` polynomials exactly.
inline int sphere_nodes_for_degree(int degree) { return degree / 2 + 1; }

}  // namespace fermicool
