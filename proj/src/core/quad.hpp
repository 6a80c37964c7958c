#pragma once

#include <functional>
#include <vector>

namespace errcal::num {

/// Nodes and weights of a fixed quadrature rule.
struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Gauss-Hermite rule for weight e^{-x^2} on (-inf, inf), n nodes.
/// Cached per n; thread safe.
[[nodiscard]] const QuadRule& gauss_hermite(int n);

/// Gauss-Legendre rule on [-1, 1], n nodes.  Cached per n; thread safe.
[[nodiscard]] const QuadRule& gauss_legendre(int n);

/// E[g(Z)], Z ~ N(0,1), for g smooth on all of R: Gauss-Hermite transform.
[[nodiscard]] double expect_normal(const std::function<double(double)>& g,
                                   int n_nodes);

/// E[g(Z)] for g smooth except at the listed kink abscissae (in z units):
/// composite Gauss-Legendre panels over [-zmax, zmax] split at every kink.
/// Falls back to plain Gauss-Hermite when kinks is empty.
[[nodiscard]] double expect_normal_kinked(
    const std::function<double(double)>& g, const std::vector<double>& kinks,
    int n_nodes = 64, double zmax = 12.0);

/// Integral of g over [a, b] by one Gauss-Legendre rule of n nodes.
[[nodiscard]] double integrate_gl(const std::function<double(double)>& g,
                                  double a, double b, int n_nodes);

}  // namespace errcal::num
