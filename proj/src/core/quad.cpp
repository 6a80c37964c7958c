#include "core/quad.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "core/errors.hpp"
#include "core/normal.hpp"

namespace errcal::num {

namespace {

// Golub-Welsch: eigen-decompose the Jacobi matrix of the orthogonal family.
// Weights are mu0 * (first eigenvector component)^2.
QuadRule golub_welsch(const std::vector<double>& off_diag, double mu0) {
  const int n = static_cast<int>(off_diag.size()) + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = off_diag[i];
    jacobi(i + 1, i) = off_diag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw NumericError("golub_welsch: eigen decomposition failed");
  }
  QuadRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.x[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.w[i] = mu0 * v0 * v0;
  }
  return rule;
}

QuadRule make_hermite(int n) {
  // Hermite recurrence (weight e^{-x^2}): b_k = sqrt(k/2), mu0 = sqrt(pi).
  std::vector<double> off(static_cast<std::size_t>(n) - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
  return golub_welsch(off, std::sqrt(kPi));
}

QuadRule make_legendre(int n) {
  // Legendre recurrence on [-1,1]: b_k = k / sqrt(4k^2 - 1), mu0 = 2.
  std::vector<double> off(static_cast<std::size_t>(n) - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(off, 2.0);
}

const QuadRule& cached_rule(int n, std::map<int, QuadRule>& cache,
                            std::mutex& mutex, QuadRule (*make)(int)) {
  if (n < 1) throw ConfigError("quadrature order must be positive");
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

}  // namespace

const QuadRule& gauss_hermite(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  return cached_rule(n, cache, mutex, &make_hermite);
}

const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  return cached_rule(n, cache, mutex, &make_legendre);
}

double expect_normal(const std::function<double(double)>& g, int n_nodes) {
  // E[g(Z)] = pi^{-1/2} * sum w_i g(sqrt(2) x_i) under the e^{-x^2} weight.
  const QuadRule& rule = gauss_hermite(n_nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    acc += rule.w[i] * g(kSqrt2 * rule.x[i]);
  }
  return acc / std::sqrt(kPi);
}

double integrate_gl(const std::function<double(double)>& g, double a, double b,
                    int n_nodes) {
  const QuadRule& rule = gauss_legendre(n_nodes);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    acc += rule.w[i] * g(mid + half * rule.x[i]);
  }
  return acc * half;
}

double expect_normal_kinked(const std::function<double(double)>& g,
                            const std::vector<double>& kinks, int n_nodes,
                            double zmax) {
  if (kinks.empty()) return expect_normal(g, n_nodes);
  std::vector<double> cuts{-zmax, zmax};
  for (double k : kinks) {
    if (k > -zmax && k < zmax) cuts.push_back(k);
  }
  std::sort(cuts.begin(), cuts.end());
  const auto integrand = [&g](double z) { return g(z) * normal_pdf(z); };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    // Panels of width <= 1 keep 32-point Gauss-Legendre at machine accuracy.
    const int panels = std::max(1, static_cast<int>(std::ceil(b - a)));
    const double step = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      acc += integrate_gl(integrand, a + p * step, a + (p + 1) * step, 32);
    }
  }
  return acc;
}

}  // namespace errcal::num
