#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace errcal::algebra {

// ============================================================================
// Finite-dimensional error calculus: a quantity together with the variance
// of its infinitesimal error (the Gamma matrix) and optionally the first
// order bias of that error.  Propagation through a smooth map follows the
// Gauss rule for Gamma and the second order chain rule for the bias.
// ============================================================================

/// Map R^m -> R^n with optional analytic first and second derivatives.
/// Without an analytic Jacobian a central finite difference with step
/// h = cbrt(eps) * max(1, |x_i|) is used; second derivatives have no
/// automatic fallback because the bias rule is sensitive to their accuracy.
class SmoothMap {
 public:
  using EvalFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using HessiansFn =
      std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>;

  SmoothMap(int dim_in, int dim_out, EvalFn eval, JacobianFn jacobian = {},
            HessiansFn hessians = {});

  [[nodiscard]] int dim_in() const { return dim_in_; }
  [[nodiscard]] int dim_out() const { return dim_out_; }
  [[nodiscard]] bool has_jacobian() const { return bool(jacobian_); }
  [[nodiscard]] bool has_hessians() const { return bool(hessians_); }

  [[nodiscard]] Eigen::VectorXd eval(const Eigen::VectorXd& x) const;

  /// Analytic Jacobian when provided, finite differences otherwise (n x m).
  [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  /// One m x m Hessian per output component; CapabilityError when absent.
  [[nodiscard]] std::vector<Eigen::MatrixXd> hessians(
      const Eigen::VectorXd& x) const;

  /// Central finite-difference Jacobian (also the fallback path).
  [[nodiscard]] Eigen::MatrixXd fd_jacobian(const Eigen::VectorXd& x) const;

  /// Finite-difference Hessians from Jacobian differences; for derivative
  /// cross-checks, not for production bias propagation.
  [[nodiscard]] std::vector<Eigen::MatrixXd> fd_hessians(
      const Eigen::VectorXd& x) const;

  /// True when analytic derivatives match finite differences at x within
  /// rtol (relative to the largest entry); used by property tests.
  [[nodiscard]] bool check_derivatives(const Eigen::VectorXd& x,
                                       double rtol = 1e-5) const;

 private:
  int dim_in_;
  int dim_out_;
  EvalFn eval_;
  JacobianFn jacobian_;
  HessiansFn hessians_;
};

/// Quantity + error variance (+ optional error bias).
struct ErrorVector {
  Eigen::VectorXd value;
  Eigen::MatrixXd gamma;
  std::optional<Eigen::VectorXd> bias;
};

/// Validates shape, finiteness, symmetry, and positive semi-definiteness
/// of gamma (minimum eigenvalue >= -1e-10 * max(trace, 1)).  ConfigError on
/// violation.
void validate_error_vector(const ErrorVector& ev);

/// Gauss propagation: value' = F(value), gamma' = J gamma J^T (symmetrized).
/// When the map has Hessians and the input has a bias, the bias propagates
/// by the second order chain rule; otherwise the result carries no bias.
[[nodiscard]] ErrorVector propagate_gamma(const SmoothMap& map,
                                          const ErrorVector& in);

/// Second order chain rule alone:
///   bias'_k = sum_i J_ki bias_i + 1/2 sum_ij H_k,ij gamma_ij.
/// CapabilityError when the map lacks Hessians or the input lacks a bias.
[[nodiscard]] Eigen::VectorXd propagate_bias(const SmoothMap& map,
                                             const ErrorVector& in);

/// One-dimensional C^2 map with explicit derivatives.
struct Map1D {
  std::function<double(double)> f;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

/// State of the scalar transport recursion.
struct TransportState {
  double x = 0.0;
  double var = 0.0;
  double bias = 0.0;
};

/// Iterates the scalar error transport
///   bias_{n+1} = bias_n f'(x_n) + 1/2 var_n f''(x_n),
///   var_{n+1}  = var_n f'(x_n)^2,
/// returning all states including the initial one.
[[nodiscard]] std::vector<TransportState> transport(
    const TransportState& init, const std::vector<Map1D>& maps);

/// Point-dependent error variance matrix on R^dim.
struct GammaField {
  int dim = 0;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> field;

  [[nodiscard]] Eigen::MatrixXd at(const Eigen::VectorXd& x) const;
};

/// Product of independent error structures: block-diagonal field on the
/// concatenation of the factor coordinates.
[[nodiscard]] GammaField product_structure(
    const std::vector<GammaField>& factors);

// ============================================================================
// Triangle survey: point B from lengths (l1, l2) and angles (theta1, theta2)
// with correlated length errors and correlated angle errors.
// ============================================================================

struct TriangleGamma {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
};

/// Closed-form Gamma[X_B], Gamma[Y_B], Gamma[X_B, Y_B].  Must coincide with
/// propagate_gamma through triangle_map/triangle_field (asserted in tests).
/// Preconditions: l1, l2 > 0 and angles in [0, pi]; ConfigError otherwise.
[[nodiscard]] TriangleGamma triangle_errors(double l1, double l2,
                                            double theta1, double theta2);

/// The survey map (l1, l2, theta1, theta2) -> (X_B, Y_B) with analytic
/// derivatives, X_B = l1 cos(theta1) + l2 cos(theta1 + theta2).
[[nodiscard]] SmoothMap triangle_map();

/// The survey error field: blocks [[l1^2, l1 l2 / 2], [l1 l2 / 2, l2^2]] for
/// the lengths and [[1, 1/2], [1/2, 1]] for the angles.
[[nodiscard]] GammaField triangle_field();

}  // namespace errcal::algebra
