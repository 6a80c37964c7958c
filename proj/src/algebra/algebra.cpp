#include "algebra/algebra.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "core/errors.hpp"

namespace errcal::algebra {

namespace {

constexpr double kFdScale = 6.055454452393343e-06;  // cbrt(machine epsilon)

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m,
                    const char* what) {
  if (!m.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

// ============================================================================
// SmoothMap
// ============================================================================

SmoothMap::SmoothMap(int dim_in, int dim_out, EvalFn eval, JacobianFn jacobian,
                     HessiansFn hessians)
    : dim_in_(dim_in),
      dim_out_(dim_out),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      hessians_(std::move(hessians)) {
  if (dim_in_ < 1 || dim_out_ < 1) {
    throw ConfigError("SmoothMap: dimensions must be positive");
  }
  if (!eval_) throw ConfigError("SmoothMap: evaluation function required");
}

Eigen::VectorXd SmoothMap::eval(const Eigen::VectorXd& x) const {
  if (x.size() != dim_in_) {
    throw ConfigError("SmoothMap::eval: input dimension mismatch");
  }
  Eigen::VectorXd y = eval_(x);
  if (y.size() != dim_out_) {
    throw NumericError("SmoothMap::eval: output dimension mismatch");
  }
  require_finite(y, "SmoothMap::eval");
  return y;
}

Eigen::MatrixXd SmoothMap::jacobian(const Eigen::VectorXd& x) const {
  if (x.size() != dim_in_) {
    throw ConfigError("SmoothMap::jacobian: input dimension mismatch");
  }
  if (!jacobian_) return fd_jacobian(x);
  Eigen::MatrixXd j = jacobian_(x);
  if (j.rows() != dim_out_ || j.cols() != dim_in_) {
    throw NumericError("SmoothMap::jacobian: shape mismatch");
  }
  require_finite(j, "SmoothMap::jacobian");
  return j;
}

std::vector<Eigen::MatrixXd> SmoothMap::hessians(
    const Eigen::VectorXd& x) const {
  if (x.size() != dim_in_) {
    throw ConfigError("SmoothMap::hessians: input dimension mismatch");
  }
  if (!hessians_) {
    throw CapabilityError("SmoothMap: second derivatives not available");
  }
  auto hs = hessians_(x);
  if (hs.size() != static_cast<std::size_t>(dim_out_)) {
    throw NumericError("SmoothMap::hessians: one Hessian per output required");
  }
  for (const auto& h : hs) {
    if (h.rows() != dim_in_ || h.cols() != dim_in_) {
      throw NumericError("SmoothMap::hessians: shape mismatch");
    }
    require_finite(h, "SmoothMap::hessians");
  }
  return hs;
}

Eigen::MatrixXd SmoothMap::fd_jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd j(dim_out_, dim_in_);
  Eigen::VectorXd xp = x;
  for (int i = 0; i < dim_in_; ++i) {
    const double h = kFdScale * std::max(1.0, std::fabs(x(i)));
    xp(i) = x(i) + h;
    const Eigen::VectorXd up = eval_(xp);
    xp(i) = x(i) - h;
    const Eigen::VectorXd dn = eval_(xp);
    xp(i) = x(i);
    j.col(i) = (up - dn) / (2.0 * h);
  }
  return j;
}

std::vector<Eigen::MatrixXd> SmoothMap::fd_hessians(
    const Eigen::VectorXd& x) const {
  // Second differences of eval: H_k(i,j) via the standard 4-point stencil.
  std::vector<Eigen::MatrixXd> hs(
      static_cast<std::size_t>(dim_out_),
      Eigen::MatrixXd::Zero(dim_in_, dim_in_));
  const double scale = 9.31322574615478515625e-10;  // eps^(1/4)-ish step base
  Eigen::VectorXd xp = x;
  for (int i = 0; i < dim_in_; ++i) {
    const double hi = std::sqrt(scale) * std::max(1.0, std::fabs(x(i)));
    for (int j = i; j < dim_in_; ++j) {
      const double hj = std::sqrt(scale) * std::max(1.0, std::fabs(x(j)));
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim_out_);
      for (int si = -1; si <= 1; si += 2) {
        for (int sj = -1; sj <= 1; sj += 2) {
          xp = x;
          xp(i) += si * hi;
          xp(j) += sj * hj;
          acc += static_cast<double>(si * sj) * eval_(xp);
        }
      }
      const Eigen::VectorXd d2 = acc / (4.0 * hi * hj);
      for (int k = 0; k < dim_out_; ++k) {
        hs[static_cast<std::size_t>(k)](i, j) = d2(k);
        hs[static_cast<std::size_t>(k)](j, i) = d2(k);
      }
    }
  }
  return hs;
}

bool SmoothMap::check_derivatives(const Eigen::VectorXd& x, double rtol) const {
  if (!jacobian_) return true;
  const Eigen::MatrixXd ja = jacobian_(x);
  const Eigen::MatrixXd jf = fd_jacobian(x);
  const double scale = std::max(1.0, ja.cwiseAbs().maxCoeff());
  if ((ja - jf).cwiseAbs().maxCoeff() > rtol * scale) return false;
  if (hessians_) {
    const auto ha = hessians_(x);
    const auto hf = fd_hessians(x);
    for (std::size_t k = 0; k < ha.size(); ++k) {
      const double hscale = std::max(1.0, ha[k].cwiseAbs().maxCoeff());
      // FD Hessians carry ~1e-4 relative error; compare loosely.
      if ((ha[k] - hf[k]).cwiseAbs().maxCoeff() > std::max(rtol, 1e-3) * hscale) {
        return false;
      }
    }
  }
  return true;
}

// ============================================================================
// Propagation
// ============================================================================

void validate_error_vector(const ErrorVector& ev) {
  const auto n = ev.value.size();
  if (n == 0) throw ConfigError("ErrorVector: empty value");
  if (ev.gamma.rows() != n || ev.gamma.cols() != n) {
    throw ConfigError("ErrorVector: gamma shape does not match value");
  }
  if (!ev.value.allFinite() || !ev.gamma.allFinite()) {
    throw ConfigError("ErrorVector: non-finite entries");
  }
  if (ev.bias && (ev.bias->size() != n || !ev.bias->allFinite())) {
    throw ConfigError("ErrorVector: bias shape mismatch or non-finite");
  }
  const double scale = std::max(1.0, ev.gamma.cwiseAbs().maxCoeff());
  if ((ev.gamma - ev.gamma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ConfigError("ErrorVector: gamma is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ev.gamma);
  if (solver.info() != Eigen::Success) {
    throw NumericError("ErrorVector: eigenvalue check failed");
  }
  const double floor = -1e-10 * std::max(ev.gamma.trace(), 1.0);
  if (solver.eigenvalues().minCoeff() < floor) {
    throw ConfigError("ErrorVector: gamma is not positive semi-definite");
  }
}

ErrorVector propagate_gamma(const SmoothMap& map, const ErrorVector& in) {
  validate_error_vector(in);
  if (in.value.size() != map.dim_in()) {
    throw ConfigError("propagate_gamma: map/input dimension mismatch");
  }
  ErrorVector out;
  out.value = map.eval(in.value);
  const Eigen::MatrixXd j = map.jacobian(in.value);
  Eigen::MatrixXd g = j * in.gamma * j.transpose();
  out.gamma = 0.5 * (g + g.transpose());
  require_finite(out.gamma, "propagate_gamma");
  if (in.bias && map.has_hessians()) {
    out.bias = propagate_bias(map, in);
  }
  return out;
}

Eigen::VectorXd propagate_bias(const SmoothMap& map, const ErrorVector& in) {
  validate_error_vector(in);
  if (in.value.size() != map.dim_in()) {
    throw ConfigError("propagate_bias: map/input dimension mismatch");
  }
  if (!in.bias) {
    throw CapabilityError("propagate_bias: input carries no bias");
  }
  if (!map.has_hessians()) {
    throw CapabilityError("propagate_bias: map has no second derivatives");
  }
  const Eigen::MatrixXd j = map.jacobian(in.value);
  const auto hs = map.hessians(in.value);
  Eigen::VectorXd bias = j * (*in.bias);
  for (int k = 0; k < map.dim_out(); ++k) {
    bias(k) += 0.5 * (hs[static_cast<std::size_t>(k)].cwiseProduct(in.gamma)).sum();
  }
  require_finite(bias, "propagate_bias");
  return bias;
}

std::vector<TransportState> transport(const TransportState& init,
                                      const std::vector<Map1D>& maps) {
  if (!(std::isfinite(init.x) && std::isfinite(init.var) &&
        std::isfinite(init.bias)) ||
      init.var < 0.0) {
    throw ConfigError("transport: invalid initial state");
  }
  std::vector<TransportState> states;
  states.reserve(maps.size() + 1);
  states.push_back(init);
  for (const auto& map : maps) {
    if (!map.f || !map.d1 || !map.d2) {
      throw CapabilityError("transport: maps need f, f', and f''");
    }
    const TransportState& s = states.back();
    const double d1 = map.d1(s.x);
    const double d2 = map.d2(s.x);
    TransportState next;
    next.x = map.f(s.x);
    next.bias = s.bias * d1 + 0.5 * s.var * d2;
    next.var = s.var * d1 * d1;
    if (!(std::isfinite(next.x) && std::isfinite(next.var) &&
          std::isfinite(next.bias))) {
      throw NumericError("transport: non-finite state");
    }
    states.push_back(next);
  }
  return states;
}

Eigen::MatrixXd GammaField::at(const Eigen::VectorXd& x) const {
  if (!field) throw ConfigError("GammaField: empty field");
  if (x.size() != dim) throw ConfigError("GammaField: dimension mismatch");
  Eigen::MatrixXd g = field(x);
  if (g.rows() != dim || g.cols() != dim) {
    throw NumericError("GammaField: field shape mismatch");
  }
  require_finite(g, "GammaField");
  return g;
}

GammaField product_structure(const std::vector<GammaField>& factors) {
  if (factors.empty()) throw ConfigError("product_structure: no factors");
  int total = 0;
  for (const auto& f : factors) {
    if (f.dim < 1 || !f.field) {
      throw ConfigError("product_structure: invalid factor");
    }
    total += f.dim;
  }
  GammaField joint;
  joint.dim = total;
  joint.field = [factors, total](const Eigen::VectorXd& x) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(total, total);
    int offset = 0;
    for (const auto& f : factors) {
      g.block(offset, offset, f.dim, f.dim) = f.at(x.segment(offset, f.dim));
      offset += f.dim;
    }
    return g;
  };
  return joint;
}

// ============================================================================
// Triangle survey
// ============================================================================

namespace {

void check_triangle_inputs(double l1, double l2, double theta1, double theta2) {
  const double pi = 3.141592653589793238462643383279502884;
  if (!(l1 > 0.0) || !(l2 > 0.0) || !std::isfinite(l1) || !std::isfinite(l2)) {
    throw ConfigError("triangle: lengths must be positive and finite");
  }
  if (!(theta1 >= 0.0 && theta1 <= pi) || !(theta2 >= 0.0 && theta2 <= pi)) {
    throw ConfigError("triangle: angles must lie in [0, pi]");
  }
}

}  // namespace

TriangleGamma triangle_errors(double l1, double l2, double theta1,
                              double theta2) {
  check_triangle_inputs(l1, l2, theta1, theta2);
  const double s1 = std::sin(theta1);
  const double c1 = std::cos(theta1);
  const double s12 = std::sin(theta1 + theta2);
  const double c12 = std::cos(theta1 + theta2);
  TriangleGamma g;
  g.xx = l1 * l1 + l1 * l2 * (std::cos(theta2) + 2.0 * s1 * s12) +
         l2 * l2 * (1.0 + 2.0 * s12 * s12);
  g.yy = l1 * l1 + l1 * l2 * (std::cos(theta2) + 2.0 * c1 * c12) +
         l2 * l2 * (1.0 + 2.0 * c12 * c12);
  g.xy = -l1 * l2 * std::sin(2.0 * theta1 + theta2) -
         l2 * l2 * std::sin(2.0 * theta1 + 2.0 * theta2);
  return g;
}

SmoothMap triangle_map() {
  auto eval = [](const Eigen::VectorXd& v) {
    check_triangle_inputs(v(0), v(1), v(2), v(3));
    Eigen::VectorXd out(2);
    out(0) = v(0) * std::cos(v(2)) + v(1) * std::cos(v(2) + v(3));
    out(1) = v(0) * std::sin(v(2)) + v(1) * std::sin(v(2) + v(3));
    return out;
  };
  auto jac = [](const Eigen::VectorXd& v) {
    const double c1 = std::cos(v(2));
    const double s1 = std::sin(v(2));
    const double c12 = std::cos(v(2) + v(3));
    const double s12 = std::sin(v(2) + v(3));
    Eigen::MatrixXd j(2, 4);
    j << c1, c12, -v(0) * s1 - v(1) * s12, -v(1) * s12,
         s1, s12,  v(0) * c1 + v(1) * c12,  v(1) * c12;
    return j;
  };
  auto hess = [](const Eigen::VectorXd& v) {
    const double c1 = std::cos(v(2));
    const double s1 = std::sin(v(2));
    const double c12 = std::cos(v(2) + v(3));
    const double s12 = std::sin(v(2) + v(3));
    std::vector<Eigen::MatrixXd> hs(2, Eigen::MatrixXd::Zero(4, 4));
    // X_B = l1 c1 + l2 c12
    hs[0](0, 2) = hs[0](2, 0) = -s1;
    hs[0](1, 2) = hs[0](2, 1) = -s12;
    hs[0](1, 3) = hs[0](3, 1) = -s12;
    hs[0](2, 2) = -v(0) * c1 - v(1) * c12;
    hs[0](2, 3) = hs[0](3, 2) = -v(1) * c12;
    hs[0](3, 3) = -v(1) * c12;
    // Y_B = l1 s1 + l2 s12
    hs[1](0, 2) = hs[1](2, 0) = c1;
    hs[1](1, 2) = hs[1](2, 1) = c12;
    hs[1](1, 3) = hs[1](3, 1) = c12;
    hs[1](2, 2) = -v(0) * s1 - v(1) * s12;
    hs[1](2, 3) = hs[1](3, 2) = -v(1) * s12;
    hs[1](3, 3) = -v(1) * s12;
    return hs;
  };
  return SmoothMap(4, 2, eval, jac, hess);
}

GammaField triangle_field() {
  GammaField field;
  field.dim = 4;
  field.field = [](const Eigen::VectorXd& v) {
    check_triangle_inputs(v(0), v(1), v(2), v(3));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g(0, 0) = v(0) * v(0);
    g(1, 1) = v(1) * v(1);
    g(0, 1) = g(1, 0) = 0.5 * v(0) * v(1);
    g(2, 2) = g(3, 3) = 1.0;
    g(2, 3) = g(3, 2) = 0.5;
    return g;
  };
  return field;
}

}  // namespace errcal::algebra
