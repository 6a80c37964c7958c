#pragma once

namespace errcal::num {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;

/// Standard normal density.
[[nodiscard]] double normal_pdf(double x);

/// Standard normal CDF via erfc; accurate in both tails.
[[nodiscard]] double normal_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
/// Preconditions: u in (0,1); throws ConfigError outside.
[[nodiscard]] double normal_quantile(double u);

/// First derivative of the quantile: 1 / phi(quantile(u)).
[[nodiscard]] double normal_quantile_d1(double u);

/// Second derivative of the quantile: quantile(u) / phi(quantile(u))^2.
[[nodiscard]] double normal_quantile_d2(double u);

}  // namespace errcal::num
