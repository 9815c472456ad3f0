#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace cherry {

/// Regularized incomplete beta function I_x(a, b).
///
/// Evaluated with the Lentz continued fraction, switching to
/// 1 - I_{1-x}(b, a) when x > (a + 1) / (a + b + 2) so the fraction always
/// converges quickly. Absolute accuracy is better than 1e-12 for shapes up to
/// a few hundred. Throws Error(domain_error) unless 0 <= x <= 1, a > 0, b > 0.
double regularized_incomplete_beta(double x, double a, double b);

/// Two-sided Student-t tail probability P(|T| >= |t|) with df degrees of
/// freedom, computed as I_{df/(df+t^2)}(df/2, 1/2).
double p_value_two_sided(double t, int df);

/// Critical value t such that P(|T| <= t) = level, found by bisection on
/// p_value_two_sided to 1e-9 or better.
double t_critical(double level, int df);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  // nullopt marks a degenerate statistic: SST = 0 for R², SSE = 0 for p.
  std::optional<double> r_squared;
  std::optional<double> p_value;
  std::size_t n = 0;
  double residual_se = 0.0;
  double sxx = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;

  int df() const noexcept { return int(n) - 2; }
  double predict(double x) const noexcept { return slope * x + intercept; }
};

/// Ordinary least squares of y on x with a two-sided t-test of slope = 0.
/// Throws Error(insufficient_data) for n < 3 and Error(degenerate_predictor)
/// when every x is equal.
RegressionFit fit_ols(std::span<const Point> points);

struct PredictionInterval {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool degenerate = false;  // zero residual spread, interval collapsed
};

/// Prediction interval for a single new response at x.
PredictionInterval predict_with_interval(const RegressionFit& fit, double x, double level);

/// "P<.001", "P<.01", "P<.05" or "n.s.". Throws Error(domain_error) outside (0, 1].
std::string_view p_value_band(double p);

}  // namespace cherry
