#include "cherry/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cherry/error.hpp"

namespace cherry {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 10000;

// Continued fraction for I_x(a, b) (modified Lentz). Converges fast for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;

    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::domain_error, "incomplete beta continued fraction did not converge");
}

// y = 1 - x is passed separately so callers holding the complement exactly
// do not lose it to cancellation.
double incomplete_beta(double x, double y, double a, double b) {
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(y, b, a) / b;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0) || !std::isfinite(a) ||
      !std::isfinite(b))
    throw Error(ErrorCode::domain_error, "incomplete beta requires 0 <= x <= 1, a > 0, b > 0");
  return incomplete_beta(x, 1.0 - x, a, b);
}

double p_value_two_sided(double t, int df) {
  if (df < 1) throw Error(ErrorCode::domain_error, "degrees of freedom must be >= 1");
  if (!std::isfinite(t)) throw Error(ErrorCode::domain_error, "t statistic must be finite");
  if (t == 0.0) return 1.0;
  const double nu = df;
  const double t2 = t * t;
  return incomplete_beta(nu / (nu + t2), t2 / (nu + t2), 0.5 * nu, 0.5);
}

double t_critical(double level, int df) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorCode::domain_error, "coverage level must lie in (0, 1)");
  if (df < 1) throw Error(ErrorCode::domain_error, "degrees of freedom must be >= 1");
  const double alpha = 1.0 - level;

  double lo = 0.0;
  double hi = 1.0;
  while (p_value_two_sided(hi, df) > alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw Error(ErrorCode::domain_error, "t quantile out of range");
  }
  for (int i = 0; i < 400 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (p_value_two_sided(mid, df) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

RegressionFit fit_ols(std::span<const Point> points) {
  const std::size_t n = points.size();
  if (n < 3)
    throw Error(ErrorCode::insufficient_data,
                "at least 3 points required, got " + std::to_string(n));

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += p.x;
    mean_y += p.y;
  }
  mean_x /= double(n);
  mean_y /= double(n);

  double sxx = 0.0;
  double sxy = 0.0;
  double sst = 0.0;
  for (const auto& p : points) {
    const double dx = p.x - mean_x;
    const double dy = p.y - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    sst += dy * dy;
  }
  if (sxx == 0.0)
    throw Error(ErrorCode::degenerate_predictor, "all x values are equal");

  RegressionFit fit;
  fit.n = n;
  fit.mean_x = mean_x;
  fit.mean_y = mean_y;
  fit.sxx = sxx;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;

  double sse = 0.0;
  for (const auto& p : points) {
    const double r = (p.y - mean_y) - fit.slope * (p.x - mean_x);
    sse += r * r;
  }
  // Residuals at rounding level on an exact line count as zero.
  if (sse <= 1e-28 * sst) sse = 0.0;

  if (sst > 0.0) fit.r_squared = std::clamp(1.0 - sse / sst, 0.0, 1.0);

  const int df = fit.df();
  fit.residual_se = std::sqrt(sse / df);
  if (fit.residual_se > 0.0) {
    const double t = fit.slope / (fit.residual_se / std::sqrt(sxx));
    // Deep tails underflow to 0; keep the value inside (0, 1].
    fit.p_value = std::max(p_value_two_sided(t, df), std::numeric_limits<double>::min());
  }
  return fit;
}

PredictionInterval predict_with_interval(const RegressionFit& fit, double x, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorCode::domain_error, "coverage level must lie in (0, 1)");
  if (fit.n < 3 || fit.sxx <= 0.0)
    throw Error(ErrorCode::invalid_argument, "fit lacks the statistics for an interval");

  PredictionInterval out;
  out.point = fit.predict(x);
  if (fit.residual_se == 0.0) {
    out.lower = out.upper = out.point;
    out.degenerate = true;
    return out;
  }
  const double dx = x - fit.mean_x;
  const double half = t_critical(level, fit.df()) * fit.residual_se *
                      std::sqrt(1.0 + 1.0 / double(fit.n) + dx * dx / fit.sxx);
  out.lower = out.point - half;
  out.upper = out.point + half;
  return out;
}

std::string_view p_value_band(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::domain_error, "p-value outside (0, 1]");
  if (p < 0.001) return "P<.001";
  if (p < 0.01) return "P<.01";
  if (p < 0.05) return "P<.05";
  return "n.s.";
}

}  // namespace cherry
