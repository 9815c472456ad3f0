#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "cherry/error.hpp"
#include "cherry/regression.hpp"
#include "oracles.hpp"

using namespace cherry;

TEST_CASE("incomplete beta closed forms") {
  // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1 - x)^b.
  for (double x : {0.0, 0.001, 0.25, 0.5, 0.9, 1.0}) {
    CHECK(regularized_incomplete_beta(x, 1, 1) == doctest::Approx(x).epsilon(1e-13));
    CHECK(regularized_incomplete_beta(x, 3.5, 1) == doctest::Approx(std::pow(x, 3.5)).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(x, 1, 4) ==
          doctest::Approx(1 - std::pow(1 - x, 4)).epsilon(1e-12));
  }
  // Binomial identity: I_0.3(2, 3) = P(Bin(4, 0.3) >= 2).
  const double p = 0.3;
  const double tail = 1 - std::pow(1 - p, 4) - 4 * p * std::pow(1 - p, 3);
  CHECK(std::abs(regularized_incomplete_beta(0.3, 2, 3) - tail) < 1e-14);
  CHECK(std::abs(tail - 0.3483) < 1e-12);
}

TEST_CASE("incomplete beta domain") {
  CHECK_THROWS_AS(regularized_incomplete_beta(-0.1, 1, 1), Error);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.1, 1, 1), Error);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.5, 0, 1), Error);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.5, 1, -2), Error);
  CHECK_THROWS_AS(regularized_incomplete_beta(std::nan(""), 1, 1), Error);
}

TEST_CASE("incomplete beta against quadrature") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 1.0), ua(1.0, 30.0);
  for (int i = 0; i < 40; ++i) {
    const double x = ux(rng), a = ua(rng), b = ua(rng);
    const long double logb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    auto f = [&](long double t) -> long double {
      if (t <= 0 || t >= 1) return 0;
      return std::exp((a - 1) * std::log(t) + (b - 1) * std::log1p(-t) - logb);
    };
    const double expected = double(oracle::integrate(f, 0, x, 1e-15L));
    CAPTURE(x);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(std::abs(regularized_incomplete_beta(x, a, b) - expected) < 1e-10);
  }
}

TEST_CASE("student t tails") {
  CHECK(p_value_two_sided(0.0, 5) == 1.0);
  CHECK(p_value_two_sided(1.0, 1) == doctest::Approx(0.5).epsilon(1e-13));
  // df = 2 closed form: p = 1 - |t| / sqrt(2 + t^2).
  for (double t : {0.3, 1.0, 2.5, 10.0})
    CHECK(p_value_two_sided(t, 2) == doctest::Approx(1 - t / std::sqrt(2 + t * t)).epsilon(1e-12));
  CHECK(p_value_two_sided(-2.0, 7) == p_value_two_sided(2.0, 7));
  CHECK(std::abs(p_value_two_sided(2.1788, 12) - 0.05) < 5e-4);
  CHECK(p_value_two_sided(1e6, 3) > 0.0);
  CHECK_THROWS_AS(p_value_two_sided(1.0, 0), Error);
  CHECK_THROWS_AS(p_value_two_sided(INFINITY, 3), Error);
}

TEST_CASE("t critical inverts the tail") {
  CHECK(t_critical(0.95, 12) == doctest::Approx(2.178813).epsilon(1e-6));
  CHECK(t_critical(0.95, 1) == doctest::Approx(12.7062047).epsilon(1e-7));
  for (int df : {1, 2, 5, 13, 40, 200}) {
    for (double level : {0.5, 0.8, 0.95, 0.99}) {
      const double t = t_critical(level, df);
      CHECK(std::abs(p_value_two_sided(t, df) - (1 - level)) < 1e-9);
    }
  }
  CHECK_THROWS_AS(t_critical(1.0, 5), Error);
  CHECK_THROWS_AS(t_critical(0.95, 0), Error);
}

TEST_CASE("ols on an exact line") {
  std::vector<Point> pts{{1, 3}, {2, 5}, {4, 9}, {7, 15}};
  auto fit = fit_ols(pts);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == 1.0);
  CHECK_FALSE(fit.p_value);  // zero residuals: no t statistic
  CHECK(fit.residual_se == 0.0);
  auto pi = predict_with_interval(fit, 10, 0.95);
  CHECK(pi.degenerate);
  CHECK(pi.lower == pi.upper);
}

TEST_CASE("ols degenerate inputs") {
  std::vector<Point> two{{1, 1}, {2, 2}};
  CHECK_THROWS_AS(fit_ols(two), Error);
  std::vector<Point> flat_x{{1, 1}, {1, 2}, {1, 3}};
  try {
    fit_ols(flat_x);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_predictor);
  }
  std::vector<Point> flat_y{{1, 4}, {2, 4}, {3, 4}};
  auto fit = fit_ols(flat_y);
  CHECK(fit.slope == 0.0);
  CHECK_FALSE(fit.r_squared);
  CHECK_FALSE(fit.p_value);
}

TEST_CASE("ols matches the normal-equation oracle") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> un(3, 50);
  std::uniform_real_distribution<double> uv(0.0, 500.0);
  for (int i = 0; i < 50; ++i) {
    const int n = un(rng);
    std::vector<Point> pts;
    std::vector<double> xs, ys;
    for (int k = 0; k < n; ++k) {
      pts.push_back({uv(rng), uv(rng)});
      xs.push_back(pts.back().x);
      ys.push_back(pts.back().y);
    }
    auto fit = fit_ols(pts);
    auto ref = oracle::normal_equations(xs, ys);
    CHECK(std::abs(fit.slope - double(ref.slope)) < 1e-10);
    CHECK(std::abs(fit.intercept - double(ref.intercept)) < 1e-10);
    CHECK(std::abs(*fit.r_squared - double(ref.r_squared)) < 1e-10);
    CHECK(std::abs(*fit.p_value - oracle::t_two_sided(double(ref.t), ref.df)) < 1e-6);
  }
}

TEST_CASE("prediction interval") {
  std::vector<Point> pts{{1, 2.1}, {2, 3.9}, {3, 6.2}, {4, 7.8}, {5, 10.1}};
  auto fit = fit_ols(pts);
  auto at_mean = predict_with_interval(fit, fit.mean_x, 0.95);
  auto far = predict_with_interval(fit, 20, 0.95);
  CHECK(at_mean.point == doctest::Approx(fit.mean_y));
  CHECK(at_mean.upper - at_mean.lower < far.upper - far.lower);
  auto narrow = predict_with_interval(fit, 3, 0.5);
  auto wide = predict_with_interval(fit, 3, 0.99);
  CHECK(wide.lower < narrow.lower);
  CHECK(wide.upper > narrow.upper);

  // Half-width by hand.
  const double half = t_critical(0.95, 3) * fit.residual_se *
                      std::sqrt(1 + 1.0 / 5 + (20 - fit.mean_x) * (20 - fit.mean_x) / fit.sxx);
  CHECK(far.upper - far.point == doctest::Approx(half).epsilon(1e-12));
  CHECK_THROWS_AS(predict_with_interval(fit, 3, 1.5), Error);
}

TEST_CASE("affine transforms") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uv(0.0, 100.0), us(0.2, 5.0), ush(-50, 50);
  for (int i = 0; i < 30; ++i) {
    std::vector<Point> pts, moved;
    const double a = us(rng) * (i % 2 ? -1 : 1), b = ush(rng), c = us(rng), e = ush(rng);
    for (int k = 0; k < 12; ++k) {
      pts.push_back({uv(rng), uv(rng)});
      moved.push_back({a * pts.back().x + b, c * pts.back().y + e});
    }
    auto f1 = fit_ols(pts);
    auto f2 = fit_ols(moved);
    CHECK(std::abs(*f1.r_squared - *f2.r_squared) < 1e-9);
    CHECK(std::abs(*f1.p_value - *f2.p_value) < 1e-9);
    CHECK(std::abs(f2.slope - f1.slope * c / a) < 1e-9);
  }
}

TEST_CASE("p-value bands") {
  CHECK(p_value_band(0.0005) == "P<.001");
  CHECK(p_value_band(0.005) == "P<.01");
  CHECK(p_value_band(0.03) == "P<.05");
  CHECK(p_value_band(0.05) == "n.s.");
  CHECK(p_value_band(1.0) == "n.s.");
  CHECK_THROWS_AS(p_value_band(0.0), Error);
}
