#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "kvstring/analysis.hpp"
#include "kvstring/oracles.hpp"
#include "kvstring/rng.hpp"

using namespace kvstring;

namespace {

PiecewiseLinear one_minus_x() {
  PiecewiseLinear xi;
  xi.nodes = {0.0, 1.0};
  xi.values = {1.0, 0.0};
  return xi;
}

PiecewiseLinear random_xi(int n, SplitMix64& rng) {
  std::vector<double> values(static_cast<std::size_t>(n));
  for (auto& v : values) v = rng.symmetric();
  return uniform_test_function(n, values);
}

}  // namespace

TEST_CASE("power integrals in closed form") {
  CHECK(power_integral(0.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(power_integral(0.0, 1.0, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(power_integral(0.25, 1.0, -1.0) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(std::isinf(power_integral(0.0, 1.0, -1.0)));
  CHECK(std::isinf(power_integral(0.0, 0.5, -1.5)));
  CHECK_THROWS_AS(power_integral(0.5, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(power_integral(-0.1, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("hardy ratio reference values") {
  // xi = 1 - x: (int (1-x)^2) / (int 1) = 1/3
  CHECK(hardy_ratio(one_minus_x(), 0.0, 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // alpha = 1/2, beta = -1/2: (16/15) / (2/3) = 8/5
  CHECK(hardy_ratio(one_minus_x(), 0.5, -0.5) == doctest::Approx(1.6).epsilon(1e-14));

  PiecewiseLinear zero;
  zero.nodes = {0.0, 0.5, 1.0};
  zero.values = {0.0, 0.0, 0.0};
  CHECK(hardy_ratio(zero, 0.0, 0.0) == 0.0);

  CHECK_THROWS_AS(hardy_ratio(one_minus_x(), 0.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(hardy_ratio(one_minus_x(), 1.0, 0.0), std::invalid_argument);
  PiecewiseLinear bad = one_minus_x();
  bad.values.back() = 0.5;
  CHECK_THROWS_AS(hardy_ratio(bad, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("hardy integrals match adaptive quadrature for random test functions") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const PiecewiseLinear xi = random_xi(16, rng);
    for (auto [alpha, beta] : {std::pair{0.5, -0.5}, std::pair{0.0, 0.0}, std::pair{0.9, 2.0}}) {
      auto value_at = [&](double x) {
        auto it = std::upper_bound(xi.nodes.begin(), xi.nodes.end(), x);
        std::size_t e = std::min(xi.nodes.size() - 2,
                                 static_cast<std::size_t>(std::max<long>(
                                     0, std::distance(xi.nodes.begin(), it) - 1)));
        const double t = (x - xi.nodes[e]) / (xi.nodes[e + 1] - xi.nodes[e]);
        return xi.values[e] + t * (xi.values[e + 1] - xi.values[e]);
      };
      auto slope_at = [&](double x) {
        auto it = std::upper_bound(xi.nodes.begin(), xi.nodes.end(), x);
        std::size_t e = std::min(xi.nodes.size() - 2,
                                 static_cast<std::size_t>(std::max<long>(
                                     0, std::distance(xi.nodes.begin(), it) - 1)));
        return (xi.values[e + 1] - xi.values[e]) / (xi.nodes[e + 1] - xi.nodes[e]);
      };
      // integrate element by element so quadrature never crosses a kink
      double num = 0.0, den = 0.0;
      for (std::size_t e = 0; e + 1 < xi.nodes.size(); ++e) {
        const double a = xi.nodes[e], b = xi.nodes[e + 1];
        num += oracles::adaptive_integral(
            [&](double x) { return std::pow(x, beta) * value_at(x) * value_at(x); },
            std::max(a, 1e-13), b);
        den += oracles::adaptive_integral(
            [&](double x) { return std::pow(x, alpha) * slope_at(x) * slope_at(x); },
            std::max(a, 1e-13), b);
      }
      const double expected = num / den;
      CHECK(hardy_ratio(xi, alpha, beta) == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("truncated ratio diverges for the excluded exponent") {
  const PiecewiseLinear xi = one_minus_x();
  double previous = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double r = hardy_ratio_truncated(xi, 0.0, -1.0, eps);
    CHECK(r > previous);
    previous = r;
  }
  CHECK(previous > 5.0 * hardy_ratio_truncated(xi, 0.0, -1.0, 1e-2));
  CHECK_THROWS_AS(hardy_ratio_truncated(xi, 0.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("hardy sweep is bounded under refinement and reproducible") {
  const std::vector<double> alphas{-1.0, 0.0, 0.5, 0.9};
  const std::vector<double> betas{-0.5, 0.0, 1.0, 2.0};
  const auto cases = hardy_sweep(alphas, betas, 60, 42);
  REQUIRE(cases.size() == 16);
  for (const auto& hc : cases) {
    if (hc.alpha == -1.0) {
      // the denominator integral diverges for piecewise-linear data: ratio 0
      CHECK(hc.ratio == 0.0);
      continue;
    }
    CHECK(hc.ratio > 0.0);
    CHECK(hc.ratio_fine <= 1.5 * hc.ratio_coarse);
  }
  // (alpha=0, beta=0) is witnessed by xi = 1-x at ratio 1/3
  for (const auto& hc : cases)
    if (hc.alpha == 0.0 && hc.beta == 0.0) CHECK(hc.ratio >= 1.0 / 3.0);

  CHECK(hardy_sweep(alphas, betas, 0, 42).empty());

  // determinism and schedule independence
  const auto again = hardy_sweep(alphas, betas, 60, 42, 1);
  const auto threaded = hardy_sweep(alphas, betas, 60, 42, 4);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CHECK(cases[i].ratio == again[i].ratio);
    CHECK(cases[i].ratio == threaded[i].ratio);
  }
  CHECK_THROWS_AS(hardy_sweep(std::vector<double>{1.0}, betas, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(hardy_sweep(alphas, std::vector<double>{-1.0}, 5, 0), std::invalid_argument);
}

TEST_CASE("comparison table semantics") {
  const std::vector<double> alphas{0.0, 0.5};
  const auto rows = build_comparison_table(alphas);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].decay_order == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rows[0].prior_order == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(rows[1].decay_order == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(rows[1].prior_order == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(!rows[0].theta_fit.has_value());

  CHECK(build_comparison_table(std::vector<double>{}).empty());

  // exact half-step improvement on a grid
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(i / 50.0);
  for (const auto& row : build_comparison_table(grid))
    CHECK(std::abs(row.decay_order - row.prior_order - 0.5) <= 1e-13);

  // fitted columns attach by exponent
  std::vector<std::pair<double, FittedRates>> fits;
  FittedRates f;
  f.theta_fit = 0.48;
  f.slope_energy = -3.9;
  fits.emplace_back(0.0, f);
  const auto with_fits = build_comparison_table(alphas, fits);
  REQUIRE(with_fits[0].theta_fit.has_value());
  CHECK(*with_fits[0].theta_fit == 0.48);
  CHECK(!with_fits[1].theta_fit.has_value());
}
