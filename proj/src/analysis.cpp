#include "kvstring/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kvstring/parallel.hpp"
#include "kvstring/rng.hpp"

namespace kvstring {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integrals of x^p * xi(x)^2 and x^p * xi'(x)^2 over one linear element.
double weighted_value_integral(double a, double b, double xa, double xb, double p) {
  const double s = (xb - xa) / (b - a);
  const double c0 = xa - s * a;  // xi(x) = c0 + s x
  double total = 0.0;
  if (c0 != 0.0) total += c0 * c0 * power_integral(a, b, p);
  if (c0 != 0.0 && s != 0.0) total += 2.0 * c0 * s * power_integral(a, b, p + 1.0);
  if (s != 0.0) total += s * s * power_integral(a, b, p + 2.0);
  return total;
}

double weighted_slope_integral(double a, double b, double xa, double xb, double p) {
  const double s = (xb - xa) / (b - a);
  if (s == 0.0) return 0.0;
  return s * s * power_integral(a, b, p);
}

void check_test_function(const PiecewiseLinear& xi) {
  if (xi.nodes.size() < 2 || xi.nodes.size() != xi.values.size())
    throw std::invalid_argument("hardy_ratio: malformed test function");
  for (std::size_t i = 0; i + 1 < xi.nodes.size(); ++i)
    if (!(xi.nodes[i] < xi.nodes[i + 1]))
      throw std::invalid_argument("hardy_ratio: nodes must be strictly increasing");
  if (!(xi.nodes.front() >= 0.0) || xi.nodes.back() != 1.0)
    throw std::invalid_argument("hardy_ratio: nodes must lie in [0,1] and end at 1");
  if (xi.values.back() != 0.0)
    throw std::invalid_argument("hardy_ratio: test function must vanish at x = 1");
}

double ratio_over(const PiecewiseLinear& xi, double alpha, double beta, double x_lo) {
  double num = 0.0, den = 0.0;
  for (std::size_t e = 0; e + 1 < xi.nodes.size(); ++e) {
    double a = xi.nodes[e];
    const double b = xi.nodes[e + 1];
    if (b <= x_lo) continue;
    double xa = xi.values[e];
    const double xb = xi.values[e + 1];
    if (a < x_lo) {
      xa += (xb - xa) * (x_lo - a) / (b - a);
      a = x_lo;
    }
    num += weighted_value_integral(a, b, xa, xb, beta);
    den += weighted_slope_integral(a, b, xa, xb, alpha);
  }
  if (num == 0.0) return 0.0;
  if (den == kInf) return 0.0;
  if (den == 0.0) return kInf;
  return num / den;
}

}  // namespace

PiecewiseLinear uniform_test_function(int n_elements, std::span<const double> interior_values) {
  if (n_elements < 1) throw std::invalid_argument("uniform_test_function: need >= 1 element");
  if (interior_values.size() != static_cast<std::size_t>(n_elements))
    throw std::invalid_argument("uniform_test_function: expected n_elements values (nodes 0..n-1)");
  PiecewiseLinear xi;
  xi.nodes.resize(static_cast<std::size_t>(n_elements) + 1);
  xi.values.resize(xi.nodes.size());
  for (int j = 0; j <= n_elements; ++j)
    xi.nodes[static_cast<std::size_t>(j)] = static_cast<double>(j) / n_elements;
  xi.nodes.back() = 1.0;
  for (int j = 0; j < n_elements; ++j)
    xi.values[static_cast<std::size_t>(j)] = interior_values[static_cast<std::size_t>(j)];
  xi.values.back() = 0.0;
  return xi;
}

double power_integral(double a, double b, double p) {
  if (!(0.0 <= a && a < b)) throw std::invalid_argument("power_integral: requires 0 <= a < b");
  if (a == 0.0 && p <= -1.0) return kInf;
  if (p == -1.0) return std::log(b / a);
  const double q = p + 1.0;
  return (std::pow(b, q) - (a == 0.0 ? 0.0 : std::pow(a, q))) / q;
}

double hardy_ratio(const PiecewiseLinear& xi, double alpha, double beta) {
  if (!(beta > -1.0)) throw std::invalid_argument("hardy_ratio: beta must exceed -1");
  if (!(alpha < 1.0)) throw std::invalid_argument("hardy_ratio: alpha must be below 1");
  check_test_function(xi);
  return ratio_over(xi, alpha, beta, 0.0);
}

double hardy_ratio_truncated(const PiecewiseLinear& xi, double alpha, double beta, double x_lo) {
  if (!(x_lo > 0.0 && x_lo < 1.0))
    throw std::invalid_argument("hardy_ratio_truncated: x_lo must lie in (0,1)");
  check_test_function(xi);
  return ratio_over(xi, alpha, beta, x_lo);
}

std::vector<HardyCase> hardy_sweep(std::span<const double> alphas, std::span<const double> betas,
                                   int n_random, std::uint64_t seed, unsigned threads) {
  for (double a : alphas)
    if (!(a < 1.0)) throw std::invalid_argument("hardy_sweep: alpha must be below 1");
  for (double b : betas)
    if (!(b > -1.0)) throw std::invalid_argument("hardy_sweep: beta must exceed -1");
  if (n_random < 0) throw std::invalid_argument("hardy_sweep: n_random must be nonnegative");
  if (n_random == 0) return {};

  std::vector<HardyCase> cases(alphas.size() * betas.size());
  parallel_for(cases.size(), threads, [&](std::size_t idx) {
    const double alpha = alphas[idx / betas.size()];
    const double beta = betas[idx % betas.size()];
    SplitMix64 rng(mix_seed(seed, idx));
    HardyCase hc;
    hc.alpha = alpha;
    hc.beta = beta;
    hc.n_samples = n_random;
    for (int mesh_n : {64, 512}) {
      // the smooth witness 1-x anchors the empirical lower bound; random
      // nodal data then prods for anything larger
      std::vector<double> vals(static_cast<std::size_t>(mesh_n));
      for (int j = 0; j < mesh_n; ++j)
        vals[static_cast<std::size_t>(j)] = 1.0 - static_cast<double>(j) / mesh_n;
      double best = hardy_ratio(uniform_test_function(mesh_n, vals), alpha, beta);
      for (int r = 0; r < n_random; ++r) {
        for (auto& v : vals) v = rng.symmetric();
        best = std::max(best, hardy_ratio(uniform_test_function(mesh_n, vals), alpha, beta));
      }
      (mesh_n == 64 ? hc.ratio_coarse : hc.ratio_fine) = best;
    }
    hc.ratio = std::max(hc.ratio_coarse, hc.ratio_fine);
    cases[idx] = hc;
  });
  return cases;
}

std::vector<ComparisonRow> build_comparison_table(
    std::span<const double> alphas, std::span<const std::pair<double, FittedRates>> fits) {
  std::vector<ComparisonRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    const RatePrediction p = predict_rates(alpha);
    ComparisonRow row;
    row.alpha = alpha;
    row.decay_order = p.decay_order;
    row.prior_order = p.prior_order;
    for (const auto& [a, f] : fits) {
      if (std::abs(a - alpha) <= 1e-12) {
        row.theta_fit = f.theta_fit;
        row.slope_energy = f.slope_energy;
        break;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace kvstring
