#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kvstring/model.hpp"

namespace kvstring {

// Piecewise-linear test function on a partition of [0,1]; Hardy probes
// require value 0 at x = 1.
struct PiecewiseLinear {
  std::vector<double> nodes;   // increasing, first >= 0, last = 1
  std::vector<double> values;  // nodal values
};

PiecewiseLinear uniform_test_function(int n_elements, std::span<const double> interior_values);

// int_a^b x^p dx in closed form. Returns +infinity when the integral diverges
// at a = 0 (p <= -1); p = -1 with a > 0 uses the logarithm.
double power_integral(double a, double b, double p);

// (int x^beta |xi|^2) / (int x^alpha |xi'|^2), both integrals exact per
// element by the power rule. Zero by convention for xi == 0, and zero when
// the denominator diverges. Hypotheses beta > -1 and alpha < 1 are enforced.
double hardy_ratio(const PiecewiseLinear& xi, double alpha, double beta);

// Same ratio with the integration truncated to [x_lo, 1]; the divergence probe
// for the excluded exponent beta = -1 drives x_lo toward zero.
double hardy_ratio_truncated(const PiecewiseLinear& xi, double alpha, double beta, double x_lo);

struct HardyCase {
  double alpha = 0.0;
  double beta = 0.0;
  double ratio = 0.0;         // max over samples and both meshes
  int n_samples = 0;
  double ratio_coarse = 0.0;  // max on the 64-element mesh
  double ratio_fine = 0.0;    // max on the 512-element mesh
};

// For each admissible pair, the max ratio over n_random random piecewise
// linear test functions on meshes of 64 and 512 elements. Randomness is split
// per pair from the seed, so the schedule cannot change the result.
std::vector<HardyCase> hardy_sweep(std::span<const double> alphas, std::span<const double> betas,
                                   int n_random, std::uint64_t seed, unsigned threads = 0);

struct ComparisonRow {
  double alpha = 0.0;
  double decay_order = 0.0;
  double prior_order = 0.0;
  std::optional<double> theta_fit;
  std::optional<double> slope_energy;
};

struct FittedRates {
  std::optional<double> theta_fit;
  std::optional<double> slope_energy;
};

std::vector<ComparisonRow> build_comparison_table(
    std::span<const double> alphas, std::span<const std::pair<double, FittedRates>> fits = {});

}  // namespace kvstring
